#pragma once

#include <Eigen/Core>
#include <vector>

#include "pbftrel/sparse_generator.hpp"
#include "pbftrel/state_space.hpp"

namespace pbftrel {

// LU of a tridiagonal matrix without pivoting. `sub[m]` sits at (m, m-1), `sup[m]` at
// (m, m+1); sub[0] and sup[size-1] are ignored.
class TridiagonalLu {
 public:
  TridiagonalLu() = default;
  // Throws NumericalError on a vanishing pivot.
  TridiagonalLu(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd sup);

  Eigen::Index size() const noexcept { return pivot_.size(); }
  // x with K x = rhs.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  // y with y K = rhs.
  Eigen::RowVectorXd solve_left(const Eigen::RowVectorXd& rhs) const;
  Eigen::MatrixXd inverse() const;

 private:
  Eigen::VectorXd lower_;  // multipliers at (m, m-1)
  Eigen::VectorXd pivot_;
  Eigen::VectorXd sup_;
};

// Solver for matrices that are block upper bidiagonal over the levels of a partition,
// whose diagonal level blocks are block upper bidiagonal over groups, with tridiagonal
// group blocks. Inverses follow the block recursion
//   J(l, l) = D_l^{-1},  J(l, m) = -D_l^{-1} U_l J(l+1, m),
// with D_l^{-1} obtained by the same recursion over groups.
class BlockBidiagonalSolver {
 public:
  // Throws ValidationError when `m` has an entry outside the admissible pattern and
  // NumericalError naming (level, group) when a group block is singular.
  BlockBidiagonalSolver(const SparseMatrix& m, BlockPartition partition);

  std::size_t size() const noexcept { return partition_.size(); }
  const BlockPartition& partition() const noexcept { return partition_; }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  Eigen::RowVectorXd solve_left(const Eigen::RowVectorXd& rhs) const;

  // Inverse of diagonal level block `level`.
  Eigen::MatrixXd level_inverse(std::size_t level) const;
  Eigen::MatrixXd inverse() const;

 private:
  struct Level {
    std::vector<TridiagonalLu> groups;
    std::vector<SparseMatrix> group_up;  // group g -> g+1
    SparseMatrix level_up;               // level l -> l+1
  };

  Eigen::VectorXd solve_level(std::size_t l, Eigen::VectorXd rhs) const;
  Eigen::RowVectorXd solve_level_left(std::size_t l, Eigen::RowVectorXd rhs) const;

  BlockPartition partition_;
  std::vector<Level> levels_;
};

Eigen::MatrixXd block_triangular_inverse(const SparseMatrix& m, const BlockPartition& partition);

}  // namespace pbftrel
