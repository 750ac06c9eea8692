#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pbftrel/state_space.hpp"

namespace pbftrel {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Conservativity { conservative, sub_conservative };

// CTMC rate matrix with its diagonal stored explicitly. Entries are kept row-major and
// sorted, so any dump is byte-stable.
class SparseGenerator {
 public:
  SparseGenerator() = default;
  SparseGenerator(SparseMatrix matrix, Conservativity tag);

  Eigen::Index rows() const noexcept { return matrix_.rows(); }
  Eigen::Index cols() const noexcept { return matrix_.cols(); }
  Conservativity tag() const noexcept { return tag_; }
  const SparseMatrix& matrix() const noexcept { return matrix_; }

  Eigen::VectorXd row_sums() const;
  Eigen::VectorXd diagonal() const;
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(matrix_); }
  // Largest total outflow over states.
  double max_outflow() const;

  // "row col rate" per line, 0-based, sorted, 17 significant digits.
  void write_matrix_market(std::ostream& os) const;

 private:
  SparseMatrix matrix_;
  Conservativity tag_ = Conservativity::conservative;
};

// Transient part of an absorbing chain: initial law, subgenerator and aggregated exit rates.
struct AbsorbingChain {
  Eigen::VectorXd initial;
  SparseGenerator subgenerator;
  Eigen::VectorXd exit;
  // Present when the subgenerator is block upper bidiagonal over this partition.
  std::optional<BlockPartition> partition;
};

// Accumulates off-diagonal rates and fills the diagonal so that each row, together with
// the row's exit rate, sums to zero.
class GeneratorBuilder {
 public:
  GeneratorBuilder(Eigen::Index rows, Eigen::Index cols);

  // Zero rates are skipped. Adding twice to the same cell accumulates.
  void add(Eigen::Index row, Eigen::Index col, double rate);
  void add_exit(Eigen::Index row, double rate);

  const Eigen::VectorXd& exit() const noexcept { return exit_; }
  SparseGenerator finish(Conservativity tag) const;

 private:
  Eigen::Index rows_;
  Eigen::Index cols_;
  std::vector<Eigen::Triplet<double>> entries_;
  Eigen::VectorXd outflow_;
  Eigen::VectorXd exit_;
};

// Throws ValidationError unless off-diagonals are non-negative and rows of
// [generator | exit] sum to zero within `tol` relative to the row's outflow.
void check_conservative(const SparseGenerator& gen, double tol = 1e-12);
void check_absorbing(const AbsorbingChain& chain, double tol = 1e-12);

}  // namespace pbftrel
