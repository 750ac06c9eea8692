#include "pbftrel/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SparseLU>
#include <cmath>

#include "pbftrel/errors.hpp"

namespace pbftrel {

Eigen::RowVectorXd gth_stationary(const Eigen::MatrixXd& generator) {
  const Eigen::Index d = generator.rows();
  if (d == 0 || generator.cols() != d) throw NumericalError("GTH needs a square generator");
  Eigen::MatrixXd a = generator;
  for (Eigen::Index r = 0; r < d; ++r) a(r, r) = 0.0;

  for (Eigen::Index k = d - 1; k > 0; --k) {
    const double s = a.row(k).head(k).sum();
    if (!(s > 0.0)) {
      throw NumericalError("GTH elimination met a zero pivot at state " + std::to_string(k) +
                           ": the generator is not irreducible");
    }
    a.col(k).head(k) /= s;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double f = a(i, k);
      if (f != 0.0) a.row(i).head(k) += f * a.row(k).head(k);
    }
  }
  Eigen::RowVectorXd pi(d);
  pi[0] = 1.0;
  for (Eigen::Index k = 1; k < d; ++k) pi[k] = pi.head(k).dot(a.col(k).head(k));
  return pi / pi.sum();
}

Eigen::RowVectorXd sparse_stationary(const SparseMatrix& generator) {
  const Eigen::Index d = generator.rows();
  Eigen::SparseMatrix<double> at = generator.transpose();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(at.nonZeros() + d);
  for (Eigen::Index c = 0; c < at.outerSize(); ++c) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(at, c); it; ++it) {
      if (it.row() != d - 1) t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index c = 0; c < d; ++c) t.emplace_back(d - 1, c, 1.0);
  Eigen::SparseMatrix<double> sys(d, d);
  sys.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  rhs[d - 1] = 1.0;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(sys);
  if (lu.info() != Eigen::Success) throw NumericalError("stationary system is singular");
  Eigen::VectorXd x = lu.solve(rhs);
  return x.transpose();
}

Eigen::RowVectorXd dense_stationary(const Eigen::MatrixXd& generator) {
  const Eigen::Index d = generator.rows();
  Eigen::MatrixXd sys = generator.transpose();
  sys.row(d - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  rhs[d - 1] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  if (!lu.isInvertible()) throw NumericalError("stationary system is singular");
  return lu.solve(rhs).transpose();
}

double spectral_radius(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b) {
  Eigen::SparseMatrix<double> col = a;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(col);
  if (lu.info() != Eigen::Success) throw NumericalError("sparse LU: matrix is singular");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) {
    throw NumericalError("sparse LU: solve failed");
  }
  return x;
}

double inf_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

}  // namespace pbftrel
