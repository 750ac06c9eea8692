#pragma once

#include <Eigen/Core>

#include "pbftrel/sparse_generator.hpp"

namespace pbftrel {

// Stationary vector of a dense conservative generator by Grassmann-Taksar-Heyman
// elimination. Only off-diagonal entries are read, so no subtractions occur.
// Throws NumericalError when the chain has no unique stationary law reachable from the
// elimination order (a zero pivot).
Eigen::RowVectorXd gth_stationary(const Eigen::MatrixXd& generator);

// Stationary vector of a sparse conservative generator: sparse LU on the transposed
// balance equations with the last equation replaced by normalization.
Eigen::RowVectorXd sparse_stationary(const SparseMatrix& generator);

// Dense counterpart of sparse_stationary, using full-pivot LU.
Eigen::RowVectorXd dense_stationary(const Eigen::MatrixXd& generator);

// Largest eigenvalue modulus.
double spectral_radius(const Eigen::MatrixXd& m);

// Solves A x = b with sparse LU; throws NumericalError when A is singular.
Eigen::VectorXd sparse_solve(const SparseMatrix& a, const Eigen::VectorXd& b);

// Maximum absolute row sum.
double inf_norm(const Eigen::MatrixXd& m);

}  // namespace pbftrel
