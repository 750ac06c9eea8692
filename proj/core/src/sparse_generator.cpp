#include "pbftrel/sparse_generator.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "pbftrel/errors.hpp"

namespace pbftrel {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

}  // namespace

SparseGenerator::SparseGenerator(SparseMatrix matrix, Conservativity tag)
    : matrix_(std::move(matrix)), tag_(tag) {
  matrix_.makeCompressed();
}

Eigen::VectorXd SparseGenerator::row_sums() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(matrix_.rows());
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) out[r] += it.value();
  }
  return out;
}

Eigen::VectorXd SparseGenerator::diagonal() const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(std::min(matrix_.rows(), matrix_.cols()));
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      if (it.col() == r) out[r] = it.value();
    }
  }
  return out;
}

double SparseGenerator::max_outflow() const {
  double best = 0.0;
  const Eigen::VectorXd d = diagonal();
  for (Eigen::Index r = 0; r < d.size(); ++r) best = std::max(best, -d[r]);
  return best;
}

void SparseGenerator::write_matrix_market(std::ostream& os) const {
  std::string line;
  line = std::to_string(matrix_.rows()) + " " + std::to_string(matrix_.cols()) + " " +
         std::to_string(matrix_.nonZeros()) + "\n";
  os << line;
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix_, r); it; ++it) {
      line = std::to_string(r) + " " + std::to_string(it.col()) + " ";
      append_number(line, it.value());
      line += '\n';
      os << line;
    }
  }
}

GeneratorBuilder::GeneratorBuilder(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), outflow_(Eigen::VectorXd::Zero(rows)),
      exit_(Eigen::VectorXd::Zero(rows)) {}

void GeneratorBuilder::add(Eigen::Index row, Eigen::Index col, double rate) {
  if (rate == 0.0) return;
  entries_.emplace_back(row, col, rate);
  outflow_[row] += rate;
}

void GeneratorBuilder::add_exit(Eigen::Index row, double rate) {
  if (rate == 0.0) return;
  exit_[row] += rate;
  outflow_[row] += rate;
}

SparseGenerator GeneratorBuilder::finish(Conservativity tag) const {
  std::vector<Eigen::Triplet<double>> all = entries_;
  for (Eigen::Index r = 0; r < std::min(rows_, cols_); ++r) {
    if (outflow_[r] != 0.0) all.emplace_back(r, r, -outflow_[r]);
  }
  SparseMatrix m(rows_, cols_);
  m.setFromTriplets(all.begin(), all.end());
  return SparseGenerator(std::move(m), tag);
}

namespace {

void check_rows(const SparseMatrix& m, const Eigen::VectorXd* exit, double tol) {
  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    double sum = exit ? (*exit)[r] : 0.0;
    double scale = exit ? std::abs((*exit)[r]) : 0.0;
    if (exit && (*exit)[r] < 0.0) {
      throw ValidationError("exit", "negative exit rate in row " + std::to_string(r));
    }
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.col() != r && it.value() < 0.0) {
        throw ValidationError("generator", "negative off-diagonal rate at (" + std::to_string(r) +
                                               "," + std::to_string(it.col()) + ")");
      }
      sum += it.value();
      scale += std::abs(it.value());
    }
    if (std::abs(sum) > tol * std::max(1.0, scale)) {
      throw ValidationError("generator", "row " + std::to_string(r) + " does not conserve rate");
    }
  }
}

}  // namespace

void check_conservative(const SparseGenerator& gen, double tol) {
  check_rows(gen.matrix(), nullptr, tol);
}

void check_absorbing(const AbsorbingChain& chain, double tol) {
  const auto& m = chain.subgenerator.matrix();
  if (m.rows() != m.cols() || chain.exit.size() != m.rows() || chain.initial.size() != m.rows()) {
    throw ValidationError("chain", "absorbing chain dimensions disagree");
  }
  check_rows(m, &chain.exit, tol);
  if (std::abs(chain.initial.sum() - 1.0) > tol || (chain.initial.array() < 0.0).any()) {
    throw ValidationError("initial", "initial vector must be a probability vector");
  }
}

}  // namespace pbftrel
