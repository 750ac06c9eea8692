#pragma once

// Reference computations that share no code with the library: brute-force enumeration,
// dense linear algebra and closed forms.

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "pbftrel/params.hpp"

namespace oracle {

using Triple = std::tuple<int, int, int>;

// Null vector of a dense generator by SVD.
inline Eigen::RowVectorXd null_space_stationary(const Eigen::MatrixXd& q) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(q.transpose(), Eigen::ComputeFullV);
  Eigen::VectorXd v = svd.matrixV().col(q.rows() - 1);
  v /= v.sum();
  return v.transpose();
}

// Dense generator of the per-node block-round chain written from the verbal rules:
// map (k,i,j) -> index, absorbing states excluded. Returns T and the block exit vector.
struct DenseChain {
  Eigen::MatrixXd sub;
  Eigen::VectorXd block_exit;
  Eigen::VectorXd orphan_exit;
  std::map<Triple, int> index;
};

inline DenseChain round_chain(const pbftrel::SystemParams& s) {
  DenseChain c;
  const int n = s.n, N = 3 * n + 1;
  int next = 0;
  for (int k = 0; k <= 2 * n; ++k)
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) c.index[{k, i, j}] = next++;
  c.sub = Eigen::MatrixXd::Zero(next, next);
  c.block_exit = Eigen::VectorXd::Zero(next);
  c.orphan_exit = Eigen::VectorXd::Zero(next);
  for (const auto& [st, m] : c.index) {
    const auto [k, i, j] = st;
    const double idle = N - k - i - j;
    auto go = [&](Triple t, double r, bool* to_block, bool* to_orphan) {
      auto it = c.index.find(t);
      if (it != c.index.end()) {
        c.sub(m, it->second) += r;
      } else if (std::get<0>(t) == 2 * n + 1) {
        c.block_exit[m] += r;
        *to_block = true;
      } else {
        c.orphan_exit[m] += r;
        *to_orphan = true;
      }
    };
    bool b = false, o = false;
    go({k + 1, i, j}, idle * s.gamma * s.p, &b, &o);
    go({k, i + 1, j}, idle * s.gamma * (1 - s.p), &b, &o);
    go({k, i, j + 1}, idle * s.theta, &b, &o);
    if (j > 0) go({k, i, j - 1}, j * s.mu, &b, &o);
  }
  return c;
}

// CDF of a sum of independent exponentials with distinct rates.
inline double hypoexponential_cdf(const std::vector<double>& rates, double t) {
  double surv = 0.0;
  for (std::size_t a = 0; a < rates.size(); ++a) {
    double w = 1.0;
    for (std::size_t b = 0; b < rates.size(); ++b) {
      if (a != b) w *= rates[b] / (rates[b] - rates[a]);
    }
    surv += w * std::exp(-rates[a] * t);
  }
  return 1.0 - surv;
}

inline pbftrel::SystemParams random_params(std::mt19937_64& g, int n, int b = 1) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::uniform_real_distribution<double> prob(0.1, 0.9);
  pbftrel::SystemParams s;
  s.n = n;
  s.theta = u(g);
  s.mu = u(g);
  s.gamma = u(g);
  s.p = prob(g);
  s.beta = u(g);
  s.lambda = u(g) * 0.1;
  s.b = b;
  return s;
}

// Draws biased toward a stable queue: frequent approvals, rare failures and light load.
inline pbftrel::SystemParams random_queue_params(std::mt19937_64& g, int n, int b = 1) {
  pbftrel::SystemParams s = random_params(g, n, b);
  std::uniform_real_distribution<double> prob(0.85, 0.98);
  std::uniform_real_distribution<double> small(0.01, 0.1);
  s.p = prob(g);
  s.theta = small(g);
  s.lambda = small(g) * 0.5;
  return s;
}

}  // namespace oracle
