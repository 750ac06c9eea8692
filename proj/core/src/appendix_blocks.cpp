#include "pbftrel/appendix_blocks.hpp"

#include <vector>

#include "pbftrel/state_space.hpp"

namespace pbftrel {

namespace {

constexpr Erratum kErrata[] = {
    {"orphan subgenerator", "level 2n, bottom diagonal entry of H_{i,i}, 0 <= i < n",
     "-[(N-k-n)*gamma*p + (n-i)*mu]", "-[(theta + gamma*q) + (n-i)*mu]"},
    {"full-cycle generator", "diagonal of D_{i,i} and E_{i,i} on rows with i+j <= n",
     "-b_{i,m} and -c_{k,i,m} (positive)", "b_{i,m} and c_{k,i,m} (negative)"},
};

using Triplets = std::vector<Eigen::Triplet<double>>;

// Writes block entries at (level, group, row-in-group) coordinates of one indexer.
class BlockWriter {
 public:
  explicit BlockWriter(const StateIndexer& space) : space_(space) {}

  std::size_t at(int k, int i, int m) const {
    const auto& p = space_.partition();
    return p.level_offsets[k] + p.group_offsets[k][i] + m;
  }
  void put(std::size_t row, std::size_t col, double v) {
    if (v != 0.0) out.emplace_back(row, col, v);
  }
  SparseMatrix matrix() const {
    SparseMatrix m(space_.size(), space_.size());
    m.setFromTriplets(out.begin(), out.end());
    m.makeCompressed();
    return m;
  }

  Triplets out;

 private:
  const StateIndexer& space_;
};

void transcribe_block(const SystemParams& s, AppendixTranscription& t) {
  const int n = s.n;
  const double N = s.total_nodes();
  const double th = s.theta, mu = s.mu, ga = s.gamma, p = s.p, q = s.q();
  const StateIndexer space(n, SpaceKind::block_absorbing);
  BlockWriter w(space);
  t.block_exit = Eigen::VectorXd::Zero(space.size());

  for (int k = 0; k <= 2 * n; ++k) {
    for (int i = 0; i <= n; ++i) {
      for (int m = 0; m <= n - i; ++m) {
        const auto row = w.at(k, i, m);
        // K_{i,i}^{(k)}
        const double c = m < n - i ? -((N - k - i - m) * (th + ga) + m * mu)
                                   : -((N - k - n) * ga * p + (n - i) * mu);
        w.put(row, row, c);
        if (m < n - i) w.put(row, w.at(k, i, m + 1), (N - k - i - m) * th);
        if (m >= 1) w.put(row, w.at(k, i, m - 1), m * mu);
        // K_{i,i+1}^{(k)}
        if (i < n && m <= n - i - 1) w.put(row, w.at(k, i + 1, m), (N - k - i - m) * ga * q);
        // F_{i,i}^{(k)} or the exit blocks L_i
        if (k < 2 * n) {
          w.put(row, w.at(k + 1, i, m), (N - k - i - m) * ga * p);
        } else {
          t.block_exit[row] = (n + 1 - i - m) * ga * p;
        }
      }
    }
  }
  t.block_subgenerator = w.matrix();
}

void transcribe_orphan(const SystemParams& s, AppendixReading reading, AppendixTranscription& t) {
  const int n = s.n;
  const double N = s.total_nodes();
  const double th = s.theta, mu = s.mu, ga = s.gamma, p = s.p, q = s.q();
  const StateIndexer space(n, SpaceKind::orphan_absorbing);
  BlockWriter w(space);
  t.orphan_exit = Eigen::VectorXd::Zero(space.size());

  for (int k = 0; k <= 2 * n; ++k) {
    for (int i = 0; i <= n; ++i) {
      for (int m = 0; m <= n - i; ++m) {
        const auto row = w.at(k, i, m);
        if (k < 2 * n) {
          // G_{i,i}^{(k)}, G_{i,i+1}^{(k)}, F_{i,i}^{(k)}
          w.put(row, row, -((N - k - i - m) * (th + ga) + m * mu));
          if (m < n - i) w.put(row, w.at(k, i, m + 1), (N - k - i - m) * th);
          if (m >= 1) w.put(row, w.at(k, i, m - 1), m * mu);
          if (i < n && m <= n - i - 1) w.put(row, w.at(k, i + 1, m), (N - k - i - m) * ga * q);
          w.put(row, w.at(k + 1, i, m), (N - k - i - m) * ga * p);
        } else {
          // H_{i,i}, H_{i,i+1}
          double f;
          if (i == n) {
            f = -(th + ga * q);
          } else if (m < n - i) {
            f = -((n + 1 - i - m) * (th + ga * q) + m * mu);
          } else if (reading == AppendixReading::literal) {
            f = -((N - k - n) * ga * p + (n - i) * mu);
          } else {
            f = -((th + ga * q) + (n - i) * mu);
          }
          w.put(row, row, f);
          if (m < n - i) w.put(row, w.at(k, i, m + 1), (n + 1 - i - m) * th);
          if (m >= 1) w.put(row, w.at(k, i, m - 1), m * mu);
          if (i < n && m <= n - i - 1) w.put(row, w.at(k, i + 1, m), (n + 1 - i - m) * ga * q);
        }
        // S_{k,i}^0: only the last row of each group
        if (m == n - i) t.orphan_exit[row] = (N - k - n) * (th + ga * q);
      }
    }
  }
  t.orphan_subgenerator = w.matrix();
}

void transcribe_full_cycle(const SystemParams& s, AppendixReading reading,
                           AppendixTranscription& t) {
  const int n = s.n;
  const double N = s.total_nodes();
  const double th = s.theta, mu = s.mu, ga = s.gamma, p = s.p, q = s.q(), be = s.beta;
  const StateIndexer space(n, SpaceKind::full_cycle);
  BlockWriter w(space);
  const std::size_t origin = 0;
  const double sign = reading == AppendixReading::literal ? -1.0 : 1.0;

  // D blocks (k = 0) and E blocks (1 <= k <= 2n), with B, C and the return blocks A.
  for (int k = 0; k <= 2 * n; ++k) {
    for (int i = 0; i <= n + 1; ++i) {
      const int last = n + 1 - i;
      for (int m = 0; m <= last; ++m) {
        const auto row = w.at(k, i, m);
        if (i == n + 1) {
          w.put(row, row, -be);
          w.put(row, origin, be);
          continue;
        }
        if (m < last) {
          const double c = -((N - k - i - m) * (th + ga) + m * mu);
          w.put(row, row, sign * c);
          w.put(row, w.at(k, i, m + 1), (N - k - i - m) * th);
          w.put(row, w.at(k, i + 1, m), (N - k - i - m) * ga * q);
          if (k < 2 * n) {
            w.put(row, w.at(k + 1, i, m), (N - k - i - m) * ga * p);
          } else {
            w.put(row, w.at(2 * n + 1, i, m), (n + 1 - i - m) * ga * p);
          }
        } else {
          const double d = (n + 1 - i) * mu;
          w.put(row, row, -d - be);
          w.put(row, origin, be);
        }
        if (m >= 1) w.put(row, w.at(k, i, m - 1), m * mu);
      }
    }
  }
  // Level 2n+1: K and J blocks.
  const int top = 2 * n + 1;
  for (int i = 0; i <= n; ++i) {
    for (int m = 0; m <= n - i; ++m) {
      const auto row = w.at(top, i, m);
      if (i == n) {
        w.put(row, row, -be);
      } else {
        w.put(row, row, -((n - i - m) * (th + ga * q) + m * mu + be));
        if (m < n - i) w.put(row, w.at(top, i, m + 1), (n - i - m) * th);
        if (m <= n - i - 1) w.put(row, w.at(top, i + 1, m), (n - i - m) * ga * q);
      }
      if (m >= 1) w.put(row, w.at(top, i, m - 1), m * mu);
      w.put(row, origin, be);
    }
  }
  t.full_cycle = w.matrix();
}

}  // namespace

AppendixTranscription transcribe_appendix(const SystemParams& params, AppendixReading reading) {
  check_params(params);
  AppendixTranscription t;
  transcribe_block(params, t);
  transcribe_orphan(params, reading, t);
  transcribe_full_cycle(params, reading, t);
  return t;
}

std::span<const Erratum> appendix_errata() { return kErrata; }

}  // namespace pbftrel
