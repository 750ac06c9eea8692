#include "pbftrel/block_inverse.hpp"

#include <cmath>
#include <string>

#include "pbftrel/errors.hpp"

namespace pbftrel {

TridiagonalLu::TridiagonalLu(Eigen::VectorXd sub, Eigen::VectorXd diag, Eigen::VectorXd sup)
    : lower_(Eigen::VectorXd::Zero(diag.size())), pivot_(diag.size()), sup_(std::move(sup)) {
  const Eigen::Index s = diag.size();
  for (Eigen::Index m = 0; m < s; ++m) {
    double u = diag[m];
    double scale = std::abs(diag[m]);
    if (m > 0) {
      lower_[m] = sub[m] / pivot_[m - 1];
      u -= lower_[m] * sup_[m - 1];
      scale += std::abs(sub[m]);
    }
    if (m + 1 < s) scale += std::abs(sup_[m]);
    if (!(std::abs(u) > 1e-14 * scale) || !std::isfinite(u)) {
      throw NumericalError("singular tridiagonal block (pivot " + std::to_string(m) + ")");
    }
    pivot_[m] = u;
  }
}

Eigen::VectorXd TridiagonalLu::solve(const Eigen::VectorXd& rhs) const {
  const Eigen::Index s = size();
  Eigen::VectorXd z = rhs;
  for (Eigen::Index m = 1; m < s; ++m) z[m] -= lower_[m] * z[m - 1];
  for (Eigen::Index m = s - 1; m >= 0; --m) {
    if (m + 1 < s) z[m] -= sup_[m] * z[m + 1];
    z[m] /= pivot_[m];
  }
  return z;
}

Eigen::RowVectorXd TridiagonalLu::solve_left(const Eigen::RowVectorXd& rhs) const {
  const Eigen::Index s = size();
  Eigen::RowVectorXd w = rhs;
  for (Eigen::Index m = 0; m < s; ++m) {
    if (m > 0) w[m] -= w[m - 1] * sup_[m - 1];
    w[m] /= pivot_[m];
  }
  for (Eigen::Index m = s - 2; m >= 0; --m) w[m] -= w[m + 1] * lower_[m + 1];
  return w;
}

Eigen::MatrixXd TridiagonalLu::inverse() const {
  const Eigen::Index s = size();
  Eigen::MatrixXd inv(s, s);
  for (Eigen::Index c = 0; c < s; ++c) inv.col(c) = solve(Eigen::VectorXd::Unit(s, c));
  return inv;
}

namespace {

struct Position {
  std::size_t level;
  std::size_t group;
  std::size_t offset;  // within group
  std::size_t level_offset;
};

std::vector<Position> positions(const BlockPartition& p) {
  std::vector<Position> out(p.size());
  for (std::size_t l = 0; l < p.levels(); ++l) {
    const auto& g = p.group_offsets[l];
    for (std::size_t gi = 0; gi + 1 < g.size(); ++gi) {
      for (std::size_t o = g[gi]; o < g[gi + 1]; ++o) {
        out[p.level_offsets[l] + o] = {l, gi, o - g[gi], o};
      }
    }
  }
  return out;
}

SparseMatrix from_triplets(Eigen::Index r, Eigen::Index c,
                           const std::vector<Eigen::Triplet<double>>& t) {
  SparseMatrix m(r, c);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

BlockBidiagonalSolver::BlockBidiagonalSolver(const SparseMatrix& m, BlockPartition partition)
    : partition_(std::move(partition)) {
  const auto& P = partition_;
  if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != P.size()) {
    throw ValidationError("matrix", "matrix size does not match the block partition");
  }
  const auto pos = positions(P);
  const std::size_t L = P.levels();

  std::vector<std::vector<Eigen::VectorXd>> sub(L), diag(L), sup(L);
  std::vector<std::vector<std::vector<Eigen::Triplet<double>>>> gup(L);
  std::vector<std::vector<Eigen::Triplet<double>>> lup(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& g = P.group_offsets[l];
    for (std::size_t gi = 0; gi + 1 < g.size(); ++gi) {
      const auto s = static_cast<Eigen::Index>(g[gi + 1] - g[gi]);
      sub[l].push_back(Eigen::VectorXd::Zero(s));
      diag[l].push_back(Eigen::VectorXd::Zero(s));
      sup[l].push_back(Eigen::VectorXd::Zero(s));
    }
    gup[l].resize(g.size() - 1);
  }

  for (Eigen::Index r = 0; r < m.outerSize(); ++r) {
    const Position& a = pos[r];
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      if (it.value() == 0.0) continue;
      const Position& b = pos[it.col()];
      const auto bad = [&] {
        throw ValidationError("matrix", "entry (" + std::to_string(r) + "," +
                                            std::to_string(it.col()) +
                                            ") breaks the block bidiagonal pattern");
      };
      if (b.level == a.level && b.group == a.group) {
        if (b.offset == a.offset) {
          diag[a.level][a.group][a.offset] += it.value();
        } else if (b.offset == a.offset + 1) {
          sup[a.level][a.group][a.offset] += it.value();
        } else if (b.offset + 1 == a.offset) {
          sub[a.level][a.group][a.offset] += it.value();
        } else {
          bad();
        }
      } else if (b.level == a.level && b.group == a.group + 1) {
        gup[a.level][a.group].emplace_back(a.offset, b.offset, it.value());
      } else if (b.level == a.level + 1) {
        lup[a.level].emplace_back(a.level_offset, b.level_offset, it.value());
      } else {
        bad();
      }
    }
  }

  levels_.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& g = P.group_offsets[l];
    Level& lv = levels_[l];
    for (std::size_t gi = 0; gi + 1 < g.size(); ++gi) {
      try {
        lv.groups.emplace_back(sub[l][gi], diag[l][gi], sup[l][gi]);
      } catch (const NumericalError&) {
        throw NumericalError("singular diagonal block at level " + std::to_string(l) +
                             ", group " + std::to_string(gi));
      }
      const auto rows = static_cast<Eigen::Index>(g[gi + 1] - g[gi]);
      const auto cols = gi + 2 < g.size() ? static_cast<Eigen::Index>(g[gi + 2] - g[gi + 1]) : 0;
      lv.group_up.push_back(from_triplets(rows, cols, gup[l][gi]));
    }
    const auto rows = static_cast<Eigen::Index>(P.level_size(l));
    const auto cols = l + 1 < L ? static_cast<Eigen::Index>(P.level_size(l + 1)) : 0;
    lv.level_up = from_triplets(rows, cols, lup[l]);
  }
}

Eigen::VectorXd BlockBidiagonalSolver::solve_level(std::size_t l, Eigen::VectorXd rhs) const {
  const auto& g = partition_.group_offsets[l];
  const Level& lv = levels_[l];
  const std::size_t G = lv.groups.size();
  for (std::size_t gi = G; gi-- > 0;) {
    const auto o = static_cast<Eigen::Index>(g[gi]);
    const auto s = static_cast<Eigen::Index>(g[gi + 1] - g[gi]);
    Eigen::VectorXd r = rhs.segment(o, s);
    if (gi + 1 < G) {
      const auto s2 = static_cast<Eigen::Index>(g[gi + 2] - g[gi + 1]);
      r -= lv.group_up[gi] * rhs.segment(o + s, s2);
    }
    rhs.segment(o, s) = lv.groups[gi].solve(r);
  }
  return rhs;
}

Eigen::RowVectorXd BlockBidiagonalSolver::solve_level_left(std::size_t l,
                                                           Eigen::RowVectorXd rhs) const {
  const auto& g = partition_.group_offsets[l];
  const Level& lv = levels_[l];
  const std::size_t G = lv.groups.size();
  for (std::size_t gi = 0; gi < G; ++gi) {
    const auto o = static_cast<Eigen::Index>(g[gi]);
    const auto s = static_cast<Eigen::Index>(g[gi + 1] - g[gi]);
    Eigen::RowVectorXd r = rhs.segment(o, s);
    if (gi > 0) {
      const auto o0 = static_cast<Eigen::Index>(g[gi - 1]);
      const auto s0 = static_cast<Eigen::Index>(g[gi] - g[gi - 1]);
      r -= rhs.segment(o0, s0) * lv.group_up[gi - 1];
    }
    rhs.segment(o, s) = lv.groups[gi].solve_left(r);
  }
  return rhs;
}

Eigen::VectorXd BlockBidiagonalSolver::solve(const Eigen::VectorXd& rhs) const {
  const auto& P = partition_;
  Eigen::VectorXd x(rhs.size());
  for (std::size_t l = P.levels(); l-- > 0;) {
    const auto o = static_cast<Eigen::Index>(P.level_offsets[l]);
    const auto s = static_cast<Eigen::Index>(P.level_size(l));
    Eigen::VectorXd r = rhs.segment(o, s);
    if (l + 1 < P.levels()) {
      r -= levels_[l].level_up * x.segment(o + s, static_cast<Eigen::Index>(P.level_size(l + 1)));
    }
    x.segment(o, s) = solve_level(l, std::move(r));
  }
  return x;
}

Eigen::RowVectorXd BlockBidiagonalSolver::solve_left(const Eigen::RowVectorXd& rhs) const {
  const auto& P = partition_;
  Eigen::RowVectorXd y(rhs.size());
  for (std::size_t l = 0; l < P.levels(); ++l) {
    const auto o = static_cast<Eigen::Index>(P.level_offsets[l]);
    const auto s = static_cast<Eigen::Index>(P.level_size(l));
    Eigen::RowVectorXd r = rhs.segment(o, s);
    if (l > 0) {
      const auto o0 = static_cast<Eigen::Index>(P.level_offsets[l - 1]);
      const auto s0 = static_cast<Eigen::Index>(P.level_size(l - 1));
      r -= y.segment(o0, s0) * levels_[l - 1].level_up;
    }
    y.segment(o, s) = solve_level_left(l, std::move(r));
  }
  return y;
}

Eigen::MatrixXd BlockBidiagonalSolver::level_inverse(std::size_t l) const {
  const auto& g = partition_.group_offsets[l];
  const Level& lv = levels_[l];
  const std::size_t G = lv.groups.size();
  const auto s = static_cast<Eigen::Index>(partition_.level_size(l));
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(s, s);
  for (std::size_t gi = G; gi-- > 0;) {
    const auto o = static_cast<Eigen::Index>(g[gi]);
    const auto sg = static_cast<Eigen::Index>(g[gi + 1] - g[gi]);
    const Eigen::MatrixXd kinv = lv.groups[gi].inverse();
    x.block(o, o, sg, sg) = kinv;
    if (gi + 1 < G) {
      const auto o1 = o + sg;
      const auto s1 = static_cast<Eigen::Index>(g[gi + 2] - g[gi + 1]);
      const Eigen::MatrixXd coupling = lv.group_up[gi] * x.block(o1, o1, s1, s - o1);
      x.block(o, o1, sg, s - o1) = -kinv * coupling;
    }
  }
  return x;
}

Eigen::MatrixXd BlockBidiagonalSolver::inverse() const {
  const auto& P = partition_;
  const auto d = static_cast<Eigen::Index>(P.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t l = P.levels(); l-- > 0;) {
    const auto o = static_cast<Eigen::Index>(P.level_offsets[l]);
    const auto s = static_cast<Eigen::Index>(P.level_size(l));
    const Eigen::MatrixXd dinv = level_inverse(l);
    j.block(o, o, s, s) = dinv;
    if (l + 1 < P.levels()) {
      const auto o1 = o + s;
      const auto s1 = static_cast<Eigen::Index>(P.level_size(l + 1));
      const Eigen::MatrixXd coupling = levels_[l].level_up * j.block(o1, o1, s1, d - o1);
      j.block(o, o1, s, d - o1) = -dinv * coupling;
    }
  }
  return j;
}

Eigen::MatrixXd block_triangular_inverse(const SparseMatrix& m, const BlockPartition& partition) {
  return BlockBidiagonalSolver(m, partition).inverse();
}

}  // namespace pbftrel
