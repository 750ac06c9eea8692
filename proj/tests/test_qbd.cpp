#include <doctest.h>

#include "oracles.hpp"
#include "pbftrel/errors.hpp"
#include "pbftrel/generators.hpp"
#include "pbftrel/linalg.hpp"
#include "pbftrel/measures.hpp"
#include "pbftrel/qbd.hpp"

using namespace pbftrel;

namespace {

SystemParams stable_point() {
  SystemParams s;
  s.n = 1;
  s.theta = 0.05;
  s.mu = 0.2;
  s.gamma = 0.5;
  s.p = 0.9;
  s.beta = 0.2;
  s.lambda = 0.05;
  s.b = 2;
  return s;
}

QbdBlocks blocks_of(const SystemParams& s) {
  const ExtendedLaws laws = extended_laws(s);
  return build_qbd_blocks(laws.block, laws.orphan, s.lambda, s.b);
}

QbdBlocks mm1(double lambda, double nu) {
  QbdBlocks q;
  q.lambda = lambda;
  q.boundary_local = Eigen::MatrixXd::Constant(1, 1, -lambda);
  q.boundary_up = Eigen::MatrixXd::Constant(1, 1, lambda);
  q.boundary_up_arrival = q.boundary_up;
  q.first_down = Eigen::MatrixXd::Constant(1, 1, nu);
  q.local = Eigen::MatrixXd::Constant(1, 1, -(lambda + nu));
  q.up = Eigen::MatrixXd::Constant(1, 1, lambda);
  q.up_arrival = q.up;
  q.down = Eigen::MatrixXd::Constant(1, 1, nu);
  return q;
}

double max_row_sum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c) {
  return (a.rowwise().sum() + b.rowwise().sum() + c.rowwise().sum()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("level dimension for n = 2, b = 1 is 961") {
  SystemParams s = stable_point();
  s.n = 2;
  s.b = 1;
  const ExtendedLaws laws = extended_laws(s);
  CHECK(laws.block.order() == 31);
  CHECK(laws.orphan.order() == 31);
  const QbdBlocks q = build_qbd_blocks(laws.block, laws.orphan, s.lambda, s.b);
  CHECK(q.level_dim() == 961);
  CHECK(q.boundary_dim() == 31);
}

TEST_CASE("dimension cap is enforced") {
  SystemParams s = stable_point();
  s.n = 2;
  const ExtendedLaws laws = extended_laws(s);
  try {
    build_qbd_blocks(laws.block, laws.orphan, s.lambda, 30, 20000);
    FAIL("expected a dimension error");
  } catch (const DimensionError& e) {
    CHECK(e.dimension() == 30u * 961u);
    CHECK(e.cap() == 20000u);
  }
}

TEST_CASE("blocks are conservative and sign-correct") {
  std::mt19937_64 gen(41);
  for (int b = 1; b <= 3; ++b) {
    const SystemParams s = oracle::random_params(gen, 1, b);
    const QbdBlocks q = blocks_of(s);
    const double scale = q.local.cwiseAbs().maxCoeff();
    const Eigen::MatrixXd z0 = Eigen::MatrixXd::Zero(q.boundary_dim(), 0);
    CHECK(max_row_sum(q.boundary_local, q.boundary_up, z0) < 1e-12 * scale);
    CHECK(max_row_sum(q.first_down, q.local, q.up) < 1e-12 * scale);
    CHECK(max_row_sum(q.down, q.local, q.up) < 1e-12 * scale);
    CHECK((q.up.array() >= 0.0).all());
    CHECK((q.down.array() >= 0.0).all());
    CHECK((q.boundary_up.array() >= 0.0).all());
    CHECK((q.first_down.array() >= 0.0).all());
    Eigen::MatrixXd off = q.local;
    off.diagonal().setZero();
    CHECK((off.array() >= 0.0).all());
    CHECK((q.up_arrival.array() <= q.up.array()).all());
  }
}

TEST_CASE("lambda = 0 removes the arrival parts") {
  SystemParams s = stable_point();
  s.lambda = 0.0;
  const QbdBlocks q = blocks_of(s);
  CHECK(q.boundary_up_arrival.cwiseAbs().maxCoeff() == 0.0);
  CHECK(q.up_arrival.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar M/M/1 rate matrix") {
  const QbdBlocks q = mm1(1.0, 2.0);
  const RateMatrix r = solve_rate_matrix(q, {1e-15, 100000, {}});
  CHECK(std::abs(r.R(0, 0) - 0.5) < 1e-12);
  const StationaryQbd st = solve_boundary(q, r.R);
  CHECK(st.level0[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(st.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("no arrivals and no orphans leave only the rollback phase rows") {
  SystemParams s = stable_point();
  s.lambda = 0.0;
  s.p = 1.0;
  s.theta = 0.0;
  const QbdBlocks q = blocks_of(s);
  const RateMatrix r = solve_rate_matrix(q);
  // The orphan law never absorbs, so its propagation phase (the last orphan phase) is
  // never entered; only rows of that phase can be non-zero.
  const Eigen::Index ds = q.orphan_order, dt = q.service_order;
  for (Eigen::Index row = 0; row < q.level_dim(); ++row) {
    const Eigen::Index orphan_phase = (row / dt) % ds;
    if (orphan_phase != ds - 1) CHECK(r.R.row(row).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("rate iteration is monotone and has small residual") {
  std::mt19937_64 gen(43);
  for (int b = 1; b <= 3; ++b) {
    SystemParams s = stable_point();
    s.b = b;
    const QbdBlocks q = blocks_of(s);
    REQUIRE(stability_check(extended_laws(s).block, extended_laws(s).orphan, s.lambda, b).stable);
    Eigen::MatrixXd prev = Eigen::MatrixXd::Zero(q.level_dim(), q.level_dim());
    bool monotone = true;
    RateIterationOptions opt;
    opt.observer = [&](long, const Eigen::MatrixXd& R) {
      monotone = monotone && ((R - prev).array() >= -1e-15).all();
      prev = R;
    };
    const RateMatrix r = solve_rate_matrix(q, opt);
    CHECK(monotone);
    CHECK(r.residual < 1e-9);
    CHECK((r.R.array() >= 0.0).all());
    CHECK(spectral_radius(r.R) < 1.0);
  }
}

TEST_CASE("boundary solution: mass, boundary equations and global balance") {
  for (int b = 1; b <= 3; ++b) {
    SystemParams s = stable_point();
    s.b = b;
    const QbdBlocks q = blocks_of(s);
    const RateMatrix r = solve_rate_matrix(q);
    const StationaryQbd st = solve_boundary(q, r.R);
    CHECK(std::abs(st.total_mass() - 1.0) < 1e-10);
    CHECK((st.level0.array() >= 0.0).all());
    CHECK((st.level1.array() >= 0.0).all());
    const Eigen::RowVectorXd e0 = st.level0 * q.boundary_local + st.level1 * q.first_down;
    const Eigen::RowVectorXd e1 = st.level0 * q.boundary_up + st.level1 * (q.local + r.R * q.down);
    CHECK(e0.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(e1.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(balance_residual(st, q, 12) < 1e-9);
  }
}

TEST_CASE("flow conservation of the stationary event rates") {
  std::mt19937_64 gen(47);
  int checked = 0;
  for (int draw = 0; draw < 20 && checked < 6; ++draw) {
    SystemParams s = oracle::random_queue_params(gen, 1, 1 + draw % 3);
    const ExtendedLaws laws = extended_laws(s);
    if (!stability_check(laws.block, laws.orphan, s.lambda, s.b).stable) continue;
    const QbdBlocks q = build_qbd_blocks(laws.block, laws.orphan, s.lambda, s.b);
    const StationaryQbd st = solve_boundary(q, solve_rate_matrix(q).R);
    const EventRates e = stationary_event_rates(st, q);
    CHECK(s.lambda + s.b * e.orphan == doctest::Approx(s.b * e.block).epsilon(1e-8));
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("halving eps barely moves the empty-pool probability") {
  const SystemParams s = stable_point();
  const QbdBlocks q = blocks_of(s);
  const double eps = 1e-8;
  const double a = solve_boundary(q, solve_rate_matrix(q, {eps, 100000, {}}).R).level0.sum();
  const double b = solve_boundary(q, solve_rate_matrix(q, {eps / 2, 100000, {}}).R).level0.sum();
  CHECK(std::abs(a - b) <= 10 * eps);
}

TEST_CASE("stability: no orphan feedback leaves arrival against service") {
  SystemParams s = stable_point();
  s.p = 1.0;
  s.theta = 0.0;
  const ExtendedLaws laws = extended_laws(s);
  const StabilityVerdict v = stability_check(laws.block, laws.orphan, s.lambda, s.b);
  CHECK(v.up_drift == doctest::Approx(s.lambda).epsilon(1e-12));
  CHECK(v.down_drift == doctest::Approx(s.b / ph_mean(laws.block)).epsilon(1e-10));
  CHECK(v.stable);
}

TEST_CASE("stability: large arrival rate is unstable") {
  SystemParams s = stable_point();
  s.lambda = 50.0;
  const ExtendedLaws laws = extended_laws(s);
  const StabilityVerdict v = stability_check(laws.block, laws.orphan, s.lambda, s.b);
  CHECK_FALSE(v.stable);
  CHECK(v.up_drift > v.down_drift);
  CHECK(std::isfinite(v.swapped_up_drift));
}

TEST_CASE("drift verdict agrees with the spectral radius of R") {
  std::mt19937_64 gen(53);
  int cases = 0;
  for (int draw = 0; draw < 40 && cases < 12; ++draw) {
    SystemParams s = oracle::random_params(gen, 1, 1 + draw % 2);
    s.lambda = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const ExtendedLaws laws = extended_laws(s);
    const StabilityVerdict v = stability_check(laws.block, laws.orphan, s.lambda, s.b);
    const double gap = std::abs(v.up_drift - v.down_drift) / v.down_drift;
    if (gap < 0.05) continue;  // slow convergence near the boundary
    const QbdBlocks q = build_qbd_blocks(laws.block, laws.orphan, s.lambda, s.b);
    const RateMatrix r = solve_rate_matrix(q, {1e-12, 200000, {}});
    CHECK(v.stable == (spectral_radius(r.R) < 1.0 - 1e-6));
    ++cases;
  }
  CHECK(cases >= 6);
}
