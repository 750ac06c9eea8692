#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pbftrel/generators.hpp"
#include "pbftrel/reliability.hpp"

using namespace pbftrel;

namespace {

SystemParams base(int n, double theta, double mu) {
  SystemParams s;
  s.n = n;
  s.theta = theta;
  s.mu = mu;
  s.gamma = 0.5;
  s.p = 0.7;
  s.beta = 0.2;
  s.lambda = 0.1;
  s.b = 1;
  return s;
}

double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Trapezoid rule on a uniform grid.
double integrate(const ReliabilityCurve& c) {
  double sum = 0.0;
  for (std::size_t m = 1; m < c.t.size(); ++m) {
    sum += 0.5 * (c.value[m] + c.value[m - 1]) * (c.t[m] - c.t[m - 1]);
  }
  return sum;
}

std::vector<double> uniform_grid(double end, int points) {
  std::vector<double> g(points);
  for (int m = 0; m < points; ++m) g[m] = end * m / (points - 1);
  return g;
}

void check_curve_shape(const ReliabilityCurve& c) {
  REQUIRE(!c.t.empty());
  CHECK(c.t[0] == 0.0);
  CHECK(c.value[0] == 1.0);
  for (std::size_t m = 1; m < c.t.size(); ++m) {
    CHECK(c.t[m] > c.t[m - 1]);
    CHECK(c.value[m] <= c.value[m - 1]);
    CHECK(c.value[m] >= 0.0);
  }
}

}  // namespace

TEST_CASE("A1 without failures is one") {
  const InherentAvailability a = availability_inherent(base(2, 0.0, 0.3));
  CHECK(a.a1 == 1.0);
  CHECK(a.unavailability == 0.0);
  CHECK(availability_inherent_closed_form(base(2, 0.0, 0.3)) == 1.0);
}

TEST_CASE("A1 at n = 1, rho = 1 is 5/16") {
  const SystemParams s = base(1, 0.4, 0.4);
  CHECK(std::abs(availability_inherent(s).a1 - 5.0 / 16.0) < 1e-14);
  CHECK(std::abs(availability_inherent_closed_form(s) - 5.0 / 16.0) < 1e-14);
}

TEST_CASE("A1: recursion, closed form and null-space solve agree") {
  std::mt19937_64 gen(61);
  std::uniform_real_distribution<double> logrho(-3.0, 1.0);
  for (int n = 1; n <= 5; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const double rho = std::pow(10.0, logrho(gen));
      const SystemParams s = base(n, rho, 1.0);
      const InherentAvailability a = availability_inherent(s);
      const Eigen::RowVectorXd pi = oracle::null_space_stationary(build_birth_death(s).dense());
      CHECK(std::abs(a.a1 - pi.head(n + 1).sum()) < 1e-12);
      CHECK(std::abs(availability_inherent_closed_form(s) - a.a1) < 1e-12);
      const int N = s.total_nodes();
      for (int k = 0; k <= N; ++k) {
        const double expected = std::exp(log_binomial(N, k) + k * std::log(rho)) * a.zeta[0];
        CHECK(a.zeta[k] == doctest::Approx(expected).epsilon(1e-12));
      }
      CHECK(a.a1 + a.unavailability == doctest::Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("A1 without repairs") {
  CHECK(availability_inherent(base(1, 0.5, 0.0)).a1 == 0.0);
  CHECK(availability_inherent(base(1, 0.0, 0.0)).a1 == 1.0);
}

TEST_CASE("MTTFF1 without repairs is 7/12") {
  const ReliabilityResult r = reliability_inherent(base(1, 1.0, 0.0));
  CHECK(std::abs(r.mttff - 7.0 / 12.0) < 1e-12);
  check_curve_shape(r.curve);
  // Survival of a hypoexponential(4, 3) law.
  for (std::size_t m = 0; m < r.curve.t.size(); m += 20) {
    const double t = r.curve.t[m];
    CHECK(r.curve.value[m] == doctest::Approx(1.0 - oracle::hypoexponential_cdf({4, 3}, t)).epsilon(1e-10));
  }
}

TEST_CASE("quadrature of R1 matches MTTFF1") {
  for (const SystemParams& s : {base(1, 1.0, 0.0), base(2, 0.3, 1.0), base(3, 0.2, 0.5)}) {
    const double mttff = reliability_inherent(s).mttff;
    const auto grid = uniform_grid(40.0 * mttff, 40001);
    const ReliabilityResult r = reliability_inherent(s, grid);
    check_curve_shape(r.curve);
    CHECK(integrate(r.curve) == doctest::Approx(mttff).epsilon(1e-4));
  }
}

TEST_CASE("no failures: R1 stays one and MTTFF1 is infinite") {
  const ReliabilityResult r = reliability_inherent(base(2, 0.0, 0.3));
  CHECK(std::isinf(r.mttff));
  for (double v : r.curve.value) CHECK(v == 1.0);
}

TEST_CASE("default grid") {
  const auto g = default_time_grid(2.0);
  REQUIRE(g.size() == 200);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == doctest::Approx(20.0));
  CHECK(default_time_grid(std::numeric_limits<double>::infinity()).back() == doctest::Approx(10.0));
}

TEST_CASE("product-form pi matches the dense null-space solve at n = 2") {
  std::mt19937_64 gen(67);
  for (int rep = 0; rep < 3; ++rep) {
    const SystemParams s = oracle::random_params(gen, 2);
    const FullCycleStationary st = stationary_pi(s);
    const SparseGenerator q = build_full_cycle_Q(s);
    const Eigen::RowVectorXd ref = oracle::null_space_stationary(q.dense());
    CHECK((st.pi() - ref).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((st.pi() * q.dense()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(st.pi().sum() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((st.pi().array() >= 0.0).all());
  }
}

TEST_CASE("levels follow the rate matrices") {
  std::mt19937_64 gen(71);
  for (int n = 1; n <= 3; ++n) {
    const SystemParams s = oracle::random_params(gen, n);
    const FullCycleStationary st = stationary_pi(s);
    const auto rk = level_rate_matrices(s);
    REQUIRE(rk.size() == static_cast<std::size_t>(2 * n + 1));
    for (int k = 0; k <= 2 * n; ++k) {
      CHECK((st.level(k) * rk[k] - st.level(k + 1)).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((rk[k].array() >= 0.0).all());
    }
  }
}

TEST_CASE("full availability special cases") {
  SystemParams s = base(2, 0.0, 0.5);
  FullAvailability a = availability_full(stationary_pi(s), s);
  CHECK(a.a2 == 1.0);
  CHECK(a.unavailability == 0.0);
  s.p = 1.0;
  a = availability_full(stationary_pi(s), s);
  CHECK(a.p_o == 0.0);
  CHECK(a.a3 == 1.0);
}

TEST_CASE("full availability lies in [0,1] and matches pi sums") {
  std::mt19937_64 gen(73);
  for (int n = 1; n <= 3; ++n) {
    const SystemParams s = oracle::random_params(gen, n);
    const FullCycleStationary st = stationary_pi(s);
    const FullAvailability a = availability_full(st, s);
    double fail = 0.0, orphan = 0.0;
    for (int k = 0; k <= 2 * n; ++k) {
      fail += st.probability({k, 0, n + 1});
      for (int i = 0; i <= n + 1; ++i) orphan += st.probability({k, i, n + 1 - i});
    }
    CHECK(a.a2 == doctest::Approx(1.0 - fail).epsilon(1e-14));
    CHECK(a.unavailability == doctest::Approx(fail).epsilon(1e-14));
    CHECK(a.p_o == doctest::Approx(orphan).epsilon(1e-14));
    CHECK(a.a3 == doctest::Approx(1.0 - orphan).epsilon(1e-14));
    for (double v : {a.a2, a.a3, a.p_o}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("operational reliability: shape and MTTFF2 against a dense solve") {
  std::mt19937_64 gen(79);
  for (int n = 1; n <= 2; ++n) {
    const SystemParams s = oracle::random_params(gen, n);
    const ReliabilityResult r = reliability_operational(s);
    check_curve_shape(r.curve);
    const AbsorbingChain c = build_operational_absorbing(s);
    const Eigen::MatrixXd t = c.subgenerator.dense();
    const double ref = -(c.initial.transpose() * t.fullPivLu().solve(Eigen::VectorXd::Ones(t.rows())))(0);
    CHECK(r.mttff == doctest::Approx(ref).epsilon(1e-10));
    const auto grid = uniform_grid(40.0 * r.mttff, 20001);
    CHECK(integrate(reliability_operational(s, grid).curve) == doctest::Approx(r.mttff).epsilon(1e-4));
  }
}

TEST_CASE("operational reliability without orphans") {
  SystemParams s = base(1, 0.0, 0.3);
  s.p = 1.0;
  const ReliabilityResult r = reliability_operational(s);
  CHECK(std::isinf(r.mttff));
  for (double v : r.curve.value) CHECK(v == 1.0);
}

TEST_CASE("availabilities rise with n") {
  SystemParams inherent = base(1, 0.5, 1.5);
  SystemParams full = base(1, 2.0, 3.0);
  full.gamma = 10.0;
  full.beta = 3.0;
  double prev_a1 = -1.0, prev_u2 = 2.0;
  for (int n = 1; n <= 4; ++n) {
    inherent.n = n;
    full.n = n;
    const double a1 = availability_inherent(inherent).a1;
    const double u2 = availability_full(stationary_pi(full), full).unavailability;
    CHECK(a1 > prev_a1);
    CHECK(u2 < prev_u2);
    prev_a1 = a1;
    prev_u2 = u2;
  }
}
