#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "pbftrel/block_inverse.hpp"
#include "pbftrel/errors.hpp"
#include "pbftrel/generators.hpp"
#include "pbftrel/phase_type.hpp"

using namespace pbftrel;

namespace {

SystemParams pure_birth() {
  SystemParams s;
  s.n = 1;
  s.theta = 0.0;
  s.mu = 0.3;
  s.gamma = 1.0;
  s.p = 1.0;
  s.beta = 0.5;
  return s;
}

}  // namespace

TEST_CASE("exponential CDF and mean") {
  const PhaseTypeRep e = PhaseTypeRep::exponential(2.0);
  CHECK(ph_cdf(e, 1.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
  CHECK(ph_cdf(e, 0.0) == 0.0);
  CHECK(ph_mean(e) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ph_mean_structured(e) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("pure-birth block chain is hypoexponential(4,3,2)") {
  const PhaseTypeRep ph(build_block_ph(pure_birth()));
  CHECK(ph_cdf(ph, 0.0) == 0.0);
  for (double t : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    CHECK(ph_cdf(ph, t) == doctest::Approx(oracle::hypoexponential_cdf({4, 3, 2}, t)).epsilon(1e-11));
  }
  CHECK(std::abs(ph_mean(ph) - 13.0 / 12.0) < 1e-12);
  CHECK(std::abs(ph_mean_structured(ph) - 13.0 / 12.0) < 1e-12);
}

TEST_CASE("structured mean scales as 13/(12 gamma)") {
  for (double g : {0.25, 1.0, 7.5}) {
    SystemParams s = pure_birth();
    s.gamma = g;
    const PhaseTypeRep ph(build_block_ph(s));
    CHECK(ph_mean_structured(ph) == doctest::Approx(13.0 / (12.0 * g)).epsilon(1e-13));
  }
}

TEST_CASE("extended chain mean adds 1/beta") {
  std::mt19937_64 gen(5);
  for (int n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 4; ++rep) {
      const SystemParams s = oracle::random_params(gen, n);
      for (const AbsorbingChain& base : {build_block_ph(s), build_orphan_ph(s)}) {
        const PhaseTypeRep b(base);
        const PhaseTypeRep e(extend_with_propagation(base, s.beta));
        REQUIRE(b.is_proper());
        CHECK(ph_mean(e) == doctest::Approx(ph_mean(b) + 1.0 / s.beta).epsilon(1e-10));
        if (e.partition()) CHECK(ph_mean_structured(e) == doctest::Approx(ph_mean(e)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("defective laws report an improper distribution") {
  SystemParams s = pure_birth();
  const PhaseTypeRep orphan(build_orphan_ph(s));  // p = 1, theta = 0: never orphaned
  CHECK_FALSE(orphan.is_proper());
  CHECK_THROWS_WITH_AS(ph_mean(orphan), doctest::Contains("improper distribution"), NumericalError);
  const PhaseTypeRep never = PhaseTypeRep::exponential(0.0);
  CHECK_FALSE(never.is_proper());
  CHECK(ph_cdf(never, 10.0) == 0.0);
}

TEST_CASE("p = 0 makes the block chain improper") {
  SystemParams s = pure_birth();
  s.p = 0.0;
  s.theta = 0.2;
  const PhaseTypeRep ph(build_block_ph(s));
  CHECK_FALSE(ph.is_proper());
  CHECK_THROWS_AS(ph_mean(ph), NumericalError);
}

TEST_CASE("block_triangular_inverse agrees with dense LU") {
  std::mt19937_64 gen(13);
  for (int n = 1; n <= 3; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      const SystemParams s = oracle::random_params(gen, n);
      for (const AbsorbingChain& c : {build_block_ph(s), build_orphan_ph(s),
                                      extend_with_propagation(build_block_ph(s), s.beta)}) {
        const Eigen::MatrixXd t = c.subgenerator.dense();
        const Eigen::MatrixXd inv = block_triangular_inverse(c.subgenerator.matrix(), *c.partition);
        const Eigen::MatrixXd lu = t.fullPivLu().inverse();
        const double scale = lu.cwiseAbs().maxCoeff();
        CHECK((t * inv - Eigen::MatrixXd::Identity(t.rows(), t.cols())).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((inv - lu).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, scale));
      }
    }
  }
}

TEST_CASE("level inverses and solves of the structured solver") {
  std::mt19937_64 gen(17);
  const SystemParams s = oracle::random_params(gen, 2);
  const AbsorbingChain c = build_block_ph(s);
  const BlockBidiagonalSolver solver(c.subgenerator.matrix(), *c.partition);
  const Eigen::MatrixXd t = c.subgenerator.dense();
  const auto& p = *c.partition;
  for (std::size_t l = 0; l < p.levels(); ++l) {
    const auto off = static_cast<Eigen::Index>(p.level_offsets[l]);
    const auto sz = static_cast<Eigen::Index>(p.level_size(l));
    const Eigen::MatrixXd block = t.block(off, off, sz, sz);
    CHECK((block * solver.level_inverse(l) - Eigen::MatrixXd::Identity(sz, sz)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  const Eigen::VectorXd rhs = Eigen::VectorXd::LinSpaced(t.rows(), 1.0, 2.0);
  CHECK((t * solver.solve(rhs) - rhs).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::RowVectorXd lrhs = rhs.transpose();
  CHECK((solver.solve_left(lrhs) * t - lrhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("structured solver rejects entries outside the pattern") {
  const AbsorbingChain c = build_block_ph(pure_birth());
  SparseMatrix m = c.subgenerator.matrix();
  m.coeffRef(m.rows() - 1, 0) = 1.0;  // below the block diagonal
  CHECK_THROWS_AS(BlockBidiagonalSolver(m, *c.partition), ValidationError);
}

TEST_CASE("singular group block is named") {
  // p = 0 leaves the top group of every level without an exit.
  SystemParams s = pure_birth();
  s.p = 0.0;
  s.theta = 0.0;
  s.mu = 0.0;
  const AbsorbingChain c = build_block_ph(s);
  CHECK_THROWS_WITH_AS(BlockBidiagonalSolver(c.subgenerator.matrix(), *c.partition),
                       doctest::Contains("singular diagonal block at level"), NumericalError);
}

TEST_CASE("tridiagonal solve matches dense inverse") {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  const int d = 6;
  Eigen::VectorXd sub(d), diag(d), sup(d);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(d, d);
  for (int m = 0; m < d; ++m) {
    sub[m] = u(gen);
    sup[m] = u(gen);
    diag[m] = -(sub[m] + sup[m] + u(gen));
    dense(m, m) = diag[m];
    if (m > 0) dense(m, m - 1) = sub[m];
    if (m + 1 < d) dense(m, m + 1) = sup[m];
  }
  const TridiagonalLu lu(sub, diag, sup);
  CHECK((lu.inverse() - dense.inverse()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(d);
  CHECK((dense * lu.solve(rhs) - rhs).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((lu.solve_left(rhs.transpose()) * dense - rhs.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("CDF is non-decreasing and tends to one") {
  std::mt19937_64 gen(23);
  for (int n = 1; n <= 3; ++n) {
    const SystemParams s = oracle::random_params(gen, n);
    const PhaseTypeRep ph(extend_with_propagation(build_block_ph(s), s.beta));
    std::vector<double> grid{0.0};
    for (double t = 1e-3; t < 2e3; t *= 1.5) grid.push_back(t);
    const auto f = ph_cdf(ph, grid);
    CHECK(f.front() == 0.0);
    for (std::size_t m = 1; m < f.size(); ++m) CHECK(f[m] >= f[m - 1] - 1e-12);
    CHECK(f.back() == doctest::Approx(1.0).epsilon(1e-9));
  }
  const PhaseTypeRep pb(build_block_ph(pure_birth()));
  CHECK(ph_cdf(pb, 100.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean equals the integral of the survival function") {
  std::mt19937_64 gen(29);
  for (int rep = 0; rep < 4; ++rep) {
    SystemParams s = oracle::random_params(gen, 1 + rep % 2);
    s.theta = 0.0;
    s.p = 1.0;  // proper block law
    s.mu = 0.5;
    const PhaseTypeRep ph(extend_with_propagation(build_block_ph(s), s.beta));
    const double mean = ph_mean(ph);
    // Composite Simpson on [0, 60 mean].
    const int intervals = 6000;
    const double h = 60.0 * mean / intervals;
    std::vector<double> grid(intervals + 1);
    for (int m = 0; m <= intervals; ++m) grid[m] = m * h;
    const auto f = ph_cdf(ph, grid);
    double integral = 0.0;
    for (int m = 0; m <= intervals; ++m) {
      const double w = (m == 0 || m == intervals) ? 1.0 : (m % 2 ? 4.0 : 2.0);
      integral += w * (1.0 - f[m]);
    }
    integral *= h / 3.0;
    CHECK(integral == doctest::Approx(mean).epsilon(1e-6));
  }
}

TEST_CASE("halving the uniformization tolerance stays within tol") {
  std::mt19937_64 gen(31);
  const SystemParams s = oracle::random_params(gen, 2);
  const PhaseTypeRep ph(build_block_ph(s));
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    for (double t : {0.3, 3.0, 30.0}) {
      CHECK(std::abs(ph_cdf(ph, t, tol) - ph_cdf(ph, t, tol / 2)) <= tol);
    }
  }
}

TEST_CASE("occupation times sum to the mean") {
  const PhaseTypeRep ph(build_block_ph(pure_birth()));
  CHECK(occupation_times(ph).sum() == doctest::Approx(13.0 / 12.0).epsilon(1e-14));
}

TEST_CASE("sampling: exponential mean within 3 sigma") {
  const double nu = 1.7;
  const PhaseTypeRep e = PhaseTypeRep::exponential(nu);
  RandomStream rng(2024);
  const int draws = 100000;
  double sum = 0.0;
  for (int m = 0; m < draws; ++m) sum += ph_sample(e, rng);
  const double mean = sum / draws;
  const double sigma = (1.0 / nu) / std::sqrt(draws);
  CHECK(std::abs(mean - 1.0 / nu) < 3 * sigma);
}

TEST_CASE("sampling is deterministic per seed") {
  const PhaseTypeRep ph(build_block_ph(pure_birth()));
  RandomStream a(99), b(99), c(100);
  std::vector<double> xa, xb, xc;
  for (int m = 0; m < 50; ++m) {
    xa.push_back(ph_sample(ph, a));
    xb.push_back(ph_sample(ph, b));
    xc.push_back(ph_sample(ph, c));
  }
  CHECK(xa == xb);
  CHECK(xa != xc);
}

TEST_CASE("sampling: Kolmogorov-Smirnov against the CDF") {
  std::mt19937_64 gen(37);
  SystemParams s = oracle::random_params(gen, 1);
  s.theta = 0.0;
  s.p = 1.0;
  const PhaseTypeRep ph(build_block_ph(s));
  RandomStream rng(7);
  const int draws = 100000;
  std::vector<double> x(draws);
  for (double& v : x) v = ph_sample(ph, rng);
  std::sort(x.begin(), x.end());
  const auto f = ph_cdf(ph, x);
  double dmax = 0.0;
  for (int m = 0; m < draws; ++m) {
    dmax = std::max({dmax, std::abs(f[m] - (m + 1.0) / draws), std::abs(f[m] - double(m) / draws)});
  }
  CHECK(dmax < 1.628 / std::sqrt(double(draws)));
}
