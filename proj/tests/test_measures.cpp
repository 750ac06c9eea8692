#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pbftrel/errors.hpp"
#include "pbftrel/measures.hpp"

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

void check_report_invariants(const PerformanceReport& r, int b) {
  CHECK(r.eta1 + r.eta2 == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.th == doctest::Approx(b * r.th_block).epsilon(1e-15));
  CHECK(r.eta1 >= 0.0);
  CHECK(r.eta2 >= 0.0);
  CHECK(r.th >= 0.0);
  CHECK(r.r2 >= 0.0);
  CHECK(r.th <= b / r.mean_block_time * (1 + 1e-12));
}

}  // namespace

TEST_CASE("exact throughput at the reference point") {
  const SystemParams s = stable_point();
  const PerformanceReport r = throughput_exact(s);
  CHECK(r.stable);
  CHECK(r.method == ThroughputMethod::exact_ph);
  check_report_invariants(r, s.b);
  CHECK(r.level_dim == s.b * 10 * 10);
  CHECK(s.lambda + s.b * r.exact_orphan_event_rate ==
        doctest::Approx(s.b * r.exact_block_event_rate).epsilon(1e-8));
  CHECK(r.rate_residual < 1e-9);
}

TEST_CASE("rate approximation uses b phases per level") {
  const SystemParams s = stable_point();
  const PerformanceReport r = throughput_rate_approx(s);
  CHECK(r.method == ThroughputMethod::rate_approx);
  CHECK(r.level_dim == s.b);
  check_report_invariants(r, s.b);
  CHECK(s.lambda + s.b * r.exact_orphan_event_rate ==
        doctest::Approx(s.b * r.exact_block_event_rate).epsilon(1e-8));
  // Same extended means as the exact path.
  const PerformanceReport e = throughput_exact(s);
  CHECK(r.mean_block_time == doctest::Approx(e.mean_block_time).epsilon(1e-12));
  CHECK(r.mean_orphan_time == doctest::Approx(e.mean_orphan_time).epsilon(1e-12));
}

TEST_CASE("invariants on random stable draws for both methods") {
  std::mt19937_64 gen(59);
  int seen = 0;
  for (int draw = 0; draw < 30 && seen < 8; ++draw) {
    SystemParams s = oracle::random_queue_params(gen, 1, 1 + draw % 3);
    SolverSettings settings;
    settings.on_unstable = UnstablePolicy::saturate;
    const PerformanceReport e = throughput_exact(s, settings);
    const PerformanceReport a = throughput_rate_approx(s, settings);
    CHECK(e.stable == a.stable);
    if (!e.stable) continue;
    check_report_invariants(e, s.b);
    check_report_invariants(a, s.b);
    ++seen;
  }
  CHECK(seen > 0);
}

TEST_CASE("exact and rate-approx paths agree on the stability verdict") {
  std::mt19937_64 gen(61);
  int stable = 0;
  for (int draw = 0; draw < 50; ++draw) {
    const int b = 1 + draw % 3;
    SystemParams s = draw % 2 ? oracle::random_queue_params(gen, 1, b) : oracle::random_params(gen, 1, b);
    SolverSettings settings;
    settings.on_unstable = UnstablePolicy::saturate;
    const PerformanceReport e = throughput_exact(s, settings);
    const PerformanceReport a = throughput_rate_approx(s, settings);
    CHECK(e.stable == a.stable);
    CHECK(e.th <= s.b / e.mean_block_time * (1 + 1e-12));
    stable += e.stable;
  }
  CHECK(stable > 0);
  CHECK(stable < 50);
}

TEST_CASE("both paths move the same way along each parameter") {
  const auto signs = [](ThroughputMethod m, const char* name, const std::vector<double>& grid) {
    std::vector<int> out;
    double prev = std::nan("");
    for (double v : grid) {
      SystemParams s = stable_point();
      if (std::string(name) == "lambda") s.lambda = v;
      if (std::string(name) == "p") s.p = v;
      if (std::string(name) == "theta") s.theta = v;
      if (std::string(name) == "b") s.b = static_cast<int>(v);
      const double th = throughput(s, m).th;
      if (!std::isnan(prev)) out.push_back(th > prev ? 1 : -1);
      prev = th;
    }
    return out;
  };
  const std::pair<const char*, std::vector<double>> axes[] = {
      {"lambda", {0.01, 0.03, 0.05}}, {"p", {0.85, 0.9, 0.95}}, {"theta", {0.03, 0.05, 0.07}},
      {"b", {1, 2}}};
  for (const auto& [name, grid] : axes) {
    INFO(name);
    CHECK(signs(ThroughputMethod::exact_ph, name, grid) ==
          signs(ThroughputMethod::rate_approx, name, grid));
  }
}

TEST_CASE("no arrivals and no orphans keep the pool empty") {
  SystemParams s = stable_point();
  s.lambda = 0.0;
  s.p = 1.0;
  s.theta = 0.0;
  s.b = 1;  // with b > 1 each remainder of the empty pool is its own closed class
  for (ThroughputMethod m : {ThroughputMethod::exact_ph, ThroughputMethod::rate_approx}) {
    const PerformanceReport r = throughput(s, m);
    CHECK(r.eta1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.th == doctest::Approx(0.0));
    CHECK(r.exact_orphan_event_rate == 0.0);
    CHECK(std::isinf(r.mean_orphan_time));
  }
}

TEST_CASE("unstable parameters throw with both drifts") {
  SystemParams s = stable_point();
  s.lambda = 50.0;
  try {
    throughput_exact(s);
    FAIL("expected instability");
  } catch (const UnstableError& e) {
    CHECK(std::string(e.what()).rfind("unstable: upDrift=", 0) == 0);
    CHECK(std::string(e.what()).find("downDrift=") != std::string::npos);
    CHECK(e.up_drift() > e.down_drift());
  }
  CHECK_THROWS_AS(throughput_rate_approx(s), UnstableError);
}

TEST_CASE("saturation policy reports the overloaded queue") {
  SystemParams s = stable_point();
  s.lambda = 50.0;
  SolverSettings settings;
  settings.on_unstable = UnstablePolicy::saturate;
  const PerformanceReport r = throughput_rate_approx(s, settings);
  CHECK_FALSE(r.stable);
  CHECK(r.eta1 == 0.0);
  CHECK(r.eta2 == 1.0);
  CHECK(r.th == doctest::Approx(s.b / r.mean_block_time));
  CHECK(r.exact_block_event_rate == doctest::Approx(r.drift.down_drift / s.b));
}

TEST_CASE("throughput grows with the arrival rate while stable") {
  SystemParams s = stable_point();
  double prev = -1.0;
  for (double lambda : {0.01, 0.02, 0.04, 0.06}) {
    s.lambda = lambda;
    const PerformanceReport r = throughput_exact(s);
    REQUIRE(r.stable);
    CHECK(r.th > prev);
    prev = r.th;
  }
}

TEST_CASE("exact path refuses oversized levels") {
  SystemParams s = stable_point();
  s.n = 4;
  s.b = 2;
  CHECK_THROWS_AS(throughput_exact(s), DimensionError);
  CHECK_NOTHROW(throughput_rate_approx(s, {1e-10, 100000, kDefaultDimensionCap, UnstablePolicy::saturate}));
}

TEST_CASE("p = 0 is rejected with the modeling reason") {
  SystemParams s = stable_point();
  s.p = 0.0;
  CHECK_THROWS_WITH_AS(throughput_rate_approx(s), doctest::Contains("no block can be generated"),
                       ValidationError);
}

TEST_CASE("method names") {
  CHECK(parse_method("exact") == ThroughputMethod::exact_ph);
  CHECK(parse_method("rate-approx") == ThroughputMethod::rate_approx);
  CHECK(to_string(ThroughputMethod::exact_ph) == "exact-ph");
  CHECK_THROWS_AS(parse_method("fast"), ValidationError);
}
