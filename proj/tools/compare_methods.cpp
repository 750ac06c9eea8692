// Exact-PH vs rate-approximation throughput at n = 1 over a small grid. Prints CSV on
// stdout; the relative gap is reported only.

#include <cstdio>
#include <iostream>

#include "cli/emit.hpp"
#include "pbftrel/measures.hpp"

using namespace pbftrel;

int main() {
  std::cout << "b,lambda,p,theta,stable,th_exact,th_approx,rel_gap,eta1_exact,eta1_approx\n";
  for (int b : {1, 2}) {
    for (double lambda : {0.01, 0.03, 0.05}) {
      for (double p : {0.8, 0.9}) {
        for (double theta : {0.02, 0.05}) {
          SystemParams s;
          s.n = 1;
          s.theta = theta;
          s.mu = 0.2;
          s.gamma = 0.5;
          s.p = p;
          s.beta = 0.2;
          s.lambda = lambda;
          s.b = b;
          SolverSettings settings;
          settings.on_unstable = UnstablePolicy::saturate;
          const PerformanceReport e = throughput_exact(s, settings);
          const PerformanceReport a = throughput_rate_approx(s, settings);
          using cli::format_number;
          std::cout << b << ',' << format_number(lambda) << ',' << format_number(p) << ','
                    << format_number(theta) << ',' << (e.stable ? "true" : "false") << ','
                    << format_number(e.th) << ',' << format_number(a.th) << ','
                    << format_number(std::abs(e.th - a.th) / e.th) << ','
                    << format_number(e.eta1) << ',' << format_number(a.eta1) << '\n';
        }
      }
    }
  }
}
