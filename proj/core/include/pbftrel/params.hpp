#pragma once

#include <map>
#include <string>

namespace pbftrel {

// Rates and counts of the voting model. Total node count is 3n+1.
struct SystemParams {
  int n = 1;            // tolerated faulty nodes
  double theta = 0.0;   // per-node failure rate
  double mu = 0.0;      // per-node repair rate
  double gamma = 1.0;   // per-node voting rate
  double p = 1.0;       // approval probability
  double beta = 1.0;    // pegging / rollback rate
  double lambda = 0.0;  // transaction arrival rate
  int b = 1;            // transactions per block

  int total_nodes() const noexcept { return 3 * n + 1; }
  double q() const noexcept { return 1.0 - p; }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

// Builds SystemParams from named values; every violation is collected before throwing
// ValidationError. Keys: n, theta, mu, gamma, p, beta, lambda, b.
SystemParams validate_params(const std::map<std::string, double>& raw);

// Throws ValidationError if `params` breaks any validity rule.
void check_params(const SystemParams& params);

// Inverting the block-generation subgenerator needs p > 0.
void require_positive_approval(const SystemParams& params);

}  // namespace pbftrel
