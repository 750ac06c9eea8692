#include "pbftrel/params.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pbftrel/errors.hpp"

namespace pbftrel {

namespace {

using Violations = std::vector<ValidationError::Violation>;

void check_rate(Violations& out, const char* name, double value, bool strictly_positive) {
  if (!std::isfinite(value)) {
    out.push_back({name, std::string(name) + " must be finite"});
  } else if (value < 0.0) {
    out.push_back({name, std::string(name) + " must be non-negative"});
  } else if (strictly_positive && value == 0.0) {
    out.push_back({name, std::string(name) + " must be positive"});
  }
}

Violations collect(const SystemParams& s) {
  Violations out;
  if (s.n < 1) out.push_back({"n", "n must be at least 1"});
  if (s.b < 1) out.push_back({"b", "b must be at least 1"});
  check_rate(out, "theta", s.theta, false);
  check_rate(out, "mu", s.mu, false);
  check_rate(out, "gamma", s.gamma, true);
  check_rate(out, "beta", s.beta, true);
  check_rate(out, "lambda", s.lambda, false);
  if (!(s.p >= 0.0 && s.p <= 1.0)) out.push_back({"p", "p must lie in [0,1]"});
  return out;
}

int as_count(Violations& out, const char* name, double value) {
  if (!std::isfinite(value) || value != std::floor(value) ||
      std::abs(value) > std::numeric_limits<int>::max()) {
    out.push_back({name, std::string(name) + " must be an integer"});
    return 1;
  }
  return static_cast<int>(value);
}

}  // namespace

SystemParams validate_params(const std::map<std::string, double>& raw) {
  Violations out;
  static const char* const kKeys[] = {"n", "theta", "mu", "gamma", "p", "beta", "lambda", "b"};
  for (const char* key : kKeys) {
    if (!raw.count(key)) out.push_back({key, std::string(key) + " is missing"});
  }
  for (const auto& [key, value] : raw) {
    bool known = false;
    for (const char* k : kKeys) known = known || key == k;
    if (!known) out.push_back({key, "unknown parameter " + key});
  }
  if (!out.empty()) throw ValidationError(std::move(out));

  SystemParams s;
  s.n = as_count(out, "n", raw.at("n"));
  s.b = as_count(out, "b", raw.at("b"));
  s.theta = raw.at("theta");
  s.mu = raw.at("mu");
  s.gamma = raw.at("gamma");
  s.p = raw.at("p");
  s.beta = raw.at("beta");
  s.lambda = raw.at("lambda");

  Violations rest = collect(s);
  out.insert(out.end(), rest.begin(), rest.end());
  if (!out.empty()) throw ValidationError(std::move(out));
  return s;
}

void check_params(const SystemParams& params) {
  Violations out = collect(params);
  if (!out.empty()) throw ValidationError(std::move(out));
}

void require_positive_approval(const SystemParams& params) {
  if (!(params.p > 0.0)) {
    throw ValidationError(
        "p", "p must be positive: with p = 0 no approval is ever cast, no block can be "
             "generated and the block-generation subgenerator is singular");
  }
}

}  // namespace pbftrel
