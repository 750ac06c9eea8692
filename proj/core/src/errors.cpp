#include "pbftrel/errors.hpp"

#include <sstream>

namespace pbftrel {

namespace {

std::string join_reasons(const std::vector<ValidationError::Violation>& v) {
  std::string out;
  for (const auto& item : v) {
    if (!out.empty()) out += "; ";
    out += item.reason;
  }
  return out;
}

std::string drift_message(double up, double down) {
  std::ostringstream os;
  os.precision(17);
  os << "unstable: upDrift=" << up << ", downDrift=" << down;
  return os.str();
}

std::string dimension_message(std::size_t dim, std::size_t cap) {
  std::ostringstream os;
  os << "per-level QBD dimension " << dim << " exceeds the cap of " << cap
     << "; use the rate-approx method";
  return os.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : std::runtime_error(join_reasons(violations)), violations_(std::move(violations)) {}

ValidationError::ValidationError(std::string field, std::string reason)
    : ValidationError(std::vector<Violation>{{std::move(field), std::move(reason)}}) {}

UnstableError::UnstableError(double up_drift, double down_drift)
    : NumericalError(drift_message(up_drift, down_drift)), up_(up_drift), down_(down_drift) {}

DimensionError::DimensionError(std::size_t dimension, std::size_t cap)
    : NumericalError(dimension_message(dimension, cap)), dimension_(dimension), cap_(cap) {}

}  // namespace pbftrel
