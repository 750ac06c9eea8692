#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbftrel/measures.hpp"
#include "pbftrel/params.hpp"

namespace pbftrel::cli {

// Everything a run needs, with defaults filled in. The config file is a flat list of
// `key = value` lines; '#' starts a comment and string values may be quoted.
struct RunConfig {
  std::map<std::string, double> params;  // n theta mu gamma p beta lambda b

  double eps_r = 1e-10;
  long max_iter = 100000;
  double unif_tol = 1e-12;
  std::size_t dim_cap = kDefaultDimensionCap;

  std::uint64_t seed = 1;
  std::size_t reps = 100000;
  double horizon = 1e6;

  std::string method = "exact-ph";

  std::string sweep_param;
  std::vector<double> sweep_grid;
  std::string sweep_param2;
  std::vector<double> sweep_grid2;

  SystemParams system() const { return validate_params(params); }
  SolverSettings solver() const;
  // Resolved settings in a fixed order, for echoing into outputs.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

// Key/value pairs of a config text. Throws ValidationError naming the line on malformed
// input or a repeated key.
std::map<std::string, std::string> parse_config_text(const std::string& text);

// Throws ValidationError when the file cannot be read.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Applies one `key`/`value` setting; unknown keys are a ValidationError.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig make_config(const std::map<std::string, std::string>& entries);

// "a:b:step" (inclusive, step > 0) or a comma list. The result must be non-empty and
// strictly monotone.
std::vector<double> parse_grid(const std::string& text);

double parse_number(const std::string& key, const std::string& text);

}  // namespace pbftrel::cli
