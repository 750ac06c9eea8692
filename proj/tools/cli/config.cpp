#include "cli/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cli/emit.hpp"
#include "pbftrel/errors.hpp"

namespace pbftrel::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool is_param(const std::string& key) {
  static const char* const kParams[] = {"n", "theta", "mu", "gamma", "p", "beta", "lambda", "b"};
  for (const char* p : kParams) {
    if (key == p) return true;
  }
  return false;
}

std::string join_grid(const std::vector<double>& g) {
  std::string out;
  for (double v : g) {
    if (!out.empty()) out += ',';
    out += format_number(v);
  }
  return out;
}

}  // namespace

SolverSettings RunConfig::solver() const {
  SolverSettings s;
  s.eps_r = eps_r;
  s.max_iter = max_iter;
  s.dim_cap = dim_cap;
  return s;
}

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const char* key : {"n", "theta", "mu", "gamma", "p", "beta", "lambda", "b"}) {
    auto it = params.find(key);
    out.emplace_back(key, it == params.end() ? "" : format_number(it->second));
  }
  out.emplace_back("eps_r", format_number(eps_r));
  out.emplace_back("max_iter", std::to_string(max_iter));
  out.emplace_back("unif_tol", format_number(unif_tol));
  out.emplace_back("dim_cap", std::to_string(dim_cap));
  out.emplace_back("seed", std::to_string(seed));
  out.emplace_back("reps", std::to_string(reps));
  out.emplace_back("horizon", format_number(horizon));
  out.emplace_back("method", method);
  if (!sweep_param.empty()) {
    out.emplace_back("sweep_param", sweep_param);
    out.emplace_back("sweep_grid", join_grid(sweep_grid));
  }
  if (!sweep_param2.empty()) {
    out.emplace_back("sweep_param2", sweep_param2);
    out.emplace_back("sweep_grid2", join_grid(sweep_grid2));
  }
  return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(number);
    if (eq == std::string::npos) throw ValidationError("config", where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ValidationError("config", where + ": empty key or value");
    }
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (!out.emplace(key, value).second) {
      throw ValidationError("config", where + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("config", "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ValidationError(key, key + ": '" + text + "' is not a number");
  }
  return v;
}

namespace {

long parse_count(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (v != std::floor(v) || v < 0 || v > 9e15) {
    throw ValidationError(key, key + " must be a non-negative integer");
  }
  return static_cast<long>(v);
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (is_param(key)) {
    cfg.params[key] = parse_number(key, value);
  } else if (key == "eps_r") {
    cfg.eps_r = parse_number(key, value);
    if (!(cfg.eps_r > 0.0)) throw ValidationError(key, "eps_r must be positive");
  } else if (key == "max_iter") {
    cfg.max_iter = parse_count(key, value);
    if (cfg.max_iter < 1) throw ValidationError(key, "max_iter must be at least 1");
  } else if (key == "unif_tol") {
    cfg.unif_tol = parse_number(key, value);
    if (!(cfg.unif_tol > 0.0 && cfg.unif_tol <= 1e-6)) {
      throw ValidationError(key, "unif_tol must lie in (0, 1e-6]");
    }
  } else if (key == "dim_cap") {
    cfg.dim_cap = static_cast<std::size_t>(parse_count(key, value));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_count(key, value));
  } else if (key == "reps") {
    cfg.reps = static_cast<std::size_t>(parse_count(key, value));
    if (cfg.reps < 1) throw ValidationError(key, "reps must be at least 1");
  } else if (key == "horizon") {
    cfg.horizon = parse_number(key, value);
    if (!(cfg.horizon > 0.0)) throw ValidationError(key, "horizon must be positive");
  } else if (key == "method") {
    cfg.method = std::string(to_string(parse_method(value)));
  } else if (key == "sweep_param") {
    cfg.sweep_param = value;
  } else if (key == "sweep_grid") {
    cfg.sweep_grid = parse_grid(value);
  } else if (key == "sweep_param2") {
    cfg.sweep_param2 = value;
  } else if (key == "sweep_grid2") {
    cfg.sweep_grid2 = parse_grid(value);
  } else {
    throw ValidationError(key, "unknown config key '" + key + "'");
  }
}

RunConfig make_config(const std::map<std::string, std::string>& entries) {
  RunConfig cfg;
  for (const auto& [k, v] : entries) apply_setting(cfg, k, v);
  return cfg;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  const auto colon = text.find(':');
  if (colon != std::string::npos) {
    const auto colon2 = text.find(':', colon + 1);
    if (colon2 == std::string::npos) throw ValidationError("grid", "grid range must be start:stop:step");
    const double a = parse_number("grid", text.substr(0, colon));
    const double b = parse_number("grid", text.substr(colon + 1, colon2 - colon - 1));
    const double step = parse_number("grid", text.substr(colon2 + 1));
    if (!(step > 0.0)) throw ValidationError("grid", "grid step must be positive");
    if (b < a) throw ValidationError("grid", "grid stop lies below its start");
    const auto count = static_cast<long>(std::floor((b - a) / step * (1 + 1e-12) + 1e-9));
    for (long i = 0; i <= count; ++i) out.push_back(a + static_cast<double>(i) * step);
  } else {
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) out.push_back(parse_number("grid", item));
  }
  if (out.empty()) throw ValidationError("grid", "grid is empty");
  const bool up = out.size() < 2 || out[1] > out[0];
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (up ? !(out[i] > out[i - 1]) : !(out[i] < out[i - 1])) {
      throw ValidationError("grid", "grid must be strictly monotone");
    }
  }
  return out;
}

}  // namespace pbftrel::cli
