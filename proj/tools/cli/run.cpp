#include "cli/run.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "cli/config.hpp"
#include "cli/emit.hpp"
#include "pbftrel/errors.hpp"
#include "pbftrel/generators.hpp"
#include "pbftrel/measures.hpp"
#include "pbftrel/reliability.hpp"
#include "pbftrel/simulation.hpp"
#include "pbftrel/version.hpp"

namespace pbftrel::cli {

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::string format = "json";
  std::string out_path;
  bool verbose = false;
  std::string method;
  std::string kind = "inherent";
  std::string times;
  std::string target = "round";
  std::string measure = "throughput";
  std::string param, grid, param2, grid2;
  long long seed = -1;
  long long reps = -1;
  double horizon = -1.0;
  unsigned threads = 0;
};

struct Output {
  Record header;
  Record record;
  std::optional<Table> table;  // CSV body; also the JSON body when json_table is set
  Record trailer;
  bool json_table = false;
};

Record header_of(const RunConfig& cfg) {
  Record h;
  h.add("version", std::string(kVersion));
  for (const auto& [k, v] : cfg.echo()) h.add("config_" + k, v);
  return h;
}

RunConfig resolve_config(const Options& o) {
  std::map<std::string, std::string> entries;
  if (!o.config_path.empty()) entries = read_config_file(o.config_path);
  RunConfig cfg = make_config(entries);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ValidationError("set", "--set expects key=value, got '" + s + "'");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (!o.method.empty()) apply_setting(cfg, "method", o.method);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.reps >= 0) apply_setting(cfg, "reps", std::to_string(o.reps));
  if (o.horizon >= 0) apply_setting(cfg, "horizon", format_number(o.horizon));
  if (!o.param.empty()) cfg.sweep_param = o.param;
  if (!o.grid.empty()) cfg.sweep_grid = parse_grid(o.grid);
  if (!o.param2.empty()) cfg.sweep_param2 = o.param2;
  if (!o.grid2.empty()) cfg.sweep_grid2 = parse_grid(o.grid2);
  return cfg;
}

void add_report(Record& r, const PerformanceReport& p) {
  r.add("method", std::string(to_string(p.method)));
  r.add("stable", p.stable);
  r.add("eta1", p.eta1);
  r.add("eta2", p.eta2);
  r.add("r1", p.r1);
  r.add("r2", p.r2);
  r.add("th_block", p.th_block);
  r.add("th", p.th);
  r.add("exact_block_event_rate", p.exact_block_event_rate);
  r.add("exact_orphan_event_rate", p.exact_orphan_event_rate);
  r.add("mean_block_time", p.mean_block_time);
  r.add("mean_orphan_time", p.mean_orphan_time);
  r.add("up_drift", p.drift.up_drift);
  r.add("down_drift", p.drift.down_drift);
  r.add("swapped_up_drift", p.drift.swapped_up_drift);
  r.add("swapped_down_drift", p.drift.swapped_down_drift);
  r.add("iterations", static_cast<long long>(p.iterations));
  r.add("rate_residual", p.rate_residual);
  r.add("level_dim", static_cast<long long>(p.level_dim));
}

void add_availability(Record& r, const SystemParams& s, bool with_zeta) {
  const InherentAvailability a = availability_inherent(s);
  const FullAvailability f = availability_full(stationary_pi(s), s);
  r.add("a1", a.a1);
  r.add("a2", f.a2);
  r.add("a3", f.a3);
  r.add("p_o", f.p_o);
  r.add("unavailability_inherent", a.unavailability);
  r.add("unavailability_full", f.unavailability);
  if (with_zeta) r.add("zeta", std::vector<double>(a.zeta.data(), a.zeta.data() + a.zeta.size()));
}

void verbose_drift(std::ostream& err, const StabilityVerdict& d) {
  err << "drift (first principles): up=" << format_number(d.up_drift)
      << " down=" << format_number(d.down_drift) << '\n'
      << "drift (printed pairing): up=" << format_number(d.swapped_up_drift)
      << " down=" << format_number(d.swapped_down_drift) << '\n';
}

Output cmd_ph(const RunConfig& cfg, const Options& o) {
  const SystemParams s = cfg.system();
  const PhaseTypeRep block(build_block_ph(s));
  const PhaseTypeRep orphan(build_orphan_ph(s));
  Output out;
  Record& r = out.record;
  r.add("block_order", static_cast<long long>(block.order()));
  r.add("orphan_order", static_cast<long long>(orphan.order()));
  r.add("extended_block_order", static_cast<long long>(block.order() + 1));
  r.add("extended_orphan_order", static_cast<long long>(orphan.order() + 1));
  const bool block_proper = block.is_proper();
  const bool orphan_proper = orphan.is_proper();
  const double inf = std::numeric_limits<double>::infinity();
  r.add("mean_block_time", block_proper ? ph_mean(block) : inf);
  r.add("mean_block_time_structured", block_proper ? ph_mean_structured(block) : inf);
  r.add("mean_orphan_time", orphan_proper ? ph_mean(orphan) : inf);
  r.add("mean_orphan_time_structured", orphan_proper ? ph_mean_structured(orphan) : inf);
  if (!o.times.empty()) {
    const std::vector<double> grid = parse_grid(o.times);
    if (grid.front() < 0.0) throw ValidationError("times", "times must be non-negative");
    r.add("t", grid);
    r.add("cdf_block", ph_cdf(block, grid, cfg.unif_tol));
    r.add("cdf_orphan", ph_cdf(orphan, grid, cfg.unif_tol));
  }
  return out;
}

Output cmd_throughput(const RunConfig& cfg, const Options& o, std::ostream& err) {
  const SystemParams s = cfg.system();
  const PerformanceReport p = throughput(s, parse_method(cfg.method), cfg.solver());
  if (o.verbose) verbose_drift(err, p.drift);
  Output out;
  add_report(out.record, p);
  return out;
}

Output cmd_availability(const RunConfig& cfg) {
  Output out;
  add_availability(out.record, cfg.system(), true);
  return out;
}

Output cmd_reliability(const RunConfig& cfg, const Options& o) {
  const SystemParams s = cfg.system();
  if (o.kind != "inherent" && o.kind != "operational") {
    throw ValidationError("kind", "kind must be inherent or operational");
  }
  const bool inherent = o.kind == "inherent";
  std::vector<double> grid;
  if (!o.times.empty()) {
    grid = parse_grid(o.times);
    if (grid.front() != 0.0) throw ValidationError("times", "reliability grid must start at 0");
  }
  const ReliabilityResult r = inherent ? reliability_inherent(s, grid, cfg.unif_tol)
                                       : reliability_operational(s, grid, cfg.unif_tol);
  const std::string col = inherent ? "r1" : "r2";
  const std::string mttff = inherent ? "mttff1" : "mttff2";
  Output out;
  out.record.add("t", r.curve.t);
  out.record.add(col, r.curve.value);
  out.record.add(mttff, r.mttff);
  Table t;
  t.columns = {"t", col};
  for (std::size_t i = 0; i < r.curve.t.size(); ++i) t.rows.push_back({r.curve.t[i], r.curve.value[i]});
  out.table = std::move(t);
  out.trailer.add(mttff, r.mttff);
  return out;
}

Output cmd_stationary(const RunConfig& cfg) {
  const SystemParams s = cfg.system();
  const FullCycleStationary st = stationary_pi(s);
  Output out;
  std::vector<double> k, i, j, pi;
  Table t;
  t.columns = {"k", "i", "j", "pi"};
  for (std::size_t m = 0; m < st.space().size(); ++m) {
    const auto v = st.space().state_of(m);
    k.push_back(v.k);
    i.push_back(v.i);
    j.push_back(v.j);
    pi.push_back(st.pi()[m]);
    t.rows.push_back({static_cast<long long>(v.k), static_cast<long long>(v.i),
                      static_cast<long long>(v.j), st.pi()[m]});
  }
  out.record.add("k", k);
  out.record.add("i", i);
  out.record.add("j", j);
  out.record.add("pi", pi);
  out.table = std::move(t);
  return out;
}

void add_estimate(Record& r, const std::string& key, const SimEstimate& e, double analytic) {
  r.add("sim_" + key, e.available ? e.value : std::nan(""));
  r.add("sim_" + key + "_se", e.available ? e.std_error : std::nan(""));
  r.add(key, analytic);
}

Output cmd_simulate(const RunConfig& cfg, const Options& o) {
  const SystemParams s = cfg.system();
  Output out;
  Record& r = out.record;
  r.add("target", o.target);
  if (o.target == "round") {
    const RoundStats st = estimate_round_stats(s, cfg.reps, cfg.seed);
    const PhaseTypeRep block(build_block_ph(s));
    const PhaseTypeRep orphan(build_orphan_ph(s));
    const double inf = std::numeric_limits<double>::infinity();
    add_estimate(r, "mean_block_time", st.block_race_time, block.is_proper() ? ph_mean(block) : inf);
    add_estimate(r, "mean_orphan_time", st.orphan_race_time,
                 orphan.is_proper() ? ph_mean(orphan) : inf);
    r.add("sim_conditional_block_time", st.mean_block_time.available ? st.mean_block_time.value : std::nan(""));
    r.add("sim_conditional_orphan_time",
          st.mean_orphan_time.available ? st.mean_orphan_time.value : std::nan(""));
    r.add("sim_block_probability", st.block_probability.value);
    r.add("sim_block_probability_se", st.block_probability.std_error);
    r.add("truncated", static_cast<long long>(st.truncated));
  } else if (o.target == "availability") {
    const OccupancyEstimate bd = simulate_generator(build_birth_death(s), cfg.horizon, cfg.seed);
    std::vector<std::size_t> up;
    for (int f = 0; f <= s.n; ++f) up.push_back(static_cast<std::size_t>(f));
    add_estimate(r, "a1", bd.of_states(up), availability_inherent(s).a1);
    const FullCycleStationary st = stationary_pi(s);
    const OccupancyEstimate fc = simulate_generator(build_full_cycle_Q(s), cfg.horizon, cfg.seed + 1);
    std::vector<std::size_t> orphan;
    for (std::size_t m = 0; m < st.space().size(); ++m) {
      const auto v = st.space().state_of(m);
      if (v.k <= 2 * s.n && v.i + v.j == s.n + 1) orphan.push_back(m);
    }
    add_estimate(r, "p_o", fc.of_states(orphan), availability_full(st, s).p_o);
    add_estimate(r, "pi_000", fc.of_state(0), st.pi()[0]);
  } else if (o.target == "queue") {
    SolverSettings settings = cfg.solver();
    const PerformanceReport p = throughput_exact(s, settings);
    const ExtendedLaws laws = extended_laws(s);
    const QbdBlocks q = build_qbd_blocks(laws.block, laws.orphan, s.lambda, s.b, cfg.dim_cap);
    const QueueSimulation sim = simulate_queue(q, cfg.horizon, cfg.seed);
    add_estimate(r, "th", sim.th, s.b * p.exact_block_event_rate);
    r.add("th_formula", p.th);
    add_estimate(r, "eta1", sim.level0, p.eta1);
    add_estimate(r, "orphan_rate", sim.orphan_rate, p.exact_orphan_event_rate);
    r.add("max_level", static_cast<long long>(sim.max_level));
  } else {
    throw ValidationError("target", "target must be round, availability or queue");
  }
  r.add("seed", static_cast<long long>(cfg.seed));
  return out;
}

SystemParams with_value(std::map<std::string, double> raw, const std::string& key, double v) {
  if (!raw.count(key)) throw ValidationError("param", "cannot sweep unknown parameter '" + key + "'");
  raw[key] = v;
  return validate_params(raw);
}

Output cmd_sweep(const RunConfig& cfg, const Options& o, std::ostream& err) {
  if (cfg.sweep_param.empty() || cfg.sweep_grid.empty()) {
    throw ValidationError("param", "sweep needs --param and --grid");
  }
  if (o.measure != "throughput" && o.measure != "availability") {
    throw ValidationError("measure", "measure must be throughput or availability");
  }
  const bool two = !cfg.sweep_param2.empty();
  if (two && cfg.sweep_grid2.empty()) throw ValidationError("grid2", "--param2 needs --grid2");
  cfg.system();  // validates the base point

  struct Point {
    double x, y;
  };
  std::vector<Point> points;
  for (double y : two ? cfg.sweep_grid2 : std::vector<double>{0.0}) {
    for (double x : cfg.sweep_grid) points.push_back({x, y});
  }
  // Validate every point up front so input errors are reported before any work starts.
  std::vector<SystemParams> params;
  for (const Point& p : points) {
    std::map<std::string, double> raw = cfg.params;
    SystemParams s = with_value(raw, cfg.sweep_param, p.x);
    if (two) {
      raw[cfg.sweep_param] = p.x;
      s = with_value(raw, cfg.sweep_param2, p.y);
    }
    params.push_back(s);
  }

  SolverSettings settings = cfg.solver();
  settings.on_unstable = UnstablePolicy::saturate;
  const ThroughputMethod method = parse_method(cfg.method);
  std::vector<Record> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      try {
        Record r;
        if (o.measure == "throughput") {
          add_report(r, throughput(params[i], method, settings));
        } else {
          add_availability(r, params[i], false);
        }
        results[i] = std::move(r);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned threads = o.threads ? o.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(points.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  Output out;
  Table t;
  t.columns.push_back(cfg.sweep_param);
  if (two) t.columns.push_back(cfg.sweep_param2);
  for (const auto& [k, v] : results.front().fields) t.columns.push_back(k);
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::vector<Value> row{points[i].x};
    if (two) row.push_back(points[i].y);
    for (const auto& [k, v] : results[i].fields) row.push_back(v);
    t.rows.push_back(std::move(row));
    if (o.verbose && o.measure == "throughput") {
      err << cfg.sweep_param << '=' << format_number(points[i].x) << ": stable="
          << (std::get<bool>(results[i].fields[1].second) ? "true" : "false") << '\n';
    }
  }
  out.record.add("measure", o.measure);
  out.table = std::move(t);
  out.json_table = true;
  return out;
}

bool in_record(const Record& r, const std::string& key) {
  return std::any_of(r.fields.begin(), r.fields.end(), [&](const auto& f) { return f.first == key; });
}

void emit(std::ostream& os, const std::string& format, const Record& header, const Output& out) {
  if (format == "json") {
    Record all = header;
    for (const auto& f : out.record.fields) all.fields.push_back(f);
    if (out.json_table) {
      write_json(os, all, *out.table);
    } else {
      write_json(os, all);
    }
  } else if (out.table) {
    // Scalar results not shown in the table go into the leading comments.
    Record h = header;
    for (const auto& f : out.record.fields) {
      if (!std::holds_alternative<std::vector<double>>(f.second) && !in_record(out.trailer, f.first)) {
        h.fields.push_back(f);
      }
    }
    write_csv(os, h, *out.table, out.trailer);
  } else {
    write_csv(os, header, out.record);
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "Config file (flat key = value)");
  sub->add_option("--set", o.sets, "Override one config key: key=value (repeatable)");
  sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--out", o.out_path, "Write results to this file instead of stdout");
  sub->add_flag("--verbose", o.verbose, "Diagnostics on stderr");
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reliability and throughput of a PBFT blockchain with repairable voting nodes"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Options o;

  auto* ph = app.add_subcommand("ph", "Block and orphan generation time laws");
  add_common(ph, o);
  ph->add_option("--times", o.times, "CDF grid, start:stop:step or a comma list");

  auto* th = app.add_subcommand("throughput", "Stationary queue measures and throughput");
  add_common(th, o);
  th->add_option("--method", o.method, "exact | rate-approx");

  auto* av = app.add_subcommand("availability", "A1, A2, A3 and the orphan probability");
  add_common(av, o);

  auto* rel = app.add_subcommand("reliability", "Reliability curve and MTTFF");
  add_common(rel, o);
  rel->add_option("--kind", o.kind, "inherent | operational");
  rel->add_option("--times", o.times, "Time grid starting at 0");

  auto* st = app.add_subcommand("stationary", "Stationary law of the full voting cycle");
  add_common(st, o);

  auto* sim = app.add_subcommand("simulate", "Stochastic simulation with analytic references");
  add_common(sim, o);
  sim->add_option("--target", o.target, "round | availability | queue");
  sim->add_option("--seed", o.seed, "Random seed");
  sim->add_option("--reps", o.reps, "Replications for round statistics");
  sim->add_option("--horizon", o.horizon, "Simulated time for long-run averages");

  auto* sw = app.add_subcommand("sweep", "Measures over a parameter grid");
  add_common(sw, o);
  sw->add_option("--param", o.param, "Swept parameter");
  sw->add_option("--grid", o.grid, "start:stop:step or a comma list");
  sw->add_option("--param2", o.param2, "Second swept parameter");
  sw->add_option("--grid2", o.grid2, "Grid of the second parameter");
  sw->add_option("--method", o.method, "exact | rate-approx");
  sw->add_option("--measure", o.measure, "throughput | availability");
  sw->add_option("--threads", o.threads, "Worker threads (default: all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    out << (e.get_name() == "CallForVersion" ? std::string(kVersion) + "\n" : app.help());
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    const RunConfig cfg = resolve_config(o);
    Output result;
    if (ph->parsed()) {
      result = cmd_ph(cfg, o);
    } else if (th->parsed()) {
      result = cmd_throughput(cfg, o, err);
    } else if (av->parsed()) {
      result = cmd_availability(cfg);
    } else if (rel->parsed()) {
      result = cmd_reliability(cfg, o);
    } else if (st->parsed()) {
      result = cmd_stationary(cfg);
    } else if (sim->parsed()) {
      result = cmd_simulate(cfg, o);
    } else {
      result = cmd_sweep(cfg, o, err);
    }
    const Record header = header_of(cfg);
    if (o.out_path.empty()) {
      emit(out, o.format, header, result);
    } else {
      std::ostringstream buf;
      emit(buf, o.format, header, result);
      std::ofstream f(o.out_path, std::ios::binary);
      f << buf.str();
      if (!f.flush()) throw ValidationError("out", "cannot write '" + o.out_path + "'");
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << one_line(e.what()) << '\n';
    return 2;
  }
}

}  // namespace pbftrel::cli
