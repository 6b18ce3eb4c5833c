#pragma once

// Command-line front end. Configuration is layered: built-in defaults, then a
// preset, then the JSON config file, then individual flags. Every run writes
// a manifest.json listing the resolved configuration and all output files.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical degeneracy,
// 3 I/O failure.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stochmech/csv.hpp"
#include "stochmech/errors.hpp"
#include "stochmech/experiments.hpp"

namespace stochmech::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalError = 2, kIoError = 3 };

using nlohmann::json;

struct RunConfig {
  ExperimentConfig exp;
  std::optional<std::uint64_t> seed;
  std::vector<double> delta_e_list;
  std::vector<std::size_t> n_bins_list;
  std::vector<double> dt_list;
  std::string lifetime_study = "defect"; // "defect" (fig5b) or "dt" (fig5a)
};

// Built-in parameter sets. paper-* are the full-length runs; desk-*
// are scaled to run in minutes on one core.
inline const std::map<std::string, json>& presets() {
  static const std::map<std::string, json> table = [] {
    std::map<std::string, json> t;
    const json dt_fig2 = {0.001, 0.005, 0.01, 0.05, 0.1, 0.5};
    const json dt_fig3 = {0.5, 0.2, 0.1, 0.05, 0.02};
    const json de_fig4 = {-0.02, -0.01, -0.005, 0.0, 0.005, 0.01, 0.02, 0.03};
    const json de_fig5b = {-0.02, -0.015, -0.01, -0.005, 0.0, 0.005, 0.01, 0.015, 0.02, 0.025, 0.03};
    t["paper-fig1"] = {{"seed", 1},
                       {"simulation", {{"dt", 0.005}, {"n_steps", 100'000'000}, {"replicates", 12},
                                       {"interpolation", "global"}, {"init_mode", "uniform_full"}}},
                       {"sweep", {{"n_bins_list", {32, 64, 128, 256}}}}};
    t["paper-fig2"] = {{"seed", 1},
                       {"simulation", {{"n_steps", 100'000'000}, {"n_bins", 128}, {"replicates", 12},
                                       {"interpolation", "global"}}},
                       {"sweep", {{"dt_list", dt_fig2}}}};
    t["paper-fig3"] = {{"seed", 1},
                       {"simulation", {{"n_steps", 100'000'000}, {"n_bins", 128}, {"replicates", 12},
                                       {"interpolation", "global"}}},
                       {"sweep", {{"dt_list", {0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5}}}}};
    t["paper-fig4"] = {{"field", {{"delta_e_list", de_fig4}}}};
    t["paper-fig5a"] = {{"seed", 1},
                        {"field", {{"delta_e", 0.01}}},
                        {"simulation", {{"replicates", 10}, {"interpolation", "local3"}, {"init_mode", "near_minimum"}}},
                        {"lifetime", {{"study", "dt"}, {"tau_max", 1e6}}},
                        {"sweep", {{"dt_list", {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1}}}}};
    t["paper-fig5b"] = {{"seed", 1},
                        {"field", {{"delta_e_list", de_fig5b}}},
                        {"simulation", {{"dt", 1e-3}, {"replicates", 10}, {"interpolation", "local3"},
                                        {"init_mode", "near_minimum"}}},
                        {"lifetime", {{"study", "defect"}, {"tau_max", 1e6}}}};

    t["desk-fig1"] = t["paper-fig1"];
    t["desk-fig1"]["simulation"]["n_steps"] = 10'000'000;
    t["desk-fig1"]["simulation"]["replicates"] = 4;
    t["desk-fig2"] = t["paper-fig2"];
    t["desk-fig2"]["simulation"]["n_steps"] = 10'000'000;
    t["desk-fig2"]["simulation"]["replicates"] = 4;
    t["desk-fig2"]["sweep"]["dt_list"] = {0.001, 0.005, 0.05, 0.5};
    t["desk-fig3"] = t["paper-fig3"];
    t["desk-fig3"]["simulation"]["n_steps"] = 10'000'000;
    t["desk-fig3"]["simulation"]["replicates"] = 4;
    t["desk-fig3"]["sweep"]["dt_list"] = dt_fig3;
    t["desk-fig4"] = t["paper-fig4"];
    t["desk-fig5a"] = t["paper-fig5a"];
    t["desk-fig5a"]["lifetime"]["tau_max"] = 1e4;
    t["desk-fig5a"]["sweep"]["dt_list"] = {1e-4, 1e-3, 1e-2};
    t["desk-fig5b"] = t["paper-fig5b"];
    t["desk-fig5b"]["lifetime"]["tau_max"] = 1e4;
    return t;
  }();
  return table;
}

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline InterpolationMode parse_interpolation(const std::string& s) {
  if (s == "global") return InterpolationMode::global;
  if (s == "local3") return InterpolationMode::local3;
  if (s == "analytic") return InterpolationMode::analytic;
  throw ConfigError("interpolation must be global, local3 or analytic, got '" + s + "'");
}

inline InitMode parse_init_mode(const std::string& s) {
  if (s == "uniform_full") return InitMode::uniform_full;
  if (s == "near_minimum") return InitMode::near_minimum;
  throw ConfigError("init_mode must be uniform_full or near_minimum, got '" + s + "'");
}

inline GlobalScheme parse_scheme(const std::string& s) {
  if (s == "cubic_spline") return GlobalScheme::cubic_spline;
  if (s == "barycentric") return GlobalScheme::barycentric;
  throw ConfigError("global_scheme must be cubic_spline or barycentric, got '" + s + "'");
}

inline const char* to_string(GlobalScheme s) { return s == GlobalScheme::cubic_spline ? "cubic_spline" : "barycentric"; }

} // namespace detail

inline RunConfig parse_config(const json& doc) {
  using namespace detail;
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  reject_unknown(doc, {"seed", "physics", "field", "simulation", "lifetime", "sweep", "threads"}, "configuration");
  RunConfig rc;
  ExperimentConfig& e = rc.exp;
  if (doc.contains("seed")) {
    std::uint64_t s = 0;
    read(doc, "seed", s);
    rc.seed = s;
  }
  read(doc, "threads", e.threads);

  const json empty = json::object();
  const json& ph = doc.value("physics", empty);
  reject_unknown(ph, {"hbar", "mass", "force_constant", "half_width"}, "physics");
  read(ph, "hbar", e.params.hbar);
  read(ph, "mass", e.params.mass);
  read(ph, "force_constant", e.params.force_constant);
  read(ph, "half_width", e.params.half_width);

  const json& fd = doc.value("field", empty);
  reject_unknown(fd, {"n_field", "delta_e", "delta_e_list", "divergence_cap", "global_scheme"}, "field");
  read(fd, "n_field", e.n_field);
  read(fd, "delta_e", e.delta_e);
  read(fd, "delta_e_list", rc.delta_e_list);
  read(fd, "divergence_cap", e.divergence_cap);
  if (fd.contains("global_scheme")) e.global_scheme = parse_scheme(fd.at("global_scheme").get<std::string>());

  const json& sm = doc.value("simulation", empty);
  reject_unknown(sm, {"dt", "n_steps", "n_bins", "replicates", "init_mode", "interpolation", "points_per_decade"},
                 "simulation");
  read(sm, "dt", e.dt);
  read(sm, "n_steps", e.n_steps);
  read(sm, "n_bins", e.n_bins);
  read(sm, "replicates", e.replicates);
  read(sm, "points_per_decade", e.points_per_decade);
  if (sm.contains("init_mode")) e.init_mode = parse_init_mode(sm.at("init_mode").get<std::string>());
  if (sm.contains("interpolation")) e.interpolation = parse_interpolation(sm.at("interpolation").get<std::string>());

  const json& lt = doc.value("lifetime", empty);
  reject_unknown(lt, {"tau_max", "escape_radius", "study"}, "lifetime");
  read(lt, "tau_max", e.tau_max);
  if (lt.contains("escape_radius")) {
    double r = 0;
    read(lt, "escape_radius", r);
    e.escape_radius = r;
  }
  read(lt, "study", rc.lifetime_study);
  if (rc.lifetime_study != "defect" && rc.lifetime_study != "dt") {
    throw ConfigError("lifetime.study must be 'defect' or 'dt'");
  }

  const json& sw = doc.value("sweep", empty);
  reject_unknown(sw, {"n_bins_list", "dt_list"}, "sweep");
  read(sw, "n_bins_list", rc.n_bins_list);
  read(sw, "dt_list", rc.dt_list);

  e.validate();
  return rc;
}

// Fully explicit configuration; feeding it back through parse_config gives
// the same RunConfig.
inline json resolved_json(const RunConfig& rc, const char* init_default, const char* interp_default) {
  const ExperimentConfig& e = rc.exp;
  json j;
  if (rc.seed) j["seed"] = *rc.seed;
  j["threads"] = e.threads;
  j["physics"] = {{"hbar", e.params.hbar},
                  {"mass", e.params.mass},
                  {"force_constant", e.params.force_constant},
                  {"half_width", e.params.half_width}};
  j["field"] = {{"n_field", e.n_field},
                {"delta_e", e.delta_e},
                {"delta_e_list", rc.delta_e_list},
                {"divergence_cap", e.divergence_cap},
                {"global_scheme", detail::to_string(e.global_scheme)}};
  j["simulation"] = {{"dt", e.dt},
                     {"n_steps", e.n_steps},
                     {"n_bins", e.n_bins},
                     {"replicates", e.replicates},
                     {"points_per_decade", e.points_per_decade},
                     {"init_mode", e.init_mode ? to_string(*e.init_mode) : init_default},
                     {"interpolation", e.interpolation ? to_string(*e.interpolation) : interp_default}};
  j["lifetime"] = {{"tau_max", e.tau_max}, {"escape_radius", e.resolved_escape_radius()}, {"study", rc.lifetime_study}};
  j["sweep"] = {{"n_bins_list", rc.n_bins_list}, {"dt_list", rc.dt_list}};
  return j;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Collects outputs of one command and writes the manifest last.
class OutputSet {
public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_)) throw IoError("cannot create output directory " + dir_.string());
  }

  std::filesystem::path add(const std::string& name) {
    files_.push_back(name);
    return dir_ / name;
  }

  void write_manifest(json manifest) const {
    manifest["outputs"] = files_;
    const auto path = dir_ / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << manifest.dump(2) << '\n';
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
  }

private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

struct Invocation {
  std::string command;
  std::string preset;
  std::vector<std::string> overrides;
  RunConfig config;
  std::filesystem::path out_dir;
};

inline json base_manifest(const Invocation& inv, const char* init_default, const char* interp_default,
                          const std::vector<std::uint64_t>& streams) {
  json m;
  m["tool"] = "stochmech";
  m["version"] = kToolVersion;
  m["timestamp"] = utc_timestamp();
  m["command"] = inv.command;
  m["preset"] = inv.preset;
  m["overrides"] = inv.overrides;
  m["config"] = resolved_json(inv.config, init_default, interp_default);
  if (inv.config.seed) m["seed_base"] = *inv.config.seed;
  m["stream_indices"] = streams;
  return m;
}

inline std::uint64_t require_seed(const RunConfig& rc) {
  if (!rc.seed) throw ConfigError("no seed given: set \"seed\" in the config or pass --seed");
  return *rc.seed;
}

inline std::vector<double> defects_or_single(const RunConfig& rc) {
  return rc.delta_e_list.empty() ? std::vector<double>{rc.exp.delta_e} : rc.delta_e_list;
}

inline std::function<double(double)> oracle_for(const PhysicalParams& p) {
  return [p](double x) { return ground_state_density(p, x); };
}

inline void cmd_solve_field(const Invocation& inv) {
  const RunConfig& rc = inv.config;
  OutputSet out(inv.out_dir);
  const CollocationGrid grid(rc.exp.n_field, rc.exp.params.half_width);
  const auto defects = defects_or_single(rc);
  const auto tables = field_scan(rc.exp.params, defects, grid, rc.exp.divergence_cap);
  for (std::size_t i = 0; i < tables.size(); ++i) {
    write_field_csv(out.add("field_de_" + shortest(defects[i]) + ".csv"), tables[i]);
  }
  out.write_manifest(base_manifest(inv, "uniform_full", "global", {}));
}

inline void cmd_field_scan(const Invocation& inv) {
  const RunConfig& rc = inv.config;
  OutputSet out(inv.out_dir);
  const CollocationGrid grid(rc.exp.n_field, rc.exp.params.half_width);
  const auto defects = defects_or_single(rc);
  const auto tables = field_scan(rc.exp.params, defects, grid, rc.exp.divergence_cap);
  CsvWriter w(out.add("fig4.csv"), {"delta_e", "x", "v", "diverged"});
  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (std::size_t j = 0; j < grid.size(); ++j) {
      w.cell(defects[i]).cell(grid.node(j)).cell(field_value_cell(tables[i], j)).cell(tables[i].diverged[j] ? 1 : 0);
      w.end_row();
    }
  }
  w.close();
  out.write_manifest(base_manifest(inv, "uniform_full", "global", {}));
}

inline void cmd_simulate(const Invocation& inv) {
  RunConfig rc = inv.config;
  rc.exp.seed_base = require_seed(rc);
  OutputSet out(inv.out_dir);
  const std::vector<std::uint64_t> streams{0};
  const auto runs = run_replicates(rc.exp, streams);
  const auto& run = runs.front();
  write_density_csv(out.add("density.csv"), run.histogram, oracle_for(rc.exp.params));
  write_noise_csv(out.add("noise.csv"), run.result.noise);
  json m = base_manifest(inv, "uniform_full", "global", streams);
  m["initial_position"] = run.initial_position;
  m["out_of_range"] = run.histogram.out_of_range();
  m["total_recorded"] = run.histogram.total_recorded();
  out.write_manifest(std::move(m));
}

inline void cmd_converge(const Invocation& inv) {
  RunConfig rc = inv.config;
  rc.exp.seed_base = require_seed(rc);
  if (rc.n_bins_list.empty()) rc.n_bins_list = {rc.exp.n_bins};
  OutputSet out(inv.out_dir);
  const auto rows = convergence_study(rc.exp, rc.n_bins_list);
  CsvWriter agg(out.add("fig1b.csv"), {"n_bins", "sigma_mean", "sigma_std"});
  CsvWriter per(out.add("replicates.csv"), {"n_bins", "replicate", "stream_index", "initial_position", "sigma_final"});
  const auto oracle = oracle_for(rc.exp.params);
  for (const auto& row : rows) {
    agg.cell(row.n_bins).cell(row.final_sigma.mean).cell(row.final_sigma.std);
    agg.end_row();
    for (std::size_t r = 0; r < row.runs.size(); ++r) {
      const auto& run = row.runs[r];
      per.cell(row.n_bins).cell(r).cell(run.stream_index).cell(run.initial_position).cell(run.final_sigma());
      per.end_row();
      write_density_csv(out.add("density_nbins" + std::to_string(row.n_bins) + "_rep" + std::to_string(r) + ".csv"),
                        run.histogram, oracle);
    }
  }
  agg.close();
  per.close();
  out.write_manifest(base_manifest(inv, "uniform_full", "global", default_streams(rc.exp.replicates)));
}

inline void cmd_dt_sweep(const Invocation& inv) {
  RunConfig rc = inv.config;
  rc.exp.seed_base = require_seed(rc);
  if (rc.dt_list.empty()) rc.dt_list = {rc.exp.dt};
  OutputSet out(inv.out_dir);
  const auto rows = dt_sweep(rc.exp, rc.dt_list);

  std::optional<PowerLaw> fit;
  std::vector<double> xs, ys;
  for (const auto& row : rows) {
    xs.push_back(row.dt);
    ys.push_back(row.final_sigma.mean);
  }
  try {
    fit = powerlaw_fit(xs, ys);
  } catch (const ConfigError&) {
    // a single time step has no slope; the fit columns stay empty
  }

  CsvWriter curves(out.add("fig2b.csv"), {"dt", "iteration", "sigma_mean", "sigma_std"});
  CsvWriter final_tab(out.add("fig3.csv"), {"dt", "sigma_mean", "sigma_std", "fit_a", "fit_b"});
  CsvWriter per(out.add("replicates.csv"), {"dt", "replicate", "stream_index", "iteration", "sigma_n"});
  for (const auto& row : rows) {
    for (const auto& p : row.curve) {
      curves.cell(row.dt).cell(p.iteration).cell(p.sigma.mean).cell(p.sigma.std);
      curves.end_row();
    }
    final_tab.cell(row.dt).cell(row.final_sigma.mean).cell(row.final_sigma.std);
    if (fit) {
      final_tab.cell(fit->amplitude).cell(fit->exponent);
    } else {
      final_tab.cell(std::string_view{}).cell(std::string_view{});
    }
    final_tab.end_row();
    for (std::size_t r = 0; r < row.runs.size(); ++r) {
      for (const auto& p : row.runs[r].result.noise) {
        per.cell(row.dt).cell(r).cell(row.runs[r].stream_index).cell(p.iteration).cell(p.sigma);
        per.end_row();
      }
    }
  }
  curves.close();
  final_tab.close();
  per.close();
  json m = base_manifest(inv, "uniform_full", "global", default_streams(rc.exp.replicates));
  if (fit) m["powerlaw_fit"] = {{"amplitude", fit->amplitude}, {"exponent", fit->exponent}};
  out.write_manifest(std::move(m));
}

inline void cmd_lifetime(const Invocation& inv) {
  RunConfig rc = inv.config;
  rc.exp.seed_base = require_seed(rc);
  OutputSet out(inv.out_dir);
  const bool by_dt = rc.lifetime_study == "dt";
  LifetimeStudy study;
  if (by_dt) {
    if (rc.dt_list.empty()) rc.dt_list = {rc.exp.dt};
    study = lifetime_vs_dt(rc.exp, rc.dt_list);
  } else {
    study = lifetime_vs_defect(rc.exp, defects_or_single(rc));
  }
  const char* key = by_dt ? "dt" : "delta_e";
  CsvWriter agg(out.add(by_dt ? "fig5a.csv" : "fig5b.csv"), {key, "tau_mean", "tau_std"});
  CsvWriter per(out.add("replicates.csv"), {key, "replicate", "stream_index", "tau"});
  for (const auto& row : study.rows) {
    agg.cell(row.key).cell(row.tau.mean).cell(row.tau.std);
    agg.end_row();
    for (std::size_t r = 0; r < row.tau.values.size(); ++r) {
      per.cell(row.key).cell(r).cell(static_cast<std::uint64_t>(r)).cell(row.tau.values[r]);
      per.end_row();
    }
  }
  agg.close();
  per.close();
  json m = base_manifest(inv, "near_minimum", "local3", default_streams(rc.exp.replicates));
  m["combined"] = {{"tau_mean", study.combined.mean}, {"tau_std", study.combined.std}};
  out.write_manifest(std::move(m));
}

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

// Entry point; returns the process exit code.
inline int run(int argc, char** argv, std::ostream& err = std::cerr) {
  CLI::App app{"stochmech: stochastic-mechanics velocity fields, Langevin densities and lifetimes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::string config_path, preset, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> dt, delta_e, tau_max, half_width, escape_radius;
  std::optional<std::uint64_t> n_steps;
  std::optional<std::size_t> n_bins, n_field, replicates;
  std::optional<std::string> interpolation, init_mode, study;
  std::vector<double> delta_e_list, dt_list;
  std::vector<std::size_t> n_bins_list;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--seed", seed, "base seed for all random streams");
  app.add_option("--threads", threads, "worker threads for replicates (0 = all cores)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--preset", preset, "built-in parameter set (paper-fig1..fig5b, desk-fig1..fig5b)");
  app.add_option("--dt", dt, "time step");
  app.add_option("--n-steps", n_steps, "Langevin steps per replicate");
  app.add_option("--n-bins", n_bins, "histogram bins");
  app.add_option("--n-field", n_field, "velocity-field collocation points (odd)");
  app.add_option("--delta-e", delta_e, "energy defect");
  app.add_option("--replicates", replicates, "independent replicates");
  app.add_option("--tau-max", tau_max, "lifetime cap");
  app.add_option("--escape-radius", escape_radius, "escape distance for lifetimes");
  app.add_option("--half-width", half_width, "domain half width L");
  app.add_option("--interpolation", interpolation, "global | local3 | analytic");
  app.add_option("--init-mode", init_mode, "uniform_full | near_minimum");
  app.add_option("--study", study, "lifetime study: defect | dt");
  app.add_option("--delta-e-list", delta_e_list, "energy defects for scans")->delimiter(',');
  app.add_option("--dt-list", dt_list, "time steps for sweeps")->delimiter(',');
  app.add_option("--n-bins-list", n_bins_list, "bin counts for the convergence study")->delimiter(',');
  app.fallthrough();

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"solve-field", "solve the velocity field for each energy defect"},
      {"field-scan", "velocity fields across energy defects (fig4.csv)"},
      {"simulate", "one Langevin run: density and noise series"},
      {"converge", "solution noise against bin count (fig1b.csv)"},
      {"dt-sweep", "solution noise against time step (fig2b.csv, fig3.csv)"},
      {"lifetime", "state lifetime against energy defect or time step (fig5a.csv / fig5b.csv)"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  Invocation inv;
  inv.command = app.get_subcommands().front()->get_name();
  inv.preset = preset;
  inv.out_dir = out_dir;

  try {
    json doc = json::object();
    if (!preset.empty()) {
      const auto it = presets().find(preset);
      if (it == presets().end()) throw ConfigError("unknown preset '" + preset + "'");
      doc.merge_patch(it->second);
    }
    if (!config_path.empty()) doc.merge_patch(load_json_file(config_path));

    json patch = json::object();
    auto set = [&](const char* flag, json& slot, json value) {
      slot = std::move(value);
      inv.overrides.emplace_back(flag);
    };
    if (seed) set("--seed", patch["seed"], *seed);
    if (threads) set("--threads", patch["threads"], *threads);
    if (half_width) set("--half-width", patch["physics"]["half_width"], *half_width);
    if (n_field) set("--n-field", patch["field"]["n_field"], *n_field);
    if (delta_e) set("--delta-e", patch["field"]["delta_e"], *delta_e);
    if (!delta_e_list.empty()) set("--delta-e-list", patch["field"]["delta_e_list"], delta_e_list);
    if (dt) set("--dt", patch["simulation"]["dt"], *dt);
    if (n_steps) set("--n-steps", patch["simulation"]["n_steps"], *n_steps);
    if (n_bins) set("--n-bins", patch["simulation"]["n_bins"], *n_bins);
    if (replicates) set("--replicates", patch["simulation"]["replicates"], *replicates);
    if (interpolation) set("--interpolation", patch["simulation"]["interpolation"], *interpolation);
    if (init_mode) set("--init-mode", patch["simulation"]["init_mode"], *init_mode);
    if (tau_max) set("--tau-max", patch["lifetime"]["tau_max"], *tau_max);
    if (escape_radius) set("--escape-radius", patch["lifetime"]["escape_radius"], *escape_radius);
    if (study) set("--study", patch["lifetime"]["study"], *study);
    if (!dt_list.empty()) set("--dt-list", patch["sweep"]["dt_list"], dt_list);
    if (!n_bins_list.empty()) set("--n-bins-list", patch["sweep"]["n_bins_list"], n_bins_list);
    doc.merge_patch(patch);

    inv.config = parse_config(doc);

    if (inv.command == "solve-field") cmd_solve_field(inv);
    else if (inv.command == "field-scan") cmd_field_scan(inv);
    else if (inv.command == "simulate") cmd_simulate(inv);
    else if (inv.command == "converge") cmd_converge(inv);
    else if (inv.command == "dt-sweep") cmd_dt_sweep(inv);
    else cmd_lifetime(inv);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const UnsupportedModeError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DegenerateInputError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const DomainError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kIoError;
  }
  return kOk;
}

} // namespace stochmech::cli
