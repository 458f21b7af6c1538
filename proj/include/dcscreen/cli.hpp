#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dcscreen/dataset.hpp"
#include "dcscreen/error.hpp"
#include "dcscreen/methods.hpp"
#include "dcscreen/report.hpp"
#include "dcscreen/screen.hpp"
#include "dcscreen/simulate.hpp"

#ifndef DCSCREEN_VERSION
#define DCSCREEN_VERSION "0.0.0"
#endif

namespace dcscreen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Invalid flag values, unknown presets and similar caller mistakes.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Screen, Simulate, Converge };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Screen: return "screen";
    case Command::Simulate: return "simulate";
    case Command::Converge: return "converge";
  }
  return "unknown";
}

/// Fully resolved settings for one invocation.
struct RunConfig {
  Command command = Command::Screen;
  std::string out_dir = ".";
  std::size_t workers = 1;
  std::uint64_t seed = 1;

  // screen
  std::string input;
  std::string response_cols = "last";
  std::string groups;
  std::vector<Method> methods{Method::DcSis};
  std::string rule = "top-d";
  std::optional<std::size_t> d;  // empty = auto, i.e. floor(n / ln n)
  double c = 0.0;
  double kappa = 0.0;

  // simulate / converge
  std::string preset;
  ModelSpec spec;
  std::size_t reps = 0;
  std::vector<std::size_t> grid{50, 100, 200, 400};
  std::size_t reference_n = 20000;

  /// The raw key/value settings the config was built from (for the manifest).
  std::map<std::string, std::string> settings;
};

using Settings = std::map<std::string, std::string>;

/// Flat key = value file; '#' starts a comment; keys match flag names.
inline Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  Settings out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos)
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key = value");
    std::string key(detail::trim(trimmed.substr(0, eq)));
    if (key.starts_with("--")) key.erase(0, 2);
    out[key] = detail::unquote(trimmed.substr(eq + 1));
  }
  return out;
}

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  const auto idx = dcscreen::detail::parse_index(v);
  if (!idx) throw UsageError("--" + key + " expects a non-negative integer, got '" + v + "'");
  return *idx;
}

inline double parse_real(const std::string& key, const std::string& v) {
  const auto d = dcscreen::detail::parse_double(v);
  if (!d) throw UsageError("--" + key + " expects a number, got '" + v + "'");
  return *d;
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : presets()) names.push_back(p.name);
  return names;
}

inline std::size_t default_workers() {
  if (const char* env = std::getenv("DCSCREEN_WORKERS")) {
    const auto v = dcscreen::detail::parse_index(env);
    if (v && *v > 0) return *v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace detail

/// Builds a typed RunConfig from merged settings. Keys that do not apply to the
/// command are rejected.
inline RunConfig resolve_config(Command command, const Settings& settings) {
  static const std::map<Command, std::vector<std::string>> allowed{
      {Command::Screen,
       {"input", "response-cols", "groups", "method", "rule", "d", "c", "kappa", "workers", "out-dir", "seed"}},
      {Command::Simulate, {"preset", "model", "n", "p", "rho", "method", "reps", "seed", "workers", "out-dir"}},
      {Command::Converge,
       {"preset", "model", "p", "rho", "grid", "reps", "reference-n", "seed", "workers", "out-dir"}},
  };
  const auto& keys = allowed.at(command);
  for (const auto& [k, v] : settings)
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw UsageError("option '" + k + "' is not valid for '" + to_string(command) + "'");

  RunConfig cfg;
  cfg.command = command;
  cfg.settings = settings;
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    if (auto it = settings.find(k); it != settings.end()) return it->second;
    return std::nullopt;
  };

  cfg.workers = detail::default_workers();
  if (auto v = get("workers")) cfg.workers = detail::parse_count("workers", *v);
  if (cfg.workers == 0) throw UsageError("--workers must be >= 1");
  if (auto v = get("out-dir")) cfg.out_dir = *v;
  if (auto v = get("seed")) cfg.seed = detail::parse_count("seed", *v);

  if (auto v = get("method")) {
    cfg.methods.clear();
    if (*v == "all") {
      cfg.methods = {Method::Sis, Method::Sirs, Method::DcSis};
    } else {
      const auto m = parse_method(*v);
      if (!m) throw UsageError("unknown method '" + *v + "' (expected dcsis, sis, sirs or all)");
      cfg.methods = {*m};
    }
    if (command == Command::Screen && cfg.methods.size() != 1) throw UsageError("screen takes a single method");
  }

  if (command == Command::Screen) {
    if (auto v = get("input")) cfg.input = *v;
    if (cfg.input.empty()) throw UsageError("screen requires --input");
    if (auto v = get("response-cols")) cfg.response_cols = *v;
    if (auto v = get("groups")) cfg.groups = *v;
    if (auto v = get("rule")) cfg.rule = *v;
    if (cfg.rule != "top-d" && cfg.rule != "threshold") throw UsageError("--rule must be top-d or threshold");
    if (auto v = get("d"); v && *v != "auto") {
      cfg.d = detail::parse_count("d", *v);
      if (*cfg.d == 0) throw UsageError("--d must be positive");
    }
    if (cfg.rule == "threshold") {
      const auto c = get("c");
      if (!c) throw UsageError("threshold rule requires --c");
      cfg.c = detail::parse_real("c", *c);
      if (auto k = get("kappa")) cfg.kappa = detail::parse_real("kappa", *k);
      if (!(cfg.c > 0.0)) throw UsageError("--c must be > 0");
      if (!(cfg.kappa >= 0.0 && cfg.kappa < 0.5)) throw UsageError("--kappa must lie in [0, 0.5)");
    }
    return cfg;
  }

  if (auto v = get("preset")) {
    const auto preset = find_preset(*v);
    if (!preset) {
      std::string msg = "unknown preset '" + *v + "'; valid presets:";
      for (const auto& n : detail::preset_names()) msg += " " + n;
      throw UsageError(msg);
    }
    cfg.preset = *v;
    cfg.spec = preset->spec;
    cfg.reps = preset->reps;
  }
  if (command == Command::Converge) {
    // a preset only contributes the model and rho here
    cfg.spec.p = 50;
    cfg.reps = 20;
  }
  if (auto v = get("model")) {
    const auto m = parse_model(*v);
    if (!m) throw UsageError("unknown model '" + *v + "' (expected 1a 1b 1c 1d 2 3a 3b null)");
    cfg.spec.model = *m;
  }
  if (auto v = get("n")) cfg.spec.n = detail::parse_count("n", *v);
  if (auto v = get("p")) cfg.spec.p = detail::parse_count("p", *v);
  if (auto v = get("rho")) cfg.spec.rho = detail::parse_real("rho", *v);
  if (auto v = get("reps")) cfg.reps = detail::parse_count("reps", *v);
  cfg.spec.seed = cfg.seed;
  if (command == Command::Simulate) {
    if (cfg.preset.empty() && !get("model")) throw UsageError("simulate requires --preset or --model");
    if (cfg.reps == 0) cfg.reps = 100;
  }
  if (command == Command::Converge) {
    if (auto v = get("grid")) {
      cfg.grid.clear();
      for (auto part : dcscreen::detail::split(*v, ','))
        cfg.grid.push_back(detail::parse_count("grid", std::string(part)));
    }
    if (auto v = get("reference-n")) cfg.reference_n = detail::parse_count("reference-n", *v);
    if (cfg.reps == 0) throw UsageError("--reps (seeds) must be >= 1");
  }
  return cfg;
}

// Worker count and file locations are left out so reruns compare byte-for-byte.
inline Json manifest(const RunConfig& cfg) {
  Json settings = Json::object();
  for (const auto& [k, v] : cfg.settings)
    if (k != "workers" && k != "out-dir" && k != "config") settings[k] = v;
  return Json{{"tool", "dcscreen"},
              {"version", DCSCREEN_VERSION},
              {"command", to_string(cfg.command)},
              {"seed", cfg.seed},
              {"settings", settings}};
}

inline std::string out_path(const RunConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

inline void prepare_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec || !std::filesystem::is_directory(cfg.out_dir))
    throw Error(ErrorCode::Io, "cannot create output directory '" + cfg.out_dir + "'");
}

/// Screens a CSV and writes utilities.csv, selected.json and manifest.json.
inline void cmd_screen(const RunConfig& cfg, std::ostream& log) {
  const Dataset data = load_csv(cfg.input, cfg.response_cols,
                                cfg.groups.empty() ? std::nullopt : std::optional<std::string_view>(cfg.groups));
  const Method method = cfg.methods.front();
  if (method != Method::DcSis) {
    if (data.q() != 1)
      throw Error(ErrorCode::UnsupportedResponse,
                  std::string(display_name(method)) + " needs one response column, got " + std::to_string(data.q()));
    if (!data.all_singletons())
      throw Error(ErrorCode::UnsupportedGrouping, std::string(display_name(method)) + " cannot screen grouped predictors");
  }

  SelectionRule rule;
  if (cfg.rule == "threshold") {
    rule = Threshold{cfg.c, cfg.kappa};
  } else if (cfg.d) {
    rule = TopD{*cfg.d};
  } else {
    std::size_t d = data.n() >= 3 ? cutoff_d(data.n()) : 1;
    if (d > data.num_blocks()) {
      log << "warning: automatic d=" << d << " exceeds the " << data.num_blocks() << " blocks; using "
          << data.num_blocks() << "\n";
      d = data.num_blocks();
    }
    rule = TopD{d};
  }

  prepare_out_dir(cfg);
  const ScreeningResult result = screen_dataset(data, method, rule, cfg.workers);
  for (std::size_t g : result.degenerate)
    log << "warning: block " << (g + 1) << " (" << data.block_names()[g]
        << ") is constant; distance correlation undefined, utility set to 0\n";

  std::ostringstream util;
  write_utilities(util, data, result);
  write_text(out_path(cfg, "utilities.csv"), util.str());

  Json selected = Json::array();
  Json names = Json::array();
  for (std::size_t g : result.selected) {
    selected.push_back(g + 1);
    names.push_back(data.block_names()[g]);
  }
  Json degenerate = Json::array();
  for (std::size_t g : result.degenerate) degenerate.push_back(g + 1);
  const Json sel{{"method", display_name(method)},
                 {"rule", to_json(rule)},
                 {"n", data.n()},
                 {"G", data.num_blocks()},
                 {"selected", selected},
                 {"selected_names", names},
                 {"degenerate_blocks", degenerate}};
  write_text(out_path(cfg, "selected.json"), sel.dump(2) + "\n");
  write_text(out_path(cfg, "manifest.json"), manifest(cfg).dump(2) + "\n");
  log << "screened " << data.num_blocks() << " blocks (n=" << data.n() << ", q=" << data.q() << "); selected "
      << result.selected.size() << "\n";
}

/// Runs the Monte Carlo study and writes report.json, size_quantiles.csv,
/// selection_rates.csv and manifest.json.
inline std::vector<EvalReport> cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  cfg.spec.validate();
  std::vector<Method> methods;
  for (Method m : cfg.methods) {
    if (method_supports(m, cfg.spec.model)) {
      methods.push_back(m);
    } else if (cfg.methods.size() == 1) {
      throw Error(ErrorCode::IncompatibleMethod, std::string(display_name(m)) + " cannot screen model " +
                                                     to_string(cfg.spec.model));
    } else {
      log << "note: skipping " << display_name(m) << " (incompatible with model " << to_string(cfg.spec.model)
          << ")\n";
    }
  }
  prepare_out_dir(cfg);

  std::vector<EvalReport> reports;
  for (Method m : methods) {
    reports.push_back(run_replications(cfg.spec, m, cfg.reps, {}, cfg.workers));
    const auto& r = reports.back();
    log << display_name(m) << " model " << to_string(cfg.spec.model) << ": median S = " << r.s_quantiles[2]
        << ", Pa(d1) = " << r.pa_table[0] << "\n";
  }

  Json all = Json::array();
  for (const auto& r : reports) all.push_back(to_json(r));
  const Json doc{{"preset", cfg.preset}, {"reports", all}};
  write_text(out_path(cfg, "report.json"), doc.dump(2) + "\n");
  std::ostringstream sizes, rates;
  write_size_table(sizes, reports);
  write_selection_table(rates, reports);
  write_text(out_path(cfg, "size_quantiles.csv"), sizes.str());
  write_text(out_path(cfg, "selection_rates.csv"), rates.str());
  write_text(out_path(cfg, "manifest.json"), manifest(cfg).dump(2) + "\n");
  return reports;
}

/// Writes the error-decay table converge.csv plus converge.json.
inline ConvergenceReport cmd_converge(const RunConfig& cfg, std::ostream& log) {
  ConvergenceConfig cc;
  cc.spec = cfg.spec;
  cc.grid = cfg.grid;
  cc.seeds = cfg.reps;
  cc.reference_n = cfg.reference_n;
  if (cc.grid.size() < 2) throw Error(ErrorCode::InvalidArgument, "convergence grid needs at least 2 sample sizes");
  prepare_out_dir(cfg);
  auto report = run_convergence(cc, cfg.workers);
  write_text(out_path(cfg, "converge.json"), to_json(report).dump(2) + "\n");
  std::ostringstream table;
  write_convergence_table(table, report);
  write_text(out_path(cfg, "converge.csv"), table.str());
  write_text(out_path(cfg, "manifest.json"), manifest(cfg).dump(2) + "\n");
  for (const auto& pt : report.points) log << "n=" << pt.n << " median max error " << pt.median << "\n";
  return report;
}

/// Entry point shared by the executable and the tests. Returns the exit code:
/// 0 success, 1 data/validation error, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Distance-correlation sure independence screening"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DCSCREEN_VERSION);

  struct Sub {
    Command command;
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::string config;
  };
  std::vector<Sub> subs;
  subs.reserve(3);

  auto add_common = [](Sub& s) {
    s.app->add_option("--out-dir", s.values["out-dir"], "Directory for report files");
    s.app->add_option("--workers", s.values["workers"], "Worker threads (default: $DCSCREEN_WORKERS or all cores)");
    s.app->add_option("--seed", s.values["seed"], "Master seed");
    s.app->add_option("--config", s.config, "key = value file; its values win over flags");
  };

  subs.push_back({Command::Screen, app.add_subcommand("screen", "Rank the predictors of a CSV dataset"), {}, {}});
  {
    auto& s = subs.back();
    s.app->add_option("--input", s.values["input"], "CSV file with a header row");
    s.app->add_option("--response-cols", s.values["response-cols"], "last, last:K, or indices/names (default last)");
    s.app->add_option("--groups", s.values["groups"], "Predictor grouping, e.g. 1-3;4;5-6");
    s.app->add_option("--method", s.values["method"], "dcsis (default), sis or sirs");
    s.app->add_option("--rule", s.values["rule"], "top-d (default) or threshold");
    s.app->add_option("--d", s.values["d"], "Model size for top-d, or auto = [n / log n]");
    s.app->add_option("--c", s.values["c"], "Threshold constant c");
    s.app->add_option("--kappa", s.values["kappa"], "Threshold exponent kappa");
    add_common(s);
  }
  subs.push_back({Command::Simulate, app.add_subcommand("simulate", "Run a simulation preset or model"), {}, {}});
  {
    auto& s = subs.back();
    s.app->add_option("--preset", s.values["preset"], "Named configuration, e.g. 1a-case1-desk");
    s.app->add_option("--model", s.values["model"], "1a 1b 1c 1d 2 3a 3b");
    s.app->add_option("--n", s.values["n"], "Sample size");
    s.app->add_option("--p", s.values["p"], "Predictor dimension");
    s.app->add_option("--rho", s.values["rho"], "AR(1) correlation of the design");
    s.app->add_option("--method", s.values["method"], "dcsis (default), sis, sirs or all");
    s.app->add_option("--reps", s.values["reps"], "Replications");
    add_common(s);
  }
  subs.push_back({Command::Converge, app.add_subcommand("converge", "Utility estimation error versus n"), {}, {}});
  {
    auto& s = subs.back();
    s.app->add_option("--preset", s.values["preset"], "Preset supplying the model and rho");
    s.app->add_option("--model", s.values["model"], "Model (default 1a); 'null' for independent noise");
    s.app->add_option("--p", s.values["p"], "Predictor dimension (default 50)");
    s.app->add_option("--rho", s.values["rho"], "AR(1) correlation of the design");
    s.app->add_option("--grid", s.values["grid"], "Comma-separated sample sizes (default 50,100,200,400)");
    s.app->add_option("--reps", s.values["reps"], "Seeds per grid point (default 20)");
    s.app->add_option("--reference-n", s.values["reference-n"], "Sample size of the reference utilities (default 20000)");
    add_common(s);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (auto& s : subs) {
      if (!s.app->parsed()) continue;
      Settings settings;
      for (const auto& [key, value] : s.values)
        if (s.app->count("--" + key) > 0) settings[key] = value;
      if (!s.config.empty()) {
        for (const auto& [key, value] : read_config_file(s.config)) {
          if (auto it = settings.find(key); it != settings.end() && it->second != value)
            err << "warning: config file overrides --" << key << "=" << it->second << " with " << value << "\n";
          settings[key] = value;
        }
      }
      const RunConfig cfg = resolve_config(s.command, settings);
      switch (cfg.command) {
        case Command::Screen: cmd_screen(cfg, err); break;
        case Command::Simulate: cmd_simulate(cfg, err); break;
        case Command::Converge: cmd_converge(cfg, err); break;
      }
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitOk;
}

}  // namespace dcscreen::cli
