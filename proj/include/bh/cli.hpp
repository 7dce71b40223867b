#pragma once

// Command-line front end: configuration, subcommands and output files.
//
//   bh verify    identity battery, exit 1 if any check fails
//   bh simulate  stream of diagnostics records
//   bh sweep     breakdown times over an amplitude list
//   bh study     drift-rate exponents over an amplitude list
//   bh stability growth of the linearized solution along u

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bh/diagnostics.hpp"
#include "bh/experiments.hpp"
#include "bh/linearized.hpp"
#include "bh/solver.hpp"
#include "bh/verify.hpp"

namespace bh::cli {

enum class OutputFormat { ndjson, csv };

inline constexpr std::uint64_t kDefaultSeed = 7;

struct RunConfig {
  std::string command;
  EvolutionConfig evolution;
  std::vector<double> eps_list;
  std::vector<unsigned> k_list;
  std::uint64_t seed = kDefaultSeed;
  std::string output_path;  ///< empty: standard output
  OutputFormat output_format = OutputFormat::ndjson;
  std::string profile;  ///< empty: per-command default
  unsigned jobs = 1;

  void validate() const {
    static const std::vector<std::string> commands = {"verify", "simulate", "sweep", "study", "stability"};
    if (std::find(commands.begin(), commands.end(), command) == commands.end()) {
      throw ConfigError("command: unknown command '" + command + "'");
    }
    evolution.validate();
    for (double e : eps_list) {
      if (!std::isfinite(e) || e < 0.0) throw ConfigError("eps_list: amplitudes must be finite and non-negative");
    }
    for (unsigned k : k_list) {
      if (k > evolution.n / 4) throw ConfigError("k_list: order " + std::to_string(k) + " exceeds n/4");
    }
    if (jobs == 0) throw ConfigError("jobs: must be at least 1");
    if (!profile.empty()) profile_by_name(profile);
  }
};

inline std::string_view to_string(OutputFormat f) { return f == OutputFormat::csv ? "csv" : "ndjson"; }

// ---------------------------------------------------------------------------
// Key-value parsing shared by the config file and the flags.

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  if (pos != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range '" + v + "'");
  }
}

inline bool parse_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected on|off, got '" + v + "'");
}

template <class F>
auto parse_list(const std::string& key, const std::string& v, F&& item) {
  std::vector<decltype(item(key, v))> out;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (part.empty()) throw ConfigError(key + ": empty list element");
    out.push_back(item(key, part));
  }
  return out;
}

}  // namespace detail

/// Config keys, in serialization order.
inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "command",   "n",      "hilbert_term", "cfl",         "t_max",         "sample_dt",
      "breakdown_slope_factor", "tail_fraction_max", "hyperviscosity", "eps_list", "k_list",
      "seed",      "output_path", "output_format", "profile", "jobs"};
  return keys;
}

inline void set_key(RunConfig& cfg, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  auto& e = cfg.evolution;
  if (key == "command") {
    cfg.command = v;
  } else if (key == "n") {
    e.n = parse_unsigned(key, v);
  } else if (key == "hilbert_term") {
    e.hilbert_term = parse_switch(key, v);
  } else if (key == "cfl") {
    e.cfl = parse_double(key, v);
  } else if (key == "t_max") {
    e.t_max = parse_double(key, v);
  } else if (key == "sample_dt") {
    e.sample_dt = parse_double(key, v);
  } else if (key == "breakdown_slope_factor") {
    e.breakdown_slope_factor = parse_double(key, v);
  } else if (key == "tail_fraction_max") {
    e.tail_fraction_max = parse_double(key, v);
  } else if (key == "hyperviscosity") {
    e.hyperviscosity = parse_double(key, v);
  } else if (key == "eps_list") {
    cfg.eps_list = parse_list(key, v, parse_double);
  } else if (key == "k_list") {
    cfg.k_list.clear();
    for (auto k : parse_list(key, v, parse_unsigned)) cfg.k_list.push_back(static_cast<unsigned>(k));
  } else if (key == "seed") {
    cfg.seed = parse_unsigned(key, v);
  } else if (key == "output_path") {
    cfg.output_path = v;
  } else if (key == "output_format") {
    if (v == "ndjson") {
      cfg.output_format = OutputFormat::ndjson;
    } else if (v == "csv") {
      cfg.output_format = OutputFormat::csv;
    } else {
      throw ConfigError(key + ": expected ndjson|csv, got '" + v + "'");
    }
  } else if (key == "profile") {
    profile_by_name(v);
    cfg.profile = v;
  } else if (key == "jobs") {
    cfg.jobs = static_cast<unsigned>(parse_unsigned(key, v));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

/// Flat `key = value` lines; `#` starts a comment.
inline void load_config(RunConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value, got '" + line + "'");
    }
    set_key(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  load_config(cfg, in);
}

/// Per-command defaults for settings left unset.
inline void apply_defaults(RunConfig& cfg) {
  if (cfg.eps_list.empty()) {
    if (cfg.command == "sweep") {
      for (int i = 0; i < 5; ++i) cfg.eps_list.push_back(0.1 * std::pow(4.0, i / 4.0));
    } else if (cfg.command == "study") {
      cfg.eps_list = {0.025, 0.05, 0.1, 0.2};
    } else {
      cfg.eps_list = {0.1};
    }
  }
  if (cfg.k_list.empty()) cfg.k_list = cfg.command == "study" ? std::vector<unsigned>{2} : std::vector<unsigned>{1, 2};
  if (cfg.profile.empty()) cfg.profile = cfg.command == "study" ? "random:1" : "sin";
}

inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
  const auto& e = cfg.evolution;
  nlohmann::ordered_json j;
  j["command"] = cfg.command;
  j["n"] = e.n;
  j["hilbert_term"] = e.hilbert_term;
  j["cfl"] = e.cfl;
  j["t_max"] = e.t_max;
  j["sample_dt"] = e.sample_dt;
  j["breakdown_slope_factor"] = e.breakdown_slope_factor;
  j["tail_fraction_max"] = e.tail_fraction_max;
  j["hyperviscosity"] = e.hyperviscosity;
  j["eps_list"] = cfg.eps_list;
  j["k_list"] = cfg.k_list;
  j["seed"] = cfg.seed;
  j["output_path"] = cfg.output_path;
  j["output_format"] = std::string(to_string(cfg.output_format));
  j["profile"] = cfg.profile;
  j["jobs"] = cfg.jobs;
  return j;
}

inline nlohmann::ordered_json header_json(const RunConfig& cfg) {
  return {{"kind", "header"}, {"schema_version", kSchemaVersion}, {"config", to_json(cfg)}};
}

/// `# key=value` lines heading a CSV file.
inline void write_csv_header(std::ostream& os, const RunConfig& cfg) {
  os << "# schema_version=" << kSchemaVersion << '\n';
  const auto j = to_json(cfg);
  for (const auto& [key, value] : j.items()) {
    os << "# " << key << '=';
    if (value.is_string()) {
      os << value.get<std::string>();
    } else if (value.is_array()) {
      std::string sep;
      for (const auto& x : value) os << std::exchange(sep, ",") << x.dump();
    } else {
      os << value.dump();
    }
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Subcommands

namespace detail {

inline void line(std::ostream& os, const nlohmann::ordered_json& j) { os << j.dump() << '\n'; }

struct Streams {
  std::ostream* data;     ///< result file, or stdout
  std::ostream* summary;  ///< human-readable summary: stdout with a result file, else stderr
  std::unique_ptr<std::ofstream> file;
};

inline Streams open_output(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Streams s{&out, &err, nullptr};
  if (!cfg.output_path.empty()) {
    s.file = std::make_unique<std::ofstream>(cfg.output_path, std::ios::binary);
    if (!*s.file) throw ConfigError("output_path: cannot write '" + cfg.output_path + "'");
    s.data = s.file.get();
    s.summary = &out;
  }
  return s;
}

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

inline std::string fmt_fit(const std::optional<PowerLawFit>& f) {
  return f ? "slope " + fmt(f->slope, 4) + " (r2 " + fmt(f->r2, 4) + ")" : "unavailable";
}

inline int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto report = run_identity_suite(cfg.evolution.n, cfg.seed);
  std::ostream& summary = out;
  std::unique_ptr<std::ofstream> file;
  if (!cfg.output_path.empty()) {
    file = std::make_unique<std::ofstream>(cfg.output_path, std::ios::binary);
    if (!*file) throw ConfigError("output_path: cannot write '" + cfg.output_path + "'");
    line(*file, header_json(cfg));
    for (const auto& c : report.checks) {
      line(*file, {{"kind", "check"}, {"name", c.name}, {"residual", c.residual},
                   {"tolerance", c.tolerance}, {"passed", c.passed()}});
    }
    for (const auto& r : report.recorded) line(*file, {{"kind", "recorded"}, {"name", r.name}, {"value", r.value}});
    line(*file, {{"kind", "verify_summary"}, {"checks", report.checks.size()}, {"passed", report.passed()}});
  }
  for (const auto& c : report.checks) {
    summary << (c.passed() ? "  ok    " : "  FAIL  ") << std::left << std::setw(44) << c.name << std::right
            << std::scientific << std::setprecision(2) << c.residual << std::defaultfloat << '\n';
  }
  for (const auto& r : report.recorded) summary << "  info  " << r.name << " = " << fmt(r.value) << '\n';
  summary << report.passed() << "/" << report.checks.size() << " identity checks passed (n=" << report.n
          << ", seed=" << report.seed << ")\n";
  if (!report.all_passed()) err << "verify: " << report.checks.size() - report.passed() << " check(s) failed\n";
  return report.all_passed() ? 0 : 1;
}

inline int run_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.eps_list.size() != 1) throw ConfigError("eps_list: simulate takes exactly one amplitude");
  const double eps = cfg.eps_list.front();
  auto io = open_output(cfg, out, err);
  std::ostream& data = *io.data;
  const bool csv = cfg.output_format == OutputFormat::csv;
  if (csv) {
    write_csv_header(data, cfg);
    data << "t,l2_norm,max_slope,tail_fraction,dt\n";
  } else {
    line(data, header_json(cfg));
  }
  const GridField u0 = profile_by_name(cfg.profile).sample(cfg.evolution.n, eps);
  const auto [final_state, verdict] = simulate(u0, cfg.evolution, [&](const SolverState& s) {
    const auto r = make_record(s, cfg.k_list);
    if (csv) {
      data << bh::detail::csv_number(r.t) << ',' << bh::detail::csv_number(r.l2_norm) << ',' << bh::detail::csv_number(r.max_slope) << ','
           << bh::detail::csv_number(r.tail_fraction) << ',' << bh::detail::csv_number(r.dt) << '\n';
    } else {
      line(data, bh::to_json(r));
    }
  });
  if (!csv) line(data, {{"kind", "simulate_summary"}, {"t_end", final_state.t}, {"verdict", bh::to_json(verdict)}});
  *io.summary << "simulate: eps=" << eps << " reached t=" << fmt(final_state.t)
              << (verdict.broke_down ? " (breakdown: " + std::string(bh::to_string(verdict.cause)) + ")" : "")
              << '\n';
  return 0;
}

inline nlohmann::ordered_json entry_json(const SweepEntry& e) {
  return {{"kind", "sweep_entry"}, {"eps", e.eps}, {"n", e.n}, {"t_max", e.t_max},
          {"verdict", bh::to_json(e.verdict)}, {"verdict_2n", bh::to_json(e.verdict_2n)}};
}

inline int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  SweepOptions options;
  options.jobs = cfg.jobs;
  const auto result = lifespan_sweep(cfg.eps_list, profile_by_name(cfg.profile), cfg.evolution, options);
  auto io = open_output(cfg, out, err);
  if (cfg.output_format == OutputFormat::csv) {
    write_csv_header(*io.data, cfg);
    write_sweep_csv(*io.data, result);
    if (!cfg.output_path.empty()) {
      std::ofstream summary(cfg.output_path + ".summary.ndjson", std::ios::binary);
      if (!summary) throw ConfigError("output_path: cannot write summary next to '" + cfg.output_path + "'");
      line(summary, header_json(cfg));
      line(summary, summary_json(result));
    }
  } else {
    line(*io.data, header_json(cfg));
    for (const auto& e : result.entries) line(*io.data, entry_json(e));
    line(*io.data, summary_json(result));
  }
  auto& s = *io.summary;
  for (const auto& e : result.entries) {
    s << "  eps=" << fmt(e.eps, 5) << "  t_break=" << (e.censored() ? "censored" : fmt(e.verdict.t_break))
      << "  t_break_2n=" << (e.censored_2n() ? "censored" : fmt(e.verdict_2n.t_break)) << '\n';
  }
  s << "sweep fit: " << fmt_fit(result.fit) << ", 2n: " << fmt_fit(result.fit_2n) << '\n';
  for (const auto& w : result.warnings) s << "  warning: " << w << '\n';
  return 0;
}

inline int run_study(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  DriftOptions options;
  options.k = cfg.k_list.front();
  const Profile profile = profile_by_name(cfg.profile);
  std::vector<ScalingStudy> studies;
  for (auto q : {DriftQuantity::modified_energy, DriftQuantity::standard_energy, DriftQuantity::lin_energy,
                 DriftQuantity::lin_l2}) {
    studies.push_back(energy_drift_study(cfg.eps_list, profile, q, cfg.evolution, options));
  }
  constexpr std::size_t kSamples = 500;
  const auto c = equivalence_constant(cfg.evolution.n, kSamples, cfg.seed, options.k);
  const nlohmann::ordered_json c_json = {{"kind", "equivalence_constant"}, {"k", options.k},
                                         {"n", cfg.evolution.n},          {"samples", c.samples},
                                         {"seed", cfg.seed},              {"max", c.max},
                                         {"mean", c.mean}};

  auto io = open_output(cfg, out, err);
  if (cfg.output_format == OutputFormat::csv) {
    write_csv_header(*io.data, cfg);
    write_study_csv(*io.data, studies);
    if (!cfg.output_path.empty()) {
      std::ofstream summary(cfg.output_path + ".summary.ndjson", std::ios::binary);
      if (!summary) throw ConfigError("output_path: cannot write summary next to '" + cfg.output_path + "'");
      line(summary, header_json(cfg));
      for (const auto& st : studies) line(summary, summary_json(st));
      line(summary, c_json);
    }
  } else {
    line(*io.data, header_json(cfg));
    for (const auto& st : studies) {
      auto j = summary_json(st);
      j["pairs"] = st.pairs;
      line(*io.data, j);
    }
    line(*io.data, c_json);
  }
  auto& s = *io.summary;
  for (const auto& st : studies) {
    s << "  " << std::left << std::setw(24) << bh::to_string(st.quantity) << std::right << fmt_fit(st.fit)
      << "  expected " << st.expected << " +- " << st.tolerance << (st.within_band() ? "  in band" : "  OUT of band")
      << '\n';
    for (const auto& w : st.warnings) s << "    warning: " << w << '\n';
  }
  s << "  equivalence constant k=" << options.k << ": max " << fmt(c.max, 4) << " over " << c.samples
    << " fields\n";
  return 0;
}

inline int run_stability(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.eps_list.size() != 1) throw ConfigError("eps_list: stability takes exactly one amplitude");
  const double eps = cfg.eps_list.front();
  EvolutionConfig evo = cfg.evolution;
  if (eps > 0.0) evo.t_max = 1.0 / (eps * eps);
  const GridField u0 = profile_by_name(cfg.profile).sample(evo.n, eps);
  const GridField w0 = profile_by_name("cos2").sample(evo.n);

  auto io = open_output(cfg, out, err);
  std::ostream& data = *io.data;
  const bool csv = cfg.output_format == OutputFormat::csv;
  if (csv) {
    write_csv_header(data, cfg);
    data << "t,l2_norm,w_l2,lin_form_a,lin_form_b\n";
  } else {
    line(data, header_json(cfg));
  }
  CoSimulation sim(u0, w0, evo);
  double w0_norm = -1.0;
  double growth = 1.0;
  const auto [final_state, verdict] = sim.run([&](const LinearizedState& s) {
    const auto r = make_record(s, cfg.k_list, sim.last_dt());
    const double w_l2 = std::sqrt(r.lin->l2);
    if (w0_norm < 0.0) w0_norm = w_l2;
    if (w0_norm > 0.0) growth = std::max(growth, w_l2 / w0_norm);
    if (csv) {
      data << bh::detail::csv_number(r.t) << ',' << bh::detail::csv_number(r.l2_norm) << ',' << bh::detail::csv_number(w_l2) << ','
           << bh::detail::csv_number(r.lin->form_a) << ',' << bh::detail::csv_number(r.lin->form_b) << '\n';
    } else {
      line(data, bh::to_json(r));
    }
  });
  if (!csv) {
    line(data, {{"kind", "stability_summary"}, {"eps", eps}, {"max_growth", growth}, {"t_end", final_state.t},
                {"verdict", bh::to_json(verdict)}});
  }
  *io.summary << "stability: eps=" << eps << " max |w(t)|/|w(0)| = " << fmt(growth, 5) << " up to t=" << fmt(final_state.t)
              << (verdict.broke_down ? " (background breakdown)" : "") << '\n';
  return 0;
}

}  // namespace detail

/// Flag name → config key for every option shared by the subcommands.
inline const std::vector<std::pair<std::string, std::string>>& flag_keys() {
  static const std::vector<std::pair<std::string, std::string>> flags = {
      {"--n", "n"},
      {"--hilbert", "hilbert_term"},
      {"--cfl", "cfl"},
      {"--t-max", "t_max"},
      {"--sample-dt", "sample_dt"},
      {"--breakdown-slope-factor", "breakdown_slope_factor"},
      {"--tail-fraction-max", "tail_fraction_max"},
      {"--hyperviscosity", "hyperviscosity"},
      {"--eps", "eps_list"},
      {"--k", "k_list"},
      {"--seed", "seed"},
      {"--output", "output_path"},
      {"--format", "output_format"},
      {"--profile", "profile"},
      {"--jobs", "jobs"},
  };
  return flags;
}

/// Resolution order for every key: flag, then (seed only) BH_SEED, then the
/// config file, then the default.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Burgers-Hilbert pseudospectral simulator"};
  app.require_subcommand(1);
  struct Sub {
    CLI::App* app = nullptr;
    std::string config_path;
    std::map<std::string, std::string> values;
  };
  std::vector<std::unique_ptr<Sub>> subs;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"verify", "run the identity and property battery"},
      {"simulate", "evolve one initial amplitude and stream diagnostics"},
      {"sweep", "breakdown times over amplitudes, at n and 2n"},
      {"study", "energy drift rates over amplitudes"},
      {"stability", "growth of the linearized solution along a background"},
  };
  for (const auto& [name, description] : commands) {
    auto sub = std::make_unique<Sub>();
    sub->app = app.add_subcommand(name, description);
    sub->app->add_option("--config", sub->config_path, "flat key = value config file");
    for (const auto& [flag, key] : flag_keys()) sub->app->add_option(flag, sub->values[key], key);
    subs.push_back(std::move(sub));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    const Sub* chosen = nullptr;
    for (const auto& s : subs) {
      if (s->app->parsed()) chosen = s.get();
    }
    RunConfig cfg;
    if (!chosen->config_path.empty()) load_config_file(cfg, chosen->config_path);
    cfg.command = chosen->app->get_name();
    if (const char* env = std::getenv("BH_SEED"); env != nullptr && *env != '\0') set_key(cfg, "seed", env);
    for (const auto& [flag, key] : flag_keys()) {
      if (chosen->app->get_option(flag)->count() > 0) set_key(cfg, key, chosen->values.at(key));
    }
    apply_defaults(cfg);
    cfg.validate();

    if (cfg.command == "verify") return detail::run_verify(cfg, out, err);
    if (cfg.command == "simulate") return detail::run_simulate(cfg, out, err);
    if (cfg.command == "sweep") return detail::run_sweep(cfg, out, err);
    if (cfg.command == "study") return detail::run_study(cfg, out, err);
    return detail::run_stability(cfg, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace bh::cli
