#pragma once

// Per-sample observables and their NDJSON / CSV serialization.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bh/energies.hpp"
#include "bh/experiments.hpp"
#include "bh/linearized.hpp"
#include "bh/solver.hpp"

namespace bh {

/// Bumped whenever a serialized field is renamed, added or removed.
inline constexpr int kSchemaVersion = 1;

struct DiagnosticsRecord {
  double t = 0.0;
  double l2_norm = 0.0;
  std::vector<std::pair<unsigned, double>> hk_norms;  ///< (k, ‖u‖_{H^k}), coefficient-normalized
  double max_slope = 0.0;
  std::vector<EnergyReport> energies;
  std::optional<LinEnergyReport> lin;
  double tail_fraction = 0.0;
  double dt = 0.0;
};

inline DiagnosticsRecord make_record(const SolverState& s, const std::vector<unsigned>& ks) {
  DiagnosticsRecord r;
  r.t = s.t;
  r.l2_norm = l2_norm(s.u);
  r.max_slope = max_abs(derivative(s.u, 1));
  r.tail_fraction = s.tail_fraction;
  r.dt = s.last_dt;
  for (unsigned k : ks) {
    r.hk_norms.emplace_back(k, sobolev_norm(s.u, static_cast<double>(k)));
    r.energies.push_back(modified_energy(s.u, k));
  }
  return r;
}

inline DiagnosticsRecord make_record(const LinearizedState& s, const std::vector<unsigned>& ks, double dt) {
  SolverState background{s.t, s.u, dt, tail_fraction(to_spectrum(s.u))};
  DiagnosticsRecord r = make_record(background, ks);
  r.lin = linearized_energy(s.u, s.w);
  return r;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json to_json(const EnergyReport& e) {
  return {{"k", e.k},           {"standard", e.standard}, {"modified", e.modified},
          {"correction", e.correction}, {"ratio", e.ratio},       {"hux_inf", e.hux_inf}};
}

inline nlohmann::ordered_json to_json(const LinEnergyReport& l) {
  return {{"form_a", l.form_a}, {"form_b", l.form_b}, {"l2", l.l2}};
}

inline nlohmann::ordered_json to_json(const DiagnosticsRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["l2_norm"] = r.l2_norm;
  nlohmann::ordered_json hk = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.hk_norms) hk[std::to_string(k)] = v;
  j["hk_norms"] = hk;
  j["max_slope"] = r.max_slope;
  j["energies"] = nlohmann::ordered_json::array();
  for (const auto& e : r.energies) j["energies"].push_back(to_json(e));
  j["lin"] = r.lin ? to_json(*r.lin) : nlohmann::ordered_json(nullptr);
  j["tail_fraction"] = r.tail_fraction;
  j["dt"] = r.dt;
  return j;
}

inline nlohmann::ordered_json to_json(const PowerLawFit& f) {
  return {{"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}};
}

inline nlohmann::ordered_json to_json(const std::optional<PowerLawFit>& f) {
  return f ? to_json(*f) : nlohmann::ordered_json(nullptr);
}

inline nlohmann::ordered_json to_json(const BreakdownVerdict& v) {
  return {{"broke_down", v.broke_down},
          {"t_break", v.broke_down ? nlohmann::ordered_json(v.t_break) : nlohmann::ordered_json(nullptr)},
          {"cause", std::string(to_string(v.cause))}};
}

inline nlohmann::ordered_json summary_json(const SweepResult& r) {
  nlohmann::ordered_json j;
  j["kind"] = "sweep_summary";
  j["fit"] = to_json(r.fit);
  j["fit_2n"] = to_json(r.fit_2n);
  j["uncensored"] = std::count_if(r.entries.begin(), r.entries.end(), [](const auto& e) { return !e.censored(); });
  j["warnings"] = r.warnings;
  return j;
}

inline nlohmann::ordered_json summary_json(const ScalingStudy& s) {
  nlohmann::ordered_json j;
  j["kind"] = "study_summary";
  j["quantity"] = std::string(to_string(s.quantity));
  j["fit"] = to_json(s.fit);
  j["expected"] = s.expected;
  j["tolerance"] = s.tolerance;
  j["within_band"] = s.within_band();
  j["warnings"] = s.warnings;
  return j;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {
inline std::string csv_number(double v) {
  if (!std::isfinite(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
}  // namespace detail

/// Columns eps,t_break,cause,n,t_break_2n; censored times are written as nan.
inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "eps,t_break,cause,n,t_break_2n\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : r.entries) {
    os << detail::csv_number(e.eps) << ',' << detail::csv_number(e.censored() ? nan : e.verdict.t_break) << ','
       << to_string(e.verdict.cause) << ',' << e.n << ','
       << detail::csv_number(e.censored_2n() ? nan : e.verdict_2n.t_break) << '\n';
  }
}

/// Columns quantity,eps,drift.
inline void write_study_csv(std::ostream& os, const std::vector<ScalingStudy>& studies) {
  os << "quantity,eps,drift\n";
  for (const auto& s : studies) {
    for (const auto& [eps, drift] : s.pairs) {
      os << to_string(s.quantity) << ',' << detail::csv_number(eps) << ',' << detail::csv_number(drift) << '\n';
    }
  }
}

}  // namespace bh
