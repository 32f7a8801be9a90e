// io.hpp - deterministic CSV/JSON serialization: run time series, run
// metadata, ensemble config parsing, ensemble summaries, and tidy
// plot-data tables.
//
// Format contracts (all byte-stable across platforms):
//   - CSV numbers: 12 significant digits via "%.12g", '.' decimal
//     separator, LF line endings.
//   - Time-series header: t_ps,t_scaled,S_chsh,S_bprv,entropy_bits,eof
//   - JSON: documents are emitted with fixed key order; doubles use the
//     shortest round-trip representation, so metadata coordinates
//     reconstruct the exact binary values.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dqdsim/ensemble.hpp"
#include "dqdsim/version.hpp"

namespace dqdsim::io {

using ordered_json = nlohmann::ordered_json;

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline constexpr const char* time_series_header =
    "t_ps,t_scaled,S_chsh,S_bprv,entropy_bits,eof";

inline std::string time_series_csv(const RunRecord& rec) {
  std::string out{time_series_header};
  out += '\n';
  for (std::size_t i = 0; i < rec.t_ps.size(); ++i) {
    out += format_number(rec.t_ps[i]);
    out += ',';
    out += format_number(rec.t_scaled[i]);
    out += ',';
    out += format_number(rec.s_chsh[i]);
    out += ',';
    out += format_number(rec.s_bprv[i]);
    out += ',';
    out += format_number(rec.entropy_bits[i]);
    out += ',';
    out += format_number(rec.eof[i]);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// --- enum <-> string ------------------------------------------------------

inline std::string to_string(InitialMode mode) {
  return mode == InitialMode::equatorial ? "equatorial" : "uniform-bloch";
}

inline InitialMode initial_mode_from_string(const std::string& s) {
  if (s == "equatorial") return InitialMode::equatorial;
  if (s == "uniform-bloch") return InitialMode::uniform_bloch;
  throw std::invalid_argument(
      "initial_mode: expected 'equatorial' or 'uniform-bloch', got '" + s + "'");
}

// --- geometry -------------------------------------------------------------

inline ordered_json to_json(const Vec3& v) {
  return ordered_json::array({v.x, v.y, v.z});
}

inline Vec3 vec3_from_json(const ordered_json& j) {
  if (!j.is_array() || j.size() != 3)
    throw std::invalid_argument("vec3: expected array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline ordered_json to_json(const DoubleDot& d) {
  return ordered_json{{"center_nm", to_json(d.center)},
                      {"axis", to_json(d.axis)},
                      {"dot_separation_nm", d.dot_separation}};
}

inline DoubleDot double_dot_from_json(const ordered_json& j) {
  DoubleDot d;
  d.center = vec3_from_json(j.at("center_nm"));
  d.axis = vec3_from_json(j.at("axis"));
  d.dot_separation = j.at("dot_separation_nm").get<double>();
  return d;
}

inline ordered_json to_json(const Geometry& g) {
  ordered_json env_a = ordered_json::array();
  for (const DoubleDot& d : g.env_a) env_a.push_back(to_json(d));
  ordered_json env_b = ordered_json::array();
  for (const DoubleDot& d : g.env_b) env_b.push_back(to_json(d));
  return ordered_json{{"radius_nm", g.radius},
                      {"seed", g.seed},
                      {"resample_count", g.resample_count},
                      {"target_a", to_json(g.target_a)},
                      {"target_b", to_json(g.target_b)},
                      {"env_a", env_a},
                      {"env_b", env_b}};
}

inline Geometry geometry_from_json(const ordered_json& j) {
  Geometry g;
  g.radius = j.at("radius_nm").get<double>();
  g.seed = j.at("seed").get<std::uint64_t>();
  g.resample_count = j.at("resample_count").get<int>();
  g.target_a = double_dot_from_json(j.at("target_a"));
  g.target_b = double_dot_from_json(j.at("target_b"));
  for (const ordered_json& d : j.at("env_a")) g.env_a.push_back(double_dot_from_json(d));
  for (const ordered_json& d : j.at("env_b")) g.env_b.push_back(double_dot_from_json(d));
  return g;
}

// --- run config / metadata ------------------------------------------------

inline ordered_json to_json(const BellSettings& s) {
  return ordered_json{
      {"chsh_angles_deg", {s.chsh_deg[0], s.chsh_deg[1], s.chsh_deg[2], s.chsh_deg[3]}},
      {"bprv_angles_deg", {s.bprv_deg[0], s.bprv_deg[1], s.bprv_deg[2]}}};
}

inline ordered_json to_json(const RunSpec& spec) {
  ordered_json j{{"a_nm", spec.a_nm},
                 {"r_over_a", spec.r_over_a},
                 {"n_env", spec.n_env},
                 {"seed", spec.seed},
                 {"t_max_tau", spec.t_max_tau},
                 {"n_steps", spec.n_steps},
                 {"mode", to_string(spec.mode)}};
  j.update(to_json(spec.settings));
  return j;
}

inline ordered_json to_json(const CharacteristicTimes& t) {
  return ordered_json{{"e_rms_a_ev", t.e_rms_a},
                      {"e_rms_b_ev", t.e_rms_b},
                      {"tau_a_ps", t.tau_a},
                      {"tau_b_ps", t.tau_b},
                      {"tau_e_ps", t.tau_e}};
}

// Full per-run metadata document.  The geometry block stores every
// coordinate at full precision, so the coupling table can be re-derived
// bit-exactly from this file alone.
inline ordered_json run_metadata_json(const RunRecord& rec) {
  ordered_json couplings = ordered_json::array();
  for (int r = 0; r < rec.couplings.n_sites; ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < rec.couplings.n_sites; ++c)
      row.push_back(rec.couplings.at(r, c));
    couplings.push_back(row);
  }
  ordered_json j{{"version", version},
                 {"config", to_json(rec.spec)},
                 {"geometry", to_json(rec.geometry)},
                 {"couplings_ev", couplings},
                 {"time_unit_ps", rec.time_unit_ps}};
  j["characteristic_times"] =
      rec.times ? to_json(*rec.times) : ordered_json(nullptr);
  return j;
}

// --- ensemble config ------------------------------------------------------

inline ordered_json to_json(const EnsembleSpec& spec) {
  ordered_json j{{"a_nm", spec.a_nm},
                 {"r_over_a", spec.r_over_a},
                 {"replicates", spec.replicates},
                 {"n_env", spec.n_env},
                 {"base_seed", spec.base_seed},
                 {"t_max_tau", spec.t_max_tau},
                 {"n_steps", spec.n_steps},
                 {"mode", to_string(spec.mode)},
                 {"workers", spec.workers}};
  j.update(to_json(spec.settings));
  return j;
}

// Parses an ensemble config document.  Every key is optional (defaults
// reproduce the 72-run experiment except base_seed = 1); unknown keys
// are rejected to catch typos.
inline EnsembleSpec ensemble_spec_from_json(const ordered_json& j) {
  if (!j.is_object())
    throw std::invalid_argument("ensemble config: expected a JSON object");
  static const char* known[] = {"a_nm",       "r_over_a",  "replicates",
                                "n_env",      "base_seed", "t_max_tau",
                                "n_steps",    "mode",      "chsh_angles_deg",
                                "bprv_angles_deg", "workers"};
  for (const auto& item : j.items()) {
    bool found = false;
    for (const char* k : known) found = found || item.key() == k;
    if (!found)
      throw std::invalid_argument("ensemble config: unknown key '" +
                                  item.key() + "'");
  }

  EnsembleSpec spec;
  if (j.contains("a_nm")) spec.a_nm = j["a_nm"].get<double>();
  if (j.contains("r_over_a"))
    spec.r_over_a = j["r_over_a"].get<std::vector<double>>();
  if (j.contains("replicates")) spec.replicates = j["replicates"].get<int>();
  if (j.contains("n_env")) spec.n_env = j["n_env"].get<int>();
  if (j.contains("base_seed"))
    spec.base_seed = j["base_seed"].get<std::uint64_t>();
  if (j.contains("t_max_tau")) spec.t_max_tau = j["t_max_tau"].get<double>();
  if (j.contains("n_steps")) spec.n_steps = j["n_steps"].get<int>();
  if (j.contains("mode"))
    spec.mode = initial_mode_from_string(j["mode"].get<std::string>());
  if (j.contains("chsh_angles_deg")) {
    const auto v = j["chsh_angles_deg"].get<std::vector<double>>();
    if (v.size() != 4)
      throw std::invalid_argument("ensemble config: chsh_angles_deg needs 4 values");
    std::copy(v.begin(), v.end(), spec.settings.chsh_deg.begin());
  }
  if (j.contains("bprv_angles_deg")) {
    const auto v = j["bprv_angles_deg"].get<std::vector<double>>();
    if (v.size() != 3)
      throw std::invalid_argument("ensemble config: bprv_angles_deg needs 3 values");
    std::copy(v.begin(), v.end(), spec.settings.bprv_deg.begin());
  }
  if (j.contains("workers")) spec.workers = j["workers"].get<int>();
  return spec;
}

// --- ensemble summary -----------------------------------------------------

inline ordered_json to_json(const FitResult& fit) {
  return ordered_json{{"tau_opt_over_tau_e", fit.tau_opt_over_tau_e},
                      {"residual_rms", fit.residual_rms},
                      {"crossing_chsh_scaled", fit.crossing_chsh},
                      {"crossing_bprv_scaled", fit.crossing_bprv}};
}

inline ordered_json to_json(const CrossingStats& st) {
  return ordered_json{{"mean_scaled", st.mean},
                      {"stddev_scaled", st.stddev},
                      {"n_crossed", st.n_crossed},
                      {"n_total", st.n_total}};
}

// Builds summary.json for an ensemble.  `run_file_stem(i)` names the
// per-run files recorded in the index (e.g. "run_017").
inline ordered_json summary_json(const EnsembleSpec& spec,
                                 const std::vector<RunOutcome>& outcomes) {
  const std::vector<const RunRecord*> recs = completed_records(outcomes);

  ordered_json runs = ordered_json::array();
  int n_failed = 0;
  for (const RunOutcome& o : outcomes) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "run_%03zu", o.index);
    ordered_json r{{"index", o.index},
                   {"r_over_a", o.spec.r_over_a},
                   {"seed", o.spec.seed},
                   {"ok", o.ok()}};
    if (o.ok()) {
      r["csv"] = std::string(stem) + ".csv";
      r["meta"] = std::string(stem) + ".meta.json";
      r["tau_e_ps"] = o.record->time_unit_ps;
      const auto cx = first_crossing_below(o.record->t_scaled,
                                           o.record->s_chsh,
                                           bell::chsh_local_bound);
      const auto bx = first_crossing_below(o.record->t_scaled,
                                           o.record->s_bprv,
                                           bell::bprv_local_bound);
      r["crossing_chsh_scaled"] = cx ? ordered_json(*cx) : ordered_json(nullptr);
      r["crossing_bprv_scaled"] = bx ? ordered_json(*bx) : ordered_json(nullptr);
    } else {
      r["error"] = o.error;
      ++n_failed;
    }
    runs.push_back(r);
  }

  ordered_json j{{"version", version},
                 {"config", to_json(spec)},
                 {"n_runs", outcomes.size()},
                 {"n_failed", n_failed},
                 {"runs", runs}};

  if (!recs.empty()) {
    j["fit_chsh"] = to_json(fit_gaussian(recs, BellObservable::chsh));
    j["fit_bprv"] = to_json(fit_gaussian(recs, BellObservable::bprv));
    j["crossings"] =
        ordered_json{{"chsh", to_json(crossing_stats(recs, BellObservable::chsh))},
                     {"bprv", to_json(crossing_stats(recs, BellObservable::bprv))}};
  }
  if (recs.size() >= 2) {
    const CollapseMetric m = collapse_metric(recs);
    j["collapse"] = ordered_json{{"grid_scaled", m.grid_scaled},
                                 {"spread_chsh", m.spread},
                                 {"max_spread_chsh", m.max_spread}};
  } else {
    j["collapse"] = ordered_json{{"note", "insufficient records"}};
  }
  return j;
}

// --- tidy plot data -------------------------------------------------------
//
// All plot files share the long format `series,x,y` so any plotting tool
// can facet or overlay by the series label.

inline void append_series_rows(std::string& out, const std::string& label,
                               const std::vector<double>& xs,
                               const std::vector<double>& ys) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out += label;
    out += ',';
    out += format_number(xs[i]);
    out += ',';
    out += format_number(ys[i]);
    out += '\n';
  }
}

inline std::string run_label(const RunOutcome& o) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "R/a=%g run=%03zu", o.spec.r_over_a, o.index);
  return buf;
}

// Unscaled S_CHSH bundles: one series per run, x in ps.
inline std::string plot_chsh_unscaled_csv(const std::vector<RunOutcome>& outcomes) {
  std::string out = "series,x,y\n";
  for (const RunOutcome& o : outcomes) {
    if (!o.ok()) continue;
    append_series_rows(out, run_label(o), o.record->t_ps, o.record->s_chsh);
  }
  return out;
}

// Scaled bundle for one Bell observable plus the pooled Gaussian-fit
// curve (200 points on [0, x_max]) and the local-realism threshold as a
// two-point constant series.
inline std::string plot_scaled_csv(const std::vector<RunOutcome>& outcomes,
                                   BellObservable obs, const FitResult& fit,
                                   double x_max = 5.0) {
  std::string out = "series,x,y\n";
  for (const RunOutcome& o : outcomes) {
    if (!o.ok()) continue;
    append_series_rows(out, run_label(o), o.record->t_scaled,
                       series_of(*o.record, obs));
  }

  const GaussianDecay model = decay_model(obs);
  std::vector<double> xs, ys;
  xs.reserve(200);
  ys.reserve(200);
  for (int i = 0; i < 200; ++i) {
    const double x = x_max * static_cast<double>(i) / 199.0;
    xs.push_back(x);
    ys.push_back(model(x, fit.tau_opt_over_tau_e));
  }
  append_series_rows(out, "gaussian-fit", xs, ys);

  const double bound = obs == BellObservable::chsh ? bell::chsh_local_bound
                                                   : bell::bprv_local_bound;
  append_series_rows(out, "threshold", {0.0, x_max}, {bound, bound});
  return out;
}

// Entropy and EoF curves vs scaled time, labeled per run.
inline std::string plot_entropy_eof_csv(const std::vector<RunOutcome>& outcomes) {
  std::string out = "series,x,y\n";
  for (const RunOutcome& o : outcomes) {
    if (!o.ok()) continue;
    append_series_rows(out, "entropy " + run_label(o), o.record->t_scaled,
                       o.record->entropy_bits);
  }
  for (const RunOutcome& o : outcomes) {
    if (!o.ok()) continue;
    append_series_rows(out, "eof " + run_label(o), o.record->t_scaled,
                       o.record->eof);
  }
  return out;
}

}  // namespace dqdsim::io
