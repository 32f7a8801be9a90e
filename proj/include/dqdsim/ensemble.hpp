// ensemble.hpp - single runs, multi-geometry ensembles, scaled-time
// collapse diagnostics, Gaussian fits, and threshold crossings.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dqdsim/constants.hpp"
#include "dqdsim/electrostatics.hpp"
#include "dqdsim/fit.hpp"
#include "dqdsim/geometry.hpp"
#include "dqdsim/observables.hpp"
#include "dqdsim/quantum.hpp"
#include "dqdsim/rng.hpp"

namespace dqdsim {

// Parameters of one run.  The time grid is specified in units of the
// run's own tau_E (so different geometries sample comparable dynamics)
// and converted to ps once tau_E is known.
struct RunSpec {
  double a_nm = 1.0;
  double r_over_a = 3.0;
  int n_env = 10;
  std::uint64_t seed = 0;
  double t_max_tau = 10.0;  // grid end, in time units
  int n_steps = 500;        // grid points including both endpoints
  InitialMode mode = InitialMode::equatorial;
  BellSettings settings;
};

// Human-readable constraint violations; empty means valid.
inline std::vector<std::string> validate(const RunSpec& spec) {
  std::vector<std::string> bad;
  if (!(spec.a_nm > 0.0)) bad.push_back("a_nm must be > 0");
  if (spec.n_env < 0 || spec.n_env % 2 != 0)
    bad.push_back("n_env must be even and >= 0");
  if (spec.n_env > 0 && !(spec.r_over_a >= 2.0))
    bad.push_back("r_over_a must be >= 2 (overlap guard)");
  if (!(spec.t_max_tau > 0.0)) bad.push_back("t_max_tau must be > 0");
  if (spec.n_steps < 2) bad.push_back("n_steps must be >= 2");
  return bad;
}

// One completed run: the sampled system, its derived tables, and the
// time series of all observables.
struct RunRecord {
  RunSpec spec;
  Geometry geometry;
  CouplingTable couplings;
  std::optional<CharacteristicTimes> times;  // absent when n_env == 0
  double time_unit_ps = 1.0;                 // tau_E, or 1 ps when n_env == 0

  std::vector<double> t_ps;
  std::vector<double> t_scaled;  // t_ps / time_unit_ps
  std::vector<double> s_chsh;
  std::vector<double> s_bprv;
  std::vector<double> entropy_bits;
  std::vector<double> eof;
};

// Full pipeline for one seed: geometry -> couplings -> energies ->
// initial state -> evolve/reduce/measure at each grid time.  All
// stochastic draws come from one stream seeded with spec.seed, in the
// order: geometry (see sample_geometry), then initial phases (see
// sample_initial_spec).
inline RunRecord run_single(const RunSpec& spec) {
  if (const auto bad = validate(spec); !bad.empty()) {
    std::ostringstream msg;
    msg << "run_single: invalid config:";
    for (const std::string& b : bad) msg << ' ' << b << ';';
    throw std::invalid_argument(msg.str());
  }

  RunRecord rec;
  rec.spec = spec;

  RandomStream rng(spec.seed);
  rec.geometry =
      sample_geometry(spec.a_nm, spec.a_nm * spec.r_over_a, spec.n_env, rng);
  rec.geometry.seed = spec.seed;
  rec.couplings = build_coupling_table(rec.geometry);
  const EnergyTable energies = build_energy_table(rec.couplings);

  // With no environment there is no dephasing scale; fall back to 1 ps
  // so the grid stays well defined.
  if (spec.n_env > 0) {
    rec.times = characteristic_times(rec.couplings);
    rec.time_unit_ps = rec.times->tau_e;
  } else {
    rec.time_unit_ps = 1.0;
  }

  const InitialStateSpec init = sample_initial_spec(spec.n_env, spec.mode, rng);
  const StateVector psi0 = build_initial_state(spec.n_env, init);

  const int n = spec.n_steps;
  rec.t_ps.reserve(n);
  rec.t_scaled.reserve(n);
  rec.s_chsh.reserve(n);
  rec.s_bprv.reserve(n);
  rec.entropy_bits.reserve(n);
  rec.eof.reserve(n);
  const double t_end_ps = spec.t_max_tau * rec.time_unit_ps;
  for (int i = 0; i < n; ++i) {
    const double t = t_end_ps * static_cast<double>(i) / (n - 1);
    const StateVector psi = evolve(psi0, energies, t);
    const Matrix4c rho = reduce_to_pair(psi);
    rec.t_ps.push_back(t);
    rec.t_scaled.push_back(t / rec.time_unit_ps);
    rec.s_chsh.push_back(chsh_correlator(rho, spec.settings));
    rec.s_bprv.push_back(bprv_correlator(rho, spec.settings));
    rec.entropy_bits.push_back(von_neumann_entropy(rho));
    rec.eof.push_back(entanglement_of_formation(rho));
  }
  return rec;
}

// Ensemble sweep: every (r_over_a value) x (replicate) pair becomes one
// run whose seed is derived from base_seed and the run index.
struct EnsembleSpec {
  double a_nm = 1.0;
  std::vector<double> r_over_a{2.5, 3.0, 3.5, 4.0, 5.0, 7.0};
  int replicates = 12;
  int n_env = 10;
  std::uint64_t base_seed = 1;
  double t_max_tau = 10.0;
  int n_steps = 500;
  InitialMode mode = InitialMode::equatorial;
  BellSettings settings;
  int workers = 0;  // 0 = hardware concurrency
};

inline std::vector<std::string> validate(const EnsembleSpec& spec) {
  RunSpec probe;
  probe.a_nm = spec.a_nm;
  probe.n_env = spec.n_env;
  probe.t_max_tau = spec.t_max_tau;
  probe.n_steps = spec.n_steps;
  probe.r_over_a = spec.r_over_a.empty() ? 3.0 : spec.r_over_a.front();
  std::vector<std::string> bad = validate(probe);
  if (spec.r_over_a.empty()) bad.push_back("r_over_a list must be nonempty");
  for (double r : spec.r_over_a)
    if (spec.n_env > 0 && !(r >= 2.0)) {
      bad.push_back("every r_over_a must be >= 2 (overlap guard)");
      break;
    }
  if (spec.replicates < 1) bad.push_back("replicates must be >= 1");
  if (spec.workers < 0) bad.push_back("workers must be >= 0");
  return bad;
}

inline RunSpec member_spec(const EnsembleSpec& spec, std::size_t index) {
  const std::size_t rep = static_cast<std::size_t>(spec.replicates);
  RunSpec rs;
  rs.a_nm = spec.a_nm;
  rs.r_over_a = spec.r_over_a[index / rep];
  rs.n_env = spec.n_env;
  rs.seed = derive_seed(spec.base_seed, index);
  rs.t_max_tau = spec.t_max_tau;
  rs.n_steps = spec.n_steps;
  rs.mode = spec.mode;
  rs.settings = spec.settings;
  return rs;
}

// Result slot for one ensemble member; `record` is empty if the run
// threw, with the message kept in `error`.
struct RunOutcome {
  std::size_t index = 0;
  RunSpec spec;
  std::optional<RunRecord> record;
  std::string error;

  bool ok() const { return record.has_value(); }
};

inline std::vector<RunOutcome> run_ensemble(const EnsembleSpec& spec) {
  if (const auto bad = validate(spec); !bad.empty()) {
    std::ostringstream msg;
    msg << "run_ensemble: invalid config:";
    for (const std::string& b : bad) msg << ' ' << b << ';';
    throw std::invalid_argument(msg.str());
  }

  const std::size_t n_runs =
      spec.r_over_a.size() * static_cast<std::size_t>(spec.replicates);
  std::vector<RunOutcome> out(n_runs);
  for (std::size_t i = 0; i < n_runs; ++i) {
    out[i].index = i;
    out[i].spec = member_spec(spec, i);
  }

  unsigned n_workers = spec.workers > 0
                           ? static_cast<unsigned>(spec.workers)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(n_runs));

  std::atomic<std::size_t> next{0};
  auto worker = [&out, &next, n_runs]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_runs) return;
      try {
        out[i].record = run_single(out[i].spec);
      } catch (const std::exception& e) {
        out[i].error = e.what();
      }
    }
  };

  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return out;
}

inline std::vector<const RunRecord*> completed_records(
    const std::vector<RunOutcome>& outcomes) {
  std::vector<const RunRecord*> recs;
  recs.reserve(outcomes.size());
  for (const RunOutcome& o : outcomes)
    if (o.ok()) recs.push_back(&*o.record);
  return recs;
}

enum class BellObservable { chsh, bprv };

inline const std::vector<double>& series_of(const RunRecord& rec,
                                            BellObservable obs) {
  return obs == BellObservable::chsh ? rec.s_chsh : rec.s_bprv;
}

// Piecewise-linear interpolation on a strictly increasing grid; clamps
// outside the covered range.
inline double linear_interp(const std::vector<double>& xs,
                            const std::vector<double>& ys, double x) {
  if (xs.empty() || xs.size() != ys.size())
    throw std::invalid_argument("linear_interp: bad table");
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return ys[i - 1] + w * (ys[i] - ys[i - 1]);
}

// Earliest x at which ys first drops below `threshold`, linearly
// interpolated between samples; empty if it never does.
inline std::optional<double> first_crossing_below(const std::vector<double>& xs,
                                                  const std::vector<double>& ys,
                                                  double threshold) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("first_crossing_below: bad table");
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] < threshold) {
      if (i == 0) return xs[0];
      const double w = (ys[i - 1] - threshold) / (ys[i - 1] - ys[i]);
      return xs[i - 1] + w * (xs[i] - xs[i - 1]);
    }
  }
  return std::nullopt;
}

// Per-record first crossings of the local-realism bound (2 for CHSH,
// 7 for BPRV) in scaled time, aggregated as mean +/- stddev.
struct CrossingStats {
  double mean = 0.0;
  double stddev = 0.0;
  int n_crossed = 0;
  int n_total = 0;
};

inline CrossingStats crossing_stats(const std::vector<const RunRecord*>& recs,
                                    BellObservable obs) {
  const double threshold = obs == BellObservable::chsh
                               ? bell::chsh_local_bound
                               : bell::bprv_local_bound;
  CrossingStats st;
  st.n_total = static_cast<int>(recs.size());
  std::vector<double> xs;
  xs.reserve(recs.size());
  for (const RunRecord* rec : recs) {
    const auto x = first_crossing_below(rec->t_scaled, series_of(*rec, obs),
                                        threshold);
    if (x) xs.push_back(*x);
  }
  st.n_crossed = static_cast<int>(xs.size());
  if (xs.empty()) return st;
  double sum = 0.0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - st.mean) * (x - st.mean);
  st.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
  return st;
}

// Pointwise spread of the scaled S_CHSH curves: every record is
// interpolated onto a common scaled grid (default t/tau_E in [0, 5],
// 100 points) and the population standard deviation across records is
// taken per grid point.
struct CollapseMetric {
  std::vector<double> grid_scaled;
  std::vector<double> spread;
  double max_spread = 0.0;
};

inline CollapseMetric collapse_metric(const std::vector<const RunRecord*>& recs,
                                      double x_max = 5.0, int n_points = 100) {
  if (recs.size() < 2)
    throw std::invalid_argument("collapse_metric: needs >= 2 records");
  if (n_points < 2 || !(x_max > 0.0))
    throw std::invalid_argument("collapse_metric: bad grid");

  CollapseMetric m;
  m.grid_scaled.reserve(static_cast<std::size_t>(n_points));
  m.spread.reserve(static_cast<std::size_t>(n_points));
  const double n_recs = static_cast<double>(recs.size());
  for (int i = 0; i < n_points; ++i) {
    const double x = x_max * static_cast<double>(i) / (n_points - 1);
    double sum = 0.0, sum_sq = 0.0;
    for (const RunRecord* rec : recs) {
      const double y = linear_interp(rec->t_scaled, rec->s_chsh, x);
      sum += y;
      sum_sq += y * y;
    }
    const double mean = sum / n_recs;
    const double var = std::max(0.0, sum_sq / n_recs - mean * mean);
    m.grid_scaled.push_back(x);
    m.spread.push_back(std::sqrt(var));
  }
  m.max_spread = *std::max_element(m.spread.begin(), m.spread.end());
  return m;
}

// Single-parameter Gaussian fit pooled over all scaled points of all
// records, with fixed endpoints: 2 sqrt(2) -> sqrt(2) for CHSH and
// 7.5 -> 6 for BPRV.  tau is found by golden-section search on
// [0.1, 10] to 1e-6 relative.
struct FitResult {
  double tau_opt_over_tau_e = 0.0;
  double residual_rms = 0.0;
  double crossing_chsh = 0.0;  // ensemble-mean scaled crossing below 2
  double crossing_bprv = 0.0;  // ensemble-mean scaled crossing below 7
};

inline GaussianDecay decay_model(BellObservable obs) {
  if (obs == BellObservable::chsh)
    return {bell::chsh_bell_state, bell::chsh_classical};
  return {bell::bprv_bell_state, bell::bprv_classical};
}

inline FitResult fit_gaussian(const std::vector<const RunRecord*>& recs,
                              BellObservable obs) {
  if (recs.empty()) throw std::invalid_argument("fit_gaussian: no records");

  const GaussianDecay model = decay_model(obs);
  std::size_t n_points = 0;
  for (const RunRecord* rec : recs) n_points += rec->t_scaled.size();

  auto sse = [&recs, &model, obs](double tau) {
    double acc = 0.0;
    for (const RunRecord* rec : recs) {
      const std::vector<double>& ys = series_of(*rec, obs);
      for (std::size_t i = 0; i < ys.size(); ++i) {
        const double d = ys[i] - model(rec->t_scaled[i], tau);
        acc += d * d;
      }
    }
    return acc;
  };

  FitResult fit;
  fit.tau_opt_over_tau_e = golden_section_minimize(sse, 0.1, 10.0, 1e-6);
  fit.residual_rms =
      std::sqrt(sse(fit.tau_opt_over_tau_e) / static_cast<double>(n_points));
  fit.crossing_chsh = crossing_stats(recs, BellObservable::chsh).mean;
  fit.crossing_bprv = crossing_stats(recs, BellObservable::bprv).mean;
  return fit;
}

}  // namespace dqdsim
