// dqdsim command-line front end.
//
// Subcommands:
//   simulate  - one run: time-series CSV + metadata JSON
//   ensemble  - multi-geometry sweep from a JSON config: per-run files
//               plus summary.json (fits, crossings, collapse metric)
//   plotdata  - tidy long-format CSVs for plotting, from an ensemble
//               output directory or a single run CSV
//   selftest  - fast analytic fixtures, pass/fail per check
//
// The environment variable DQDSIM_OUT_DIR supplies the default output
// directory (falls back to the current directory).

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dqdsim/ensemble.hpp"
#include "dqdsim/io.hpp"
#include "dqdsim/version.hpp"

namespace fs = std::filesystem;
using dqdsim::BellObservable;
using dqdsim::EnsembleSpec;
using dqdsim::RunOutcome;
using dqdsim::RunRecord;
using dqdsim::RunSpec;
namespace io = dqdsim::io;

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("DQDSIM_OUT_DIR");
  return (env != nullptr && *env != '\0') ? env : ".";
}

int report_invalid(const std::vector<std::string>& violations) {
  std::cerr << "invalid configuration:\n";
  for (const std::string& v : violations) std::cerr << "  - " << v << "\n";
  return 2;
}

// simulate --------------------------------------------------------------

struct SimulateArgs {
  RunSpec spec;
  std::vector<double> chsh_angles;
  std::vector<double> bprv_angles;
  std::string mode = "equatorial";
  std::string out;
  std::string meta;
};

int cmd_simulate(SimulateArgs& args) {
  args.spec.mode = io::initial_mode_from_string(args.mode);
  if (args.chsh_angles.size() == 4)
    std::copy(args.chsh_angles.begin(), args.chsh_angles.end(),
              args.spec.settings.chsh_deg.begin());
  if (args.bprv_angles.size() == 3)
    std::copy(args.bprv_angles.begin(), args.bprv_angles.end(),
              args.spec.settings.bprv_deg.begin());

  if (const auto bad = dqdsim::validate(args.spec); !bad.empty())
    return report_invalid(bad);

  if (args.out.empty()) args.out = default_out_dir() + "/run.csv";
  if (args.meta.empty()) {
    std::string stem = args.out;
    if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv")
      stem.resize(stem.size() - 4);
    args.meta = stem + ".meta.json";
  }
  for (const std::string* p : {&args.out, &args.meta}) {
    const fs::path dir = fs::path(*p).parent_path();
    if (!dir.empty()) fs::create_directories(dir);
  }

  const RunRecord rec = dqdsim::run_single(args.spec);
  io::write_text_file(args.out, io::time_series_csv(rec));
  io::write_text_file(args.meta, io::run_metadata_json(rec).dump(2) + "\n");

  std::cout << "wrote " << args.out << " (" << rec.t_ps.size() << " rows) and "
            << args.meta << "\n";
  if (rec.times)
    std::cout << "tau_A = " << rec.times->tau_a << " ps, tau_B = "
              << rec.times->tau_b << " ps, tau_E = " << rec.times->tau_e
              << " ps\n";
  else
    std::cout << "no environment: time unit fixed at 1 ps\n";
  return 0;
}

// ensemble --------------------------------------------------------------

std::string run_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%03zu", index);
  return buf;
}

int cmd_ensemble(const std::string& config_path, std::string out_dir) {
  io::ordered_json config_json;
  try {
    config_json = io::ordered_json::parse(io::read_text_file(config_path));
  } catch (const std::exception& e) {
    std::cerr << "cannot read config: " << e.what() << "\n";
    return 2;
  }

  EnsembleSpec spec;
  try {
    spec = io::ensemble_spec_from_json(config_json);
  } catch (const std::exception& e) {
    std::cerr << "invalid configuration:\n  - " << e.what() << "\n";
    return 2;
  }
  if (const auto bad = dqdsim::validate(spec); !bad.empty())
    return report_invalid(bad);

  if (out_dir.empty()) out_dir = default_out_dir() + "/ensemble_out";
  fs::create_directories(out_dir);

  const std::vector<RunOutcome> outcomes = dqdsim::run_ensemble(spec);

  int n_failed = 0;
  for (const RunOutcome& o : outcomes) {
    if (!o.ok()) {
      std::cerr << "run " << o.index << " (seed " << o.spec.seed
                << ") failed: " << o.error << "\n";
      ++n_failed;
      continue;
    }
    const std::string stem = out_dir + "/" + run_stem(o.index);
    io::write_text_file(stem + ".csv", io::time_series_csv(*o.record));
    io::write_text_file(stem + ".meta.json",
                        io::run_metadata_json(*o.record).dump(2) + "\n");
  }

  const io::ordered_json summary = io::summary_json(spec, outcomes);
  io::write_text_file(out_dir + "/summary.json", summary.dump(2) + "\n");

  std::cout << "completed " << (outcomes.size() - n_failed) << "/"
            << outcomes.size() << " runs -> " << out_dir << "\n";
  if (summary.contains("fit_chsh"))
    std::cout << "tau_opt/tau_E (CHSH) = "
              << summary["fit_chsh"]["tau_opt_over_tau_e"].get<double>()
              << ", (BPRV) = "
              << summary["fit_bprv"]["tau_opt_over_tau_e"].get<double>() << "\n";
  if (summary.contains("crossings"))
    std::cout << "mean crossings: CHSH<2 at t/tau_E = "
              << summary["crossings"]["chsh"]["mean_scaled"].get<double>()
              << ", BPRV<7 at t/tau_E = "
              << summary["crossings"]["bprv"]["mean_scaled"].get<double>()
              << "\n";
  return n_failed == 0 ? 0 : 1;
}

// plotdata --------------------------------------------------------------

// Rebuilds the series part of a RunRecord from a written time-series CSV.
RunRecord record_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != io::time_series_header)
    throw std::runtime_error("unexpected time-series header");

  RunRecord rec;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v[6];
    int field = 0;
    std::size_t pos = 0;
    while (field < 6) {
      const std::size_t comma = line.find(',', pos);
      const std::string cell = comma == std::string::npos
                                   ? line.substr(pos)
                                   : line.substr(pos, comma - pos);
      v[field++] = std::stod(cell);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (field != 6) throw std::runtime_error("short time-series row");
    rec.t_ps.push_back(v[0]);
    rec.t_scaled.push_back(v[1]);
    rec.s_chsh.push_back(v[2]);
    rec.s_bprv.push_back(v[3]);
    rec.entropy_bits.push_back(v[4]);
    rec.eof.push_back(v[5]);
  }
  if (rec.t_ps.empty()) throw std::runtime_error("empty time series");
  return rec;
}

void write_plot_files(const std::vector<RunOutcome>& outcomes,
                      const dqdsim::FitResult& fit_chsh,
                      const dqdsim::FitResult& fit_bprv,
                      const std::string& out_dir) {
  fs::create_directories(out_dir);
  io::write_text_file(out_dir + "/plot_chsh_unscaled.csv",
                      io::plot_chsh_unscaled_csv(outcomes));
  io::write_text_file(
      out_dir + "/plot_chsh_scaled.csv",
      io::plot_scaled_csv(outcomes, BellObservable::chsh, fit_chsh));
  io::write_text_file(
      out_dir + "/plot_bprv_scaled.csv",
      io::plot_scaled_csv(outcomes, BellObservable::bprv, fit_bprv));
  io::write_text_file(out_dir + "/plot_entropy_eof.csv",
                      io::plot_entropy_eof_csv(outcomes));
  std::cout << "wrote 4 plot-data files -> " << out_dir << "\n";
}

int cmd_plotdata(const std::string& ensemble_dir, const std::string& run_csv,
                 std::string out_dir) {
  if (out_dir.empty()) out_dir = default_out_dir();

  std::vector<RunOutcome> outcomes;
  dqdsim::FitResult fit_chsh, fit_bprv;

  if (!ensemble_dir.empty()) {
    const std::string summary_path = ensemble_dir + "/summary.json";
    if (!fs::exists(summary_path)) {
      std::cerr << "missing input: " << summary_path << "\n";
      return 2;
    }
    const auto summary =
        io::ordered_json::parse(io::read_text_file(summary_path));
    for (const auto& r : summary.at("runs")) {
      if (!r.at("ok").get<bool>()) continue;
      RunOutcome o;
      o.index = r.at("index").get<std::size_t>();
      o.spec.r_over_a = r.at("r_over_a").get<double>();
      o.spec.seed = r.at("seed").get<std::uint64_t>();
      const std::string csv_path =
          ensemble_dir + "/" + r.at("csv").get<std::string>();
      o.record = record_from_csv(io::read_text_file(csv_path));
      outcomes.push_back(std::move(o));
    }
    if (outcomes.empty()) {
      std::cerr << "missing input: no completed runs in summary\n";
      return 2;
    }
    if (summary.contains("fit_chsh")) {
      fit_chsh.tau_opt_over_tau_e =
          summary["fit_chsh"]["tau_opt_over_tau_e"].get<double>();
      fit_bprv.tau_opt_over_tau_e =
          summary["fit_bprv"]["tau_opt_over_tau_e"].get<double>();
    }
  } else {
    if (!fs::exists(run_csv)) {
      std::cerr << "missing input: " << run_csv << "\n";
      return 2;
    }
    RunOutcome o;
    o.index = 0;
    o.spec.r_over_a = 0.0;  // unknown unless metadata is found
    o.record = record_from_csv(io::read_text_file(run_csv));
    std::string meta = run_csv;
    if (meta.size() > 4 && meta.substr(meta.size() - 4) == ".csv")
      meta.resize(meta.size() - 4);
    meta += ".meta.json";
    if (fs::exists(meta)) {
      const auto doc = io::ordered_json::parse(io::read_text_file(meta));
      o.spec.r_over_a = doc.at("config").at("r_over_a").get<double>();
      o.spec.seed = doc.at("config").at("seed").get<std::uint64_t>();
    }
    outcomes.push_back(std::move(o));
    const auto recs = dqdsim::completed_records(outcomes);
    fit_chsh = dqdsim::fit_gaussian(recs, BellObservable::chsh);
    fit_bprv = dqdsim::fit_gaussian(recs, BellObservable::bprv);
  }

  write_plot_files(outcomes, fit_chsh, fit_bprv, out_dir);
  return 0;
}

// selftest --------------------------------------------------------------

int cmd_selftest() {
  using namespace dqdsim;
  int failures = 0;
  auto check = [&failures](const std::string& name, bool ok) {
    std::cout << (ok ? "ok   - " : "FAIL - ") << name << "\n";
    if (!ok) ++failures;
  };
  const auto near = [](double a, double b, double tol) {
    return std::abs(a - b) <= tol;
  };

  // Bell pair with no environment: exact initial diagnostics.
  {
    const StateVector psi = build_initial_state(0, {});
    const Matrix4c rho = reduce_to_pair(psi);
    check("bell state: S_chsh = 2*sqrt(2)",
          near(chsh_correlator(rho), bell::chsh_bell_state, 1e-9));
    check("bell state: S_bprv = 7.5",
          near(bprv_correlator(rho), bell::bprv_bell_state, 1e-9));
    check("bell state: entropy = 0, eof = 1",
          near(von_neumann_entropy(rho), 0.0, 1e-9) &&
              near(entanglement_of_formation(rho), 1.0, 1e-9));
  }

  // Dephased classical mixture.
  {
    Matrix4c rho = Matrix4c::Zero();
    rho(0, 0) = 0.5;
    rho(3, 3) = 0.5;
    check("classical mixture: S_chsh = sqrt(2)",
          near(chsh_correlator(rho), bell::chsh_classical, 1e-9));
    check("classical mixture: S_bprv = 6",
          near(bprv_correlator(rho), bell::bprv_classical, 1e-9));
    check("classical mixture: entropy = 1, eof = 0",
          near(von_neumann_entropy(rho), 1.0, 1e-9) &&
              near(entanglement_of_formation(rho), 0.0, 1e-9));
  }

  // Werner state at p = 0.9 against the closed-form concurrence.
  {
    Matrix4c bell_proj = Matrix4c::Zero();
    bell_proj(0, 0) = bell_proj(0, 3) = bell_proj(3, 0) = bell_proj(3, 3) = 0.5;
    const double p = 0.9;
    const Matrix4c rho =
        p * bell_proj + (1.0 - p) * 0.25 * Matrix4c::Identity();
    check("werner p=0.9: concurrence = 0.85",
          near(concurrence(rho), 0.85, 1e-9));
    check("werner p=0.9: eof matches binary-entropy form",
          near(entanglement_of_formation(rho), 0.78935496098878457, 1e-9));
  }

  // Coaxial coupling fixture: d = 3 nm, a = 1 nm.
  {
    const DoubleDot d1{{0, 0, 0}, {0, 0, 1}, 1.0};
    const DoubleDot d2{{0, 0, 3}, {0, 0, 1}, 1.0};
    const double expected = -constants::coulomb_k / 48.0;  // k_C/4 * (-1/12)
    check("coaxial pair coupling = -k_C/48",
          near(pair_coupling(d1, d2), expected, 1e-12));
  }

  // Norm and energy conservation on a small random run.
  {
    RandomStream rng(7);
    Geometry g = sample_geometry(1.0, 3.0, 6, rng);
    const CouplingTable table = build_coupling_table(g);
    const EnergyTable en = build_energy_table(table);
    const InitialStateSpec init =
        sample_initial_spec(6, InitialMode::uniform_bloch, rng);
    const StateVector psi0 = build_initial_state(6, init);
    const double e0 = energy_expectation(psi0, en);
    bool ok = true;
    for (int i = 1; i <= 50; ++i) {
      const StateVector psi = evolve(psi0, en, 0.01 * i);
      ok = ok && near(norm_squared(psi), 1.0, 1e-12) &&
           near(energy_expectation(psi, en), e0, 1e-12);
    }
    check("evolution conserves norm and <H>", ok);
  }

  // Gaussian model consistency: crossings implied by tau = 1.34.
  {
    const GaussianDecay chsh = decay_model(BellObservable::chsh);
    const GaussianDecay bprv = decay_model(BellObservable::bprv);
    check("gaussian model: chsh crossing at 1.779 for tau = 1.34",
          near(chsh.crossing(bell::chsh_local_bound, 1.34),
               1.7790977560844100, 1e-9));
    check("gaussian model: bprv crossing at 1.207 for tau = 1.34",
          near(bprv.crossing(bell::bprv_local_bound, 1.34),
               1.2066922955907359, 1e-9));
  }

  std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact pure-state simulator of DQD charge-qubit disentanglement"};
  app.set_version_flag("--version", dqdsim::version);
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "run one geometry and write time series + metadata");
  simulate->add_option("--a-nm", sim.spec.a_nm, "dot separation a [nm]")
      ->capture_default_str();
  simulate->add_option("--r-over-a", sim.spec.r_over_a, "env sphere radius R/a")
      ->capture_default_str();
  simulate->add_option("--n-env", sim.spec.n_env,
                       "environmental DQDs (even, split between clusters)")
      ->capture_default_str();
  simulate->add_option("--seed", sim.spec.seed, "RNG seed")->required();
  simulate->add_option("--t-max", sim.spec.t_max_tau,
                       "grid end in units of tau_E")
      ->capture_default_str();
  simulate->add_option("--steps", sim.spec.n_steps, "grid points")
      ->capture_default_str();
  simulate->add_option("--mode", sim.mode, "initial env state distribution")
      ->check(CLI::IsMember({"equatorial", "uniform-bloch"}))
      ->capture_default_str();
  simulate->add_option("--chsh-angles", sim.chsh_angles,
                       "CHSH angles a a' b b' [deg]")
      ->expected(4);
  simulate->add_option("--bprv-angles", sim.bprv_angles,
                       "BPRV angles t1 t2 t3 [deg]")
      ->expected(3);
  simulate->add_option("--out", sim.out, "time-series CSV path");
  simulate->add_option("--meta", sim.meta, "metadata JSON path");

  std::string config_path, ens_out_dir;
  CLI::App* ensemble = app.add_subcommand(
      "ensemble", "run a multi-geometry sweep from a JSON config");
  ensemble->add_option("--config", config_path, "ensemble config JSON")
      ->required();
  ensemble->add_option("--out-dir", ens_out_dir, "output directory");

  std::string plot_ensemble_dir, plot_run_csv, plot_out_dir;
  CLI::App* plotdata = app.add_subcommand(
      "plotdata", "emit tidy plot CSVs from existing outputs");
  auto* opt_dir = plotdata->add_option("--ensemble-dir", plot_ensemble_dir,
                                       "ensemble output directory");
  plotdata->add_option("--run", plot_run_csv, "single run time-series CSV")
      ->excludes(opt_dir);
  plotdata->add_option("--out-dir", plot_out_dir, "output directory");

  CLI::App* selftest =
      app.add_subcommand("selftest", "run the analytic fixture suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (ensemble->parsed()) return cmd_ensemble(config_path, ens_out_dir);
    if (plotdata->parsed()) {
      if (plot_ensemble_dir.empty() && plot_run_csv.empty()) {
        std::cerr << "plotdata: need --ensemble-dir or --run\n";
        return 2;
      }
      return cmd_plotdata(plot_ensemble_dir, plot_run_csv, plot_out_dir);
    }
    if (selftest->parsed()) return cmd_selftest();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
