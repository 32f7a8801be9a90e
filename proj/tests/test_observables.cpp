#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>

#include "dqdsim/constants.hpp"
#include "dqdsim/electrostatics.hpp"
#include "dqdsim/geometry.hpp"
#include "dqdsim/observables.hpp"
#include "dqdsim/quantum.hpp"
#include "dqdsim/rng.hpp"

using dqdsim::basis_index;
using dqdsim::bprv_correlator;
using dqdsim::build_coupling_table;
using dqdsim::build_energy_table;
using dqdsim::build_initial_state;
using dqdsim::chsh_correlator;
using dqdsim::complexd;
using dqdsim::concurrence;
using dqdsim::entanglement_of_formation;
using dqdsim::evolve;
using dqdsim::Geometry;
using dqdsim::InitialMode;
using dqdsim::Matrix4c;
using dqdsim::RandomStream;
using dqdsim::reduce_to_pair;
using dqdsim::rotation;
using dqdsim::sample_geometry;
using dqdsim::sample_initial_spec;
using dqdsim::StateVector;
using dqdsim::von_neumann_entropy;
namespace bell = dqdsim::bell;

namespace {

Matrix4c bell_projector() {
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = rho(0, 3) = rho(3, 0) = rho(3, 3) = 0.5;
  return rho;
}

Matrix4c classical_mixture() {
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = rho(3, 3) = 0.5;
  return rho;
}

// A mid-decay state from the real pipeline (n_env = 4).
StateVector pipeline_state(double t_ps, std::uint64_t seed) {
  RandomStream rng(seed);
  const Geometry g = sample_geometry(1.0, 3.0, 4, rng);
  const auto en = build_energy_table(build_coupling_table(g));
  const auto spec = sample_initial_spec(4, InitialMode::equatorial, rng);
  return evolve(build_initial_state(4, spec), en, t_ps);
}

}  // namespace

TEST_CASE("reduction of Bell x env product is the Bell projector",
          "[observables]") {
  RandomStream rng(3);
  const auto spec = sample_initial_spec(5, InitialMode::equatorial, rng);
  const Matrix4c rho = reduce_to_pair(build_initial_state(5, spec));
  const Matrix4c expected = bell_projector();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      REQUIRE(std::abs(rho(r, c) - expected(r, c)) < 1e-12);
}

TEST_CASE("reduced matrix of a full product state is pure", "[observables]") {
  // |psi> = (alpha|0>+beta|1>)_A x (gamma|0>+delta|1>)_B x env site.
  const complexd alpha{0.6, 0.0}, beta{0.0, 0.8};
  const complexd gamma{0.28, 0.96}, delta{0.0, 0.0};
  const complexd e0{std::sqrt(0.5), 0.0}, e1{0.5, 0.5};
  StateVector psi;
  psi.amp.assign(8, complexd{});
  for (int ma = 0; ma < 2; ++ma)
    for (int mb = 0; mb < 2; ++mb)
      for (int p = 0; p < 2; ++p)
        psi.amp[basis_index(ma, mb, static_cast<std::uint64_t>(p))] =
            (ma ? beta : alpha) * (mb ? delta : gamma) * (p ? e1 : e0);
  const Matrix4c rho = reduce_to_pair(psi);
  const double purity = (rho * rho).trace().real();
  REQUIRE(purity == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(rho.trace().real() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("reduction matches the dense partial-trace oracle",
          "[observables]") {
  const StateVector psi = pipeline_state(0.02, 19);
  REQUIRE(psi.amp.size() == 64);

  // Oracle: form the full 64x64 density matrix, then trace the 16
  // environment configurations index by index.
  Eigen::MatrixXcd full(64, 64);
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      full(i, j) = psi.amp[static_cast<std::size_t>(i)] *
                   std::conj(psi.amp[static_cast<std::size_t>(j)]);
  Matrix4c oracle = Matrix4c::Zero();
  for (int ma = 0; ma < 2; ++ma)
    for (int mb = 0; mb < 2; ++mb)
      for (int na = 0; na < 2; ++na)
        for (int nb = 0; nb < 2; ++nb)
          for (int p = 0; p < 16; ++p)
            oracle(2 * ma + mb, 2 * na + nb) +=
                full(static_cast<int>(basis_index(ma, mb, p)),
                     static_cast<int>(basis_index(na, nb, p)));

  const Matrix4c rho = reduce_to_pair(psi);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      REQUIRE(std::abs(rho(r, c) - oracle(r, c)) < 1e-12);

  // Density-matrix invariants on the reduced state.
  REQUIRE(std::abs(rho.trace().real() - 1.0) < 1e-12);
  REQUIRE((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho);
  REQUIRE(es.eigenvalues().minCoeff() > -1e-10);
}

TEST_CASE("rotation has the frozen sign convention", "[observables]") {
  const auto id = rotation(0.0);
  REQUIRE(id(0, 0) == 1.0);
  REQUIRE(id(0, 1) == 0.0);
  REQUIRE(id(1, 0) == 0.0);
  REQUIRE(id(1, 1) == 1.0);

  // 90 degrees: |0> -> -|1>.
  const auto quarter = rotation(0.5 * 3.14159265358979323846);
  REQUIRE(quarter(0, 0) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(quarter(1, 0) == Catch::Approx(-1.0).margin(1e-15));

  RandomStream rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = rotation(rng.uniform(0.0, 6.3));
    const Eigen::Matrix2d should_be_id = r.transpose() * r;
    REQUIRE((should_be_id - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <
            1e-15);
    REQUIRE(r.determinant() == Catch::Approx(1.0).margin(1e-15));
  }
}

TEST_CASE("CHSH fixtures", "[observables]") {
  REQUIRE(chsh_correlator(bell_projector()) ==
          Catch::Approx(bell::chsh_bell_state).margin(1e-12));
  REQUIRE(chsh_correlator(classical_mixture()) ==
          Catch::Approx(bell::chsh_classical).margin(1e-12));

  // Product state |00>: E(x, y) = cos(2x) cos(2y).
  Matrix4c rho00 = Matrix4c::Zero();
  rho00(0, 0) = 1.0;
  REQUIRE(chsh_correlator(rho00) ==
          Catch::Approx(std::sqrt(2.0)).margin(1e-12));

  const Matrix4c mixed = 0.25 * Matrix4c::Identity();
  REQUIRE(chsh_correlator(mixed) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("BPRV fixtures", "[observables]") {
  REQUIRE(bprv_correlator(bell_projector()) ==
          Catch::Approx(bell::bprv_bell_state).margin(1e-12));
  REQUIRE(bprv_correlator(classical_mixture()) ==
          Catch::Approx(bell::bprv_classical).margin(1e-12));
  const Matrix4c mixed = 0.25 * Matrix4c::Identity();
  REQUIRE(bprv_correlator(mixed) == Catch::Approx(4.5).margin(1e-12));
}

TEST_CASE("correlators ignore a global phase of the state", "[observables]") {
  const StateVector psi = pipeline_state(0.015, 31);
  StateVector rotated = psi;
  const complexd phase = std::polar(1.0, 1.234);
  for (complexd& c : rotated.amp) c *= phase;
  const Matrix4c r1 = reduce_to_pair(psi);
  const Matrix4c r2 = reduce_to_pair(rotated);
  REQUIRE(chsh_correlator(r1) == Catch::Approx(chsh_correlator(r2)).margin(1e-12));
  REQUIRE(bprv_correlator(r1) == Catch::Approx(bprv_correlator(r2)).margin(1e-12));
}

TEST_CASE("entropy fixtures", "[observables]") {
  REQUIRE(von_neumann_entropy(bell_projector()) ==
          Catch::Approx(0.0).margin(1e-9));
  REQUIRE(von_neumann_entropy(classical_mixture()) ==
          Catch::Approx(1.0).margin(1e-12));
  REQUIRE(von_neumann_entropy(0.25 * Matrix4c::Identity()) ==
          Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("entropy rejects clearly negative spectra", "[observables]") {
  Matrix4c rho = Matrix4c::Zero();
  rho(0, 0) = 1.0005;
  rho(1, 1) = -0.0005;
  REQUIRE_THROWS_AS(von_neumann_entropy(rho), std::runtime_error);
}

TEST_CASE("purity and entropy agree at the pure point", "[observables]") {
  const Matrix4c rho = reduce_to_pair(pipeline_state(0.0, 41));
  REQUIRE((rho * rho).trace().real() == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(von_neumann_entropy(rho) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("concurrence and EoF fixtures", "[observables]") {
  REQUIRE(concurrence(bell_projector()) == Catch::Approx(1.0).margin(1e-9));
  REQUIRE(entanglement_of_formation(bell_projector()) ==
          Catch::Approx(1.0).margin(1e-9));

  REQUIRE(concurrence(classical_mixture()) == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(entanglement_of_formation(classical_mixture()) ==
          Catch::Approx(0.0).margin(1e-9));

  // Werner state p|Phi+><Phi+| + (1-p) I/4: C = max(0, (3p-1)/2).
  auto werner = [](double p) -> Matrix4c {
    return p * bell_projector() + (1.0 - p) * 0.25 * Matrix4c::Identity();
  };
  REQUIRE(concurrence(werner(0.9)) == Catch::Approx(0.85).margin(1e-9));
  REQUIRE(entanglement_of_formation(werner(0.9)) ==
          Catch::Approx(0.78935496098878457).margin(1e-9));
  REQUIRE(concurrence(werner(1.0 / 3.0)) == Catch::Approx(0.0).margin(1e-9));
  REQUIRE(entanglement_of_formation(werner(0.2)) ==
          Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("correlators respect their ranges along a real trajectory",
          "[observables]") {
  for (double t : {0.0, 0.005, 0.01, 0.02, 0.05, 0.1}) {
    const Matrix4c rho = reduce_to_pair(pipeline_state(t, 53));
    const double chsh = chsh_correlator(rho);
    const double bprv = bprv_correlator(rho);
    REQUIRE(chsh >= 0.0);
    REQUIRE(chsh <= bell::chsh_bell_state + 1e-9);
    REQUIRE(bprv >= 0.0);
    REQUIRE(bprv <= 9.0);
    const double c = concurrence(rho);
    REQUIRE(c >= 0.0);
    REQUIRE(c <= 1.0 + 1e-12);
    const double eof = entanglement_of_formation(rho);
    REQUIRE(eof >= 0.0);
    REQUIRE(eof <= 1.0 + 1e-12);
  }
}
