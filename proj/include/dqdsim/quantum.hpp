// quantum.hpp - bit-packed basis, initial state construction, and exact
// time evolution under the diagonal Hamiltonian.
//
// The global pure state of N + 2 DQDs is a vector of 2^(N+2) complex
// amplitudes.  Because the Hamiltonian is diagonal in the occupation
// basis, evolution is an exact per-amplitude phase rotation
//   c_i(t) = c_i(0) exp(-i E_i t / hbar)
// evaluated directly at any requested t - no integrator, no stepping.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dqdsim/constants.hpp"
#include "dqdsim/electrostatics.hpp"
#include "dqdsim/rng.hpp"

namespace dqdsim {

using complexd = std::complex<double>;

// Basis packing: bit 0 = m_A, bit 1 = m_B, bits 2..N+1 = environmental
// DQDs in site order (cluster A first).  Part of the file-format
// contract; must not change.
inline std::size_t basis_index(int m_a, int m_b, std::uint64_t env_bits) {
  return static_cast<std::size_t>(m_a) | (static_cast<std::size_t>(m_b) << 1) |
         (static_cast<std::size_t>(env_bits) << 2);
}

struct StateVector {
  std::vector<complexd> amp;  // size 2^(N+2)
  double time_ps = 0.0;

  int n_env() const {
    int n = 0;
    while ((std::size_t{4} << n) < amp.size()) ++n;
    return n;
  }
};

inline double norm_squared(const StateVector& s) {
  double acc = 0.0;
  for (const complexd& c : s.amp) acc += std::norm(c);
  return acc;
}

// <H> = sum_i E_i |c_i|^2, recomputed from scratch (used by the energy
// conservation checks).
inline double energy_expectation(const StateVector& s, const EnergyTable& en) {
  if (s.amp.size() != en.size())
    throw std::invalid_argument("energy_expectation: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.amp.size(); ++i)
    acc += en.e[i] * std::norm(s.amp[i]);
  return acc;
}

enum class InitialMode {
  equatorial,     // env qubits on the Bloch equator, random phases
  uniform_bloch,  // env Bloch vectors uniform on the unit sphere
};

// Per-environment single-qubit state parameters.  In equatorial mode the
// site state is e^{i theta} (|0> + e^{i phi} |1>) / sqrt(2); in
// uniform-Bloch mode it is cos(theta/2) |0> + e^{i phi} sin(theta/2) |1>.
struct InitialStateSpec {
  InitialMode mode = InitialMode::equatorial;
  std::vector<double> theta;  // radians, one per env DQD
  std::vector<double> phi;    // radians, one per env DQD

  int n_env() const { return static_cast<int>(theta.size()); }
};

// Draws the spec for n_env DQDs.  Per DQD, in order: theta then phi.
// Equatorial: both uniform on [0, 2pi).  Uniform-Bloch: theta = acos(z)
// with z uniform on [-1, 1), then phi uniform on [0, 2pi).
inline InitialStateSpec sample_initial_spec(int n_env, InitialMode mode,
                                            RandomStream& rng) {
  if (n_env < 0)
    throw std::invalid_argument("sample_initial_spec: n_env must be >= 0");
  constexpr double two_pi = 2.0 * 3.14159265358979323846;
  InitialStateSpec spec;
  spec.mode = mode;
  spec.theta.reserve(static_cast<std::size_t>(n_env));
  spec.phi.reserve(static_cast<std::size_t>(n_env));
  for (int k = 0; k < n_env; ++k) {
    if (mode == InitialMode::equatorial)
      spec.theta.push_back(rng.uniform(0.0, two_pi));
    else
      spec.theta.push_back(std::acos(rng.uniform(-1.0, 1.0)));
    spec.phi.push_back(rng.uniform(0.0, two_pi));
  }
  return spec;
}

// |psi(0)> = Bell(A,B) x product of env site states, where Bell is
// (|00> + |11>) / sqrt(2).
inline StateVector build_initial_state(int n_env, const InitialStateSpec& spec) {
  if (spec.n_env() != n_env || spec.phi.size() != spec.theta.size())
    throw std::invalid_argument("build_initial_state: phase count mismatch");

  constexpr double inv_sqrt2 = 0.70710678118654752440;
  StateVector psi;
  psi.amp.assign(4, complexd{0.0, 0.0});
  psi.amp[basis_index(0, 0, 0)] = inv_sqrt2;
  psi.amp[basis_index(1, 1, 0)] = inv_sqrt2;

  // Tensor one environmental site at a time.
  for (int k = 0; k < n_env; ++k) {
    complexd site[2];
    if (spec.mode == InitialMode::equatorial) {
      const complexd global = std::polar(inv_sqrt2, spec.theta[k]);
      site[0] = global;
      site[1] = global * std::polar(1.0, spec.phi[k]);
    } else {
      site[0] = std::cos(0.5 * spec.theta[k]);
      site[1] = std::polar(std::sin(0.5 * spec.theta[k]), spec.phi[k]);
    }
    const std::size_t block = psi.amp.size();
    std::vector<complexd> next(block * 2);
    for (std::size_t i = 0; i < block; ++i) {
      next[i] = psi.amp[i] * site[0];
      next[i + block] = psi.amp[i] * site[1];
    }
    psi.amp.swap(next);
  }
  return psi;
}

// Applies exp(-i H t / hbar) for a duration t >= 0.
inline StateVector evolve(const StateVector& s0, const EnergyTable& en,
                          double t_ps) {
  if (s0.amp.size() != en.size())
    throw std::invalid_argument("evolve: dimension mismatch");
  if (!(t_ps >= 0.0)) throw std::invalid_argument("evolve: t must be >= 0");

  StateVector out;
  out.time_ps = s0.time_ps + t_ps;
  out.amp.resize(s0.amp.size());
  if (t_ps == 0.0) {
    out.amp = s0.amp;
    return out;
  }
  const double w = -t_ps / constants::hbar;
  for (std::size_t i = 0; i < s0.amp.size(); ++i)
    out.amp[i] = s0.amp[i] * std::polar(1.0, w * en.e[i]);
  return out;
}

}  // namespace dqdsim
