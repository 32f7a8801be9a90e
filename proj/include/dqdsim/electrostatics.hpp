// electrostatics.hpp - pair couplings, configuration energies, flip-energy
// statistics and characteristic times.
//
// Each DQD holds one electron on one of its two dots; the interaction
// between two DQDs j, k depends only on which dots are occupied.  With
// occupations m_j, m_k in {0, 1} and s = 2m - 1 the pair energy is
//   U = s_j s_k J_jk,   J_jk = (k_C/4) [1/r00 - 1/r01 - 1/r10 + 1/r11],
// where r_mn is the distance between dot m of j and dot n of k and k_C
// is the Coulomb constant in eV nm.  The diagonal Hamiltonian is the
// Ising sum of all pair energies.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dqdsim/constants.hpp"
#include "dqdsim/geometry.hpp"

namespace dqdsim {

// Electrostatic coupling J_jk in eV.  Throws if any of the four
// inter-dot distances vanishes (the geometry guard should prevent it).
// The grouping below makes pair_coupling(j, k) == pair_coupling(k, j)
// bit-exact: swapping the arguments only swaps the two cross terms, and
// floating-point addition is commutative.
inline double pair_coupling(const DoubleDot& dj, const DoubleDot& dk) {
  double r[2][2];
  for (int m = 0; m < 2; ++m) {
    for (int n = 0; n < 2; ++n) {
      r[m][n] = distance(dj.dot(m), dk.dot(n));
      if (!(r[m][n] > 0.0))
        throw std::invalid_argument("pair_coupling: coincident dots");
    }
  }
  const double same = 1.0 / r[0][0] + 1.0 / r[1][1];
  const double cross = 1.0 / r[0][1] + 1.0 / r[1][0];
  return 0.25 * constants::coulomb_k * (same - cross);
}

// Symmetric coupling matrix over sites [A, B, env_A..., env_B...] with
// zero diagonal.  Entries between different clusters (including the A-B
// pair) are exactly zero: the clusters are treated as far separated.
struct CouplingTable {
  int n_sites = 0;
  std::vector<double> j;    // row-major n_sites x n_sites, eV
  std::vector<int> cluster; // cluster id per site

  double at(int r, int c) const {
    return j[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_sites) +
             static_cast<std::size_t>(c)];
  }
  double& at(int r, int c) {
    return j[static_cast<std::size_t>(r) * static_cast<std::size_t>(n_sites) +
             static_cast<std::size_t>(c)];
  }
};

inline CouplingTable build_coupling_table(const Geometry& g) {
  CouplingTable table;
  table.n_sites = g.n_sites();
  table.j.assign(static_cast<std::size_t>(table.n_sites) *
                     static_cast<std::size_t>(table.n_sites),
                 0.0);
  table.cluster.resize(static_cast<std::size_t>(table.n_sites));
  for (int i = 0; i < table.n_sites; ++i)
    table.cluster[static_cast<std::size_t>(i)] = g.cluster_of(i);

  for (int r = 0; r < table.n_sites; ++r) {
    for (int c = r + 1; c < table.n_sites; ++c) {
      if (g.cluster_of(r) != g.cluster_of(c)) continue;  // mask
      const double jj = pair_coupling(g.site(r), g.site(c));
      table.at(r, c) = jj;
      table.at(c, r) = jj;
    }
  }
  return table;
}

// Diagonal configuration energies E[idx] in eV, one per bit-packed
// occupation pattern.  Bit i of idx is the occupation m of site i, with
// the site order of CouplingTable (bit 0 = A, bit 1 = B, then env).
struct EnergyTable {
  int n_sites = 0;
  std::vector<double> e;  // size 2^n_sites, eV

  std::size_t size() const { return e.size(); }
};

inline EnergyTable build_energy_table(const CouplingTable& table) {
  const int n = table.n_sites;
  if (n > 30)
    throw std::invalid_argument("build_energy_table: more than 30 sites");

  EnergyTable out;
  out.n_sites = n;
  out.e.assign(std::size_t{1} << n, 0.0);
  for (std::size_t idx = 0; idx < out.e.size(); ++idx) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const double sj = (idx >> j) & 1u ? 1.0 : -1.0;
      for (int k = 0; k < n; ++k) {
        if (k == j) continue;
        const double sk = (idx >> k) & 1u ? 1.0 : -1.0;
        acc += sj * sk * table.at(j, k);
      }
    }
    out.e[idx] = 0.5 * acc;
  }
  return out;
}

// Flip-energy RMS and the derived dephasing times.
//
// Flipping target X with the environment frozen in one configuration
// costs E^flip_X = 2 sum_k s_k J[X][k]; the RMS over all environment
// configurations has the closed form e_rms_X = 2 sqrt(sum_k J[X][k]^2).
// Times use the convention tau_X = hbar / (2 e_rms_X), under which the
// ensemble-averaged Bell correlators decay on a scale of order tau_E =
// sqrt(tau_A tau_B).
struct CharacteristicTimes {
  double e_rms_a = 0.0;  // eV
  double e_rms_b = 0.0;  // eV
  double tau_a = 0.0;    // ps
  double tau_b = 0.0;    // ps
  double tau_e = 0.0;    // ps
};

inline CharacteristicTimes characteristic_times(const CouplingTable& table) {
  auto rms = [&table](int target) {
    double sum_sq = 0.0;
    for (int k = 0; k < table.n_sites; ++k) {
      const double jk = table.at(target, k);
      sum_sq += jk * jk;
    }
    return 2.0 * std::sqrt(sum_sq);
  };

  CharacteristicTimes t;
  t.e_rms_a = rms(0);
  t.e_rms_b = rms(1);
  if (!(t.e_rms_a > 0.0) || !(t.e_rms_b > 0.0))
    throw std::runtime_error(
        "characteristic_times: a target has zero total coupling");
  t.tau_a = constants::hbar / (2.0 * t.e_rms_a);
  t.tau_b = constants::hbar / (2.0 * t.e_rms_b);
  t.tau_e = std::sqrt(t.tau_a * t.tau_b);
  return t;
}

}  // namespace dqdsim
