// constants.hpp - physical constants and Bell reference values.
//
// Unit system used throughout: lengths in nm, energies in eV, times in ps.
#pragma once

namespace dqdsim::constants {

// CODATA values, frozen.
inline constexpr double coulomb_k = 1.439964548;     // e^2/(4 pi eps0)  [eV nm]
inline constexpr double hbar      = 6.582119569e-4;  // reduced Planck   [eV ps]
inline constexpr double h         = 4.135667696e-3;  // Planck           [eV ps]

}  // namespace dqdsim::constants

namespace dqdsim::bell {

// Local-realism bounds of the two inequalities.
inline constexpr double chsh_local_bound = 2.0;
inline constexpr double bprv_local_bound = 7.0;

// Correlator values for the symmetric Bell state (|00> + |11>)/sqrt(2)
// and for the fully dephased mixture (|00><00| + |11><11|)/2 at the
// default measurement angles.
inline constexpr double chsh_bell_state = 2.8284271247461903;  // 2 sqrt(2)
inline constexpr double chsh_classical  = 1.4142135623730951;  // sqrt(2)
inline constexpr double bprv_bell_state = 7.5;
inline constexpr double bprv_classical  = 6.0;

}  // namespace dqdsim::bell
