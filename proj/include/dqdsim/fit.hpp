// fit.hpp - the fixed-endpoint Gaussian decay model and a bracketed
// single-parameter least-squares search.
#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dqdsim {

// g(x) = s_inf + (s0 - s_inf) exp(-x^2 / (2 tau^2)).  Endpoints s0 and
// s_inf are fixed analytically (initial Bell value and dephased-mixture
// value); tau is the only free parameter.
struct GaussianDecay {
  double s0;
  double s_inf;

  double operator()(double x, double tau) const {
    return s_inf + (s0 - s_inf) * std::exp(-x * x / (2.0 * tau * tau));
  }

  // Scaled time at which g crosses `level` (requires s_inf < level < s0).
  double crossing(double level, double tau) const {
    if (!(level > s_inf && level < s0))
      throw std::invalid_argument("GaussianDecay::crossing: level outside range");
    return tau * std::sqrt(2.0 * std::log((s0 - s_inf) / (level - s_inf)));
  }
};

// Golden-section minimization of a unimodal scalar function on [lo, hi]
// to the requested relative tolerance on the argument.  Throws if the
// iteration cap is hit before the bracket shrinks enough.
template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double rel_tol,
                               int max_iter = 200) {
  if (!(lo < hi)) throw std::invalid_argument("golden_section: requires lo < hi");
  constexpr double invphi = 0.61803398874989484820;  // (sqrt(5) - 1) / 2

  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  for (int it = 0; it < max_iter; ++it) {
    if (b - a <= rel_tol * (0.5 * (std::abs(a) + std::abs(b))))
      return 0.5 * (a + b);
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  throw std::runtime_error("golden_section: no convergence within max_iter");
}

}  // namespace dqdsim
