// observables.hpp - reduced two-qubit density matrix and the derived
// diagnostics: CHSH and BPRV Bell correlators, von Neumann entropy, and
// entanglement of formation.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "dqdsim/constants.hpp"
#include "dqdsim/quantum.hpp"

namespace dqdsim {

using Matrix4c = Eigen::Matrix4cd;
using Matrix2d = Eigen::Matrix2d;
using Matrix4d = Eigen::Matrix4d;

// Measurement angles in degrees.  CHSH order: [a, a', b, b'] with a-side
// angles applied to qubit A.  BPRV uses the same three settings on both
// sides.
struct BellSettings {
  std::array<double, 4> chsh_deg{0.0, 45.0, 22.5, 67.5};
  std::array<double, 3> bprv_deg{0.0, 120.0, 240.0};
};

inline double deg_to_rad(double deg) {
  return deg * (3.14159265358979323846 / 180.0);
}

// rho[(m_A m_B), (m_A' m_B')] = sum_p c_{m_A m_B p} conj(c_{m_A' m_B' p})
// with row/column index r = 2 m_A + m_B over the basis {00, 01, 10, 11}.
inline Matrix4c reduce_to_pair(const StateVector& s) {
  if (s.amp.size() < 4 || (s.amp.size() & (s.amp.size() - 1)) != 0)
    throw std::invalid_argument("reduce_to_pair: bad state dimension");

  Matrix4c rho = Matrix4c::Zero();
  const std::size_t n_env_cfg = s.amp.size() / 4;
  for (std::size_t p = 0; p < n_env_cfg; ++p) {
    complexd a[4];
    for (int r = 0; r < 4; ++r) {
      const int m_a = r >> 1;
      const int m_b = r & 1;
      a[r] = s.amp[basis_index(m_a, m_b, p)];
    }
    for (int r = 0; r < 4; ++r)
      for (int c = r; c < 4; ++c) rho(r, c) += a[r] * std::conj(a[c]);
  }
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < r; ++c) rho(r, c) = std::conj(rho(c, r));
  return rho;
}

// R(theta)|0> = cos|0> - sin|1>, R(theta)|1> = sin|0> + cos|1>.
inline Matrix2d rotation(double theta_rad) {
  const double c = std::cos(theta_rad);
  const double s = std::sin(theta_rad);
  Matrix2d r;
  r << c, s, -s, c;
  return r;
}

namespace detail {

// Projector onto the rotated basis state R(theta)|l>.
inline Matrix2d basis_projector(double theta_rad, int l) {
  const Eigen::Vector2d u = rotation(theta_rad).col(l);
  return u * u.transpose();
}

// Kronecker product with qubit A as the high index, matching the
// reduced-density packing r = 2 m_A + m_B.
inline Matrix4d kron2(const Matrix2d& a, const Matrix2d& b) {
  Matrix4d out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

inline double expectation(const Matrix4c& rho, const Matrix4d& op) {
  return (rho * op.cast<complexd>()).trace().real();
}

}  // namespace detail

// S_CHSH = |E(a,b) - E(a,b') + E(a',b) + E(a',b')| with
// E(x,y) = Tr(rho P_x(x,y)) and P_x the joint-parity operator built from
// the rotated-basis projectors; outcomes are encoded -1 for |0> and +1
// for |1>.
inline double chsh_correlator(const Matrix4c& rho,
                              const BellSettings& settings = {}) {
  auto outcome_op = [](double theta_rad) -> Matrix2d {
    return detail::basis_projector(theta_rad, 1) -
           detail::basis_projector(theta_rad, 0);
  };
  const double a = deg_to_rad(settings.chsh_deg[0]);
  const double ap = deg_to_rad(settings.chsh_deg[1]);
  const double b = deg_to_rad(settings.chsh_deg[2]);
  const double bp = deg_to_rad(settings.chsh_deg[3]);

  auto corr = [&](double x, double y) {
    return detail::expectation(rho, detail::kron2(outcome_op(x), outcome_op(y)));
  };
  return std::abs(corr(a, b) - corr(a, bp) + corr(ap, b) + corr(ap, bp));
}

// S_BPRV = sum_k <P^same_kk> + sum_{k != l} <P^opp_kl>: three same-
// setting same-outcome terms plus six ordered opposite-outcome terms
// over the three settings.
inline double bprv_correlator(const Matrix4c& rho,
                              const BellSettings& settings = {}) {
  std::array<Matrix2d, 3> p0, p1;
  for (int k = 0; k < 3; ++k) {
    const double theta = deg_to_rad(settings.bprv_deg[k]);
    p0[k] = detail::basis_projector(theta, 0);
    p1[k] = detail::basis_projector(theta, 1);
  }

  double total = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Matrix4d same = detail::kron2(p0[k], p0[k]) + detail::kron2(p1[k], p1[k]);
    total += detail::expectation(rho, same);
  }
  for (int k = 0; k < 3; ++k) {
    for (int l = 0; l < 3; ++l) {
      if (l == k) continue;
      const Matrix4d opp = detail::kron2(p0[k], p1[l]) + detail::kron2(p1[k], p0[l]);
      total += detail::expectation(rho, opp);
    }
  }
  return total;
}

namespace detail {

// Eigenvalues of a Hermitian 4x4, clamped to [0, inf).  Values below
// -tol signal an invalid density matrix and raise.
inline Eigen::Vector4d psd_eigenvalues(const Matrix4c& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix4c> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("psd_eigenvalues: eigensolver failed");
  Eigen::Vector4d ev = es.eigenvalues();
  for (int i = 0; i < 4; ++i) {
    if (ev[i] < -tol)
      throw std::runtime_error("psd_eigenvalues: matrix is not PSD");
    ev[i] = std::max(0.0, ev[i]);
  }
  return ev;
}

}  // namespace detail

// Binary entropy in bits; h(0) = h(1) = 0.
inline double binary_entropy(double p) {
  double acc = 0.0;
  if (p > 0.0) acc -= p * std::log2(p);
  if (p < 1.0) acc -= (1.0 - p) * std::log2(1.0 - p);
  return acc;
}

// S = -sum lambda log2 lambda in bits.  Eigenvalues in [-1e-10, 0) are
// treated as 0; anything lower raises.
inline double von_neumann_entropy(const Matrix4c& rho) {
  const Eigen::Vector4d ev = detail::psd_eigenvalues(rho, 1e-10);
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    if (ev[i] > 0.0) s -= ev[i] * std::log2(ev[i]);
  return s;
}

// Wootters concurrence: C = max(0, l1 - l2 - l3 - l4) with l_i the
// descending square roots of the eigenvalues of rho rho~, where
// rho~ = (Y x Y) rho* (Y x Y).  The eigenvalues are obtained from the
// Hermitian product sqrt(rho) rho~ sqrt(rho), which shares them.
inline double concurrence(const Matrix4c& rho) {
  Matrix4c yy = Matrix4c::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Matrix4c rho_tilde = yy * rho.conjugate() * yy;

  Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("concurrence: eigensolver failed");
  Eigen::Vector4d ev = es.eigenvalues();
  for (int i = 0; i < 4; ++i) {
    if (ev[i] < -1e-10)
      throw std::runtime_error("concurrence: matrix is not PSD");
    ev[i] = std::sqrt(std::max(0.0, ev[i]));
  }
  const Matrix4c sqrt_rho =
      es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();

  Eigen::Vector4d mu =
      detail::psd_eigenvalues(sqrt_rho * rho_tilde * sqrt_rho, 1e-10);
  std::array<double, 4> lam{std::sqrt(mu[0]), std::sqrt(mu[1]),
                            std::sqrt(mu[2]), std::sqrt(mu[3])};
  std::sort(lam.begin(), lam.end(), std::greater<>());
  return std::max(0.0, lam[0] - lam[1] - lam[2] - lam[3]);
}

// EoF = h((1 + sqrt(1 - C^2)) / 2) in bits.
inline double entanglement_of_formation(const Matrix4c& rho) {
  const double c = concurrence(rho);
  const double x = std::sqrt(std::max(0.0, 1.0 - c * c));
  return binary_entropy(0.5 * (1.0 + x));
}

}  // namespace dqdsim
