#pragma once

#include <cmath>
#include <complex>
#include <utility>

#include "linalg.hpp"
#include "params.hpp"

namespace couette_ep {

/// Symmetrized per-mode state (two complex components).
/// Ion:      c1 = sqrt(T+/m+) Pi / alpha^{1/4},   c2 = Psi / alpha^{3/4}
/// Electron: c1 = Pi / (sqrt(m-) alpha^{1/4}),    c2 = Psi / alpha^{3/4}
struct SymPair {
  Complex c1{}, c2{};
};

inline SymPair operator+(const SymPair& a, const SymPair& b) { return {a.c1 + b.c1, a.c2 + b.c2}; }
inline SymPair operator-(const SymPair& a, const SymPair& b) { return {a.c1 - b.c1, a.c2 - b.c2}; }
inline SymPair operator*(double s, const SymPair& a) { return {s * a.c1, s * a.c2}; }
inline SymPair operator*(const Mat2& m, const SymPair& a) {
  return {m.a00 * a.c1 + m.a01 * a.c2, m.a10 * a.c1 + m.a11 * a.c2};
}
inline SymPair operator*(const Vec2& v, Complex s) { return {v.x0 * s, v.x1 * s}; }
inline double abs2(const SymPair& a) { return std::norm(a.c1) + std::norm(a.c2); }
inline double norm_inf(const SymPair& a) { return std::max(std::abs(a.c1), std::abs(a.c2)); }
inline SymPair conj(const SymPair& a) { return {std::conj(a.c1), std::conj(a.c2)}; }

/// Time-dependent coefficients of the symmetrized mode ODE
///   d/dt (c1, c2) = [[-h, -m_coef], [p_coef, h]] (c1, c2) + M(t) F_in.
struct CoeffBundle {
  double alpha = 0.0;
  double dt_alpha = 0.0;
  double root_alpha = 0.0;  // alpha^{1/2}, cached for the weight factors
  double h = 0.0;           // (1/4) alpha' / alpha
  double m_coef = 0.0;      // upper coupling
  double p_coef = 0.0;      // lower coupling
  double lambda = 0.0;      // sqrt(p_coef / m_coef)
  double gamma = 0.0;       // sqrt(p_coef * m_coef)
};

inline CoeffBundle coeffs(double t, ModeCoord mode, const PlasmaParams& pp, Species sp) {
  const double al = alpha(t, mode);
  const double dal = dt_alpha(t, mode);
  const double k2 = static_cast<double>(mode.k) * mode.k;
  const double a = std::sqrt(al);
  const double h = 0.25 * dal / al;
  double m, p;
  if (sp == Species::ion) {
    const double T = pp.ion_T(), Ms = pp.ion_m(), q = pp.q();
    const double sT = std::sqrt(T / Ms);
    m = sT * a;
    p = q / std::sqrt(Ms * T) * a / (al + q / pp.ion_T_screen()) + 2.0 * k2 / (sT * al * a) +
        sT * a;
  } else {
    const double rm = std::sqrt(pp.electron_m());
    const double q = pp.q();
    m = a / rm;
    p = q / (rm * a) + 2.0 * k2 * rm / (al * a) + a / rm;
  }
  return {al, dal, a, h, m, p, std::sqrt(p / m), std::sqrt(p * m)};
}

/// Upper bound for lambda^2 over all modes and times (attained as alpha -> k^2 = 1).
inline double lambda_sq_max(const PlasmaParams& pp, Species sp) {
  if (sp == Species::ion) return 1.0 + pp.q() / pp.ion_T() + 2.0 * pp.ion_m() / pp.ion_T();
  return 1.0 + pp.q() + 2.0 * pp.electron_m();
}

/// Species bound for |h| / gamma: sqrt(2)/2 (ion), sqrt(2)/4 (electron).
inline double h_over_gamma_max(Species sp) {
  return sp == Species::ion ? std::sqrt(2.0) / 2.0 : std::sqrt(2.0) / 4.0;
}

/// Gronwall prefactor of the energy lemma: 2 + sqrt(2) (ion), 2 + sqrt(2)/2 (electron).
inline double gronwall_prefactor(Species sp) {
  return sp == Species::ion ? 2.0 + std::sqrt(2.0) : 2.0 + std::sqrt(2.0) / 2.0;
}

/// Bound for the total variation of h/gamma over the whole trajectory.
inline double tv_h_over_gamma_bound(Species sp) {
  return sp == Species::ion ? 14.0 * std::sqrt(2.0) : 4.0 * std::sqrt(2.0);
}

/// Bound for the total variation of log(lambda): log of the lambda^2 range.
inline double tv_log_lambda_bound(const PlasmaParams& pp, Species sp) {
  return std::log(lambda_sq_max(pp, sp));
}

inline Mat2 build_L(const CoeffBundle& b) { return {-b.h, -b.m_coef, b.p_coef, b.h}; }

/// Forcing direction: M = (0, -2 k^2 / alpha^{7/4}); the mode ODE forcing is M * F_in.
inline Vec2 build_M(const CoeffBundle& b, ModeCoord mode) {
  const double k2 = static_cast<double>(mode.k) * mode.k;
  const double quarter = std::sqrt(b.root_alpha);  // alpha^{1/4}
  return {0.0, -2.0 * k2 / (b.alpha * b.root_alpha * quarter)};
}

/// Species weight applied to Pi in the symmetrized state.
inline double pi_weight(const PlasmaParams& pp, Species sp) {
  return sp == Species::ion ? std::sqrt(pp.ion_T() / pp.ion_m())
                            : 1.0 / std::sqrt(pp.electron_m());
}

inline SymPair symmetrize(Complex pi_hat, Complex psi_hat, double t, ModeCoord mode,
                          const PlasmaParams& pp, Species sp) {
  const double al = alpha(t, mode);
  const double root = std::sqrt(al);
  const double quarter = std::sqrt(root);
  return {pi_weight(pp, sp) / quarter * pi_hat, 1.0 / (root * quarter) * psi_hat};
}

/// Inverse of symmetrize: recovers (pi_hat, psi_hat).
inline std::pair<Complex, Complex> unsymmetrize(const SymPair& s, double t, ModeCoord mode,
                                                const PlasmaParams& pp, Species sp) {
  const double al = alpha(t, mode);
  const double root = std::sqrt(al);
  const double quarter = std::sqrt(root);
  return {quarter / pi_weight(pp, sp) * s.c1, root * quarter * s.c2};
}

/// Twisted energy functional E = lambda |c1|^2 + 2 (h/gamma) Re(c1 conj(c2)) + |c2|^2 / lambda.
inline double energy(const SymPair& s, const CoeffBundle& b) {
  return b.lambda * std::norm(s.c1) +
         2.0 * (b.h / b.gamma) * (s.c1 * std::conj(s.c2)).real() + std::norm(s.c2) / b.lambda;
}

/// Diagonal part of the energy: lambda |c1|^2 + |c2|^2 / lambda.
/// Sandwich: (1 - r) Etilde <= E <= (1 + r) Etilde with r = |h|/gamma bound.
inline double energy_tilde(const SymPair& s, const CoeffBundle& b) {
  return b.lambda * std::norm(s.c1) + std::norm(s.c2) / b.lambda;
}

}  // namespace couette_ep
