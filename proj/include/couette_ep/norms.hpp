#pragma once

#include <cmath>
#include <span>

#include "evolve.hpp"

namespace couette_ep {

namespace detail {

/// Trapezoid weight on the uniform xi grid (without the d_xi factor).
inline double trap_w(int j, int n) { return (j == 0 || j == n - 1) ? 0.5 : 1.0; }

}  // namespace detail

/// Squared Plancherel norms of the Helmholtz pieces at one snapshot time:
///   pux: solenoidal x-velocity,  (xi-kt)^2/alpha^2 |Gamma|^2
///   puy: solenoidal y-velocity,  k^2/alpha^2 |Gamma|^2
///   qu : gradient part,          1/alpha |Psi|^2
///   eta: density,                |Pi|^2
///   phi: potential,              (4 pi e)^2 w(alpha) |Pi|^2 with the species
///        Poisson weight w = (alpha + q/T_-)^{-2} (ion) or alpha^{-2} (electron).
struct HelmholtzNorms {
  double pux = 0.0, puy = 0.0, qu = 0.0, eta = 0.0, phi = 0.0;
};

inline HelmholtzNorms helmholtz_norms(const SpectralSnapshot& snap, const PlasmaParams& pp,
                                      Species sp) {
  const FrequencyGrid& grid = snap.grid;
  const double dxi = grid.d_xi();
  const double fpe2 = pp.four_pi_e() * pp.four_pi_e();
  const double screen = sp == Species::ion ? pp.q() / pp.ion_T_screen() : 0.0;
  double pux = 0.0, puy = 0.0, qu = 0.0, eta = 0.0, phi = 0.0;
  for (int ik = 0; ik < grid.n_k(); ++ik) {
    const double k2 = static_cast<double>(grid.k_at(ik)) * grid.k_at(ik);
    for (int j = 0; j < grid.n_xi; ++j) {
      const std::size_t i = grid.idx(ik, j);
      const double w = detail::trap_w(j, grid.n_xi) * dxi;
      const double u = grid.xi_at(j) - grid.k_at(ik) * snap.t;
      const double al = k2 + u * u;
      const double g2 = std::norm(snap.gamma_hat[i]);
      const double p2 = std::norm(snap.pi_hat[i]);
      pux += w * u * u / (al * al) * g2;
      puy += w * k2 / (al * al) * g2;
      qu += w * std::norm(snap.psi_hat[i]) / al;
      eta += w * p2;
      const double denom = al + screen;
      phi += w * fpe2 / (denom * denom) * p2;
    }
  }
  return {std::sqrt(pux), std::sqrt(puy), std::sqrt(qu), std::sqrt(eta), std::sqrt(phi)};
}

/// sqrt( sum_k int alpha^{1/2} |A|^2 dxi ) at output time index `it`.
/// Identity: equals sqrt(qu^2 + (T+/m+) eta^2) (ion) resp. qu^2 + eta^2/m-.
inline double sym_weighted_norm(const TrajectorySet& set, std::size_t it) {
  const FrequencyGrid& grid = set.grid;
  const double dxi = grid.d_xi();
  const double t = set.times[it];
  double acc = 0.0;
  for (int ik = 0; ik < grid.n_k(); ++ik)
    for (int j = 0; j < grid.n_xi; ++j) {
      const std::size_t i = grid.idx(ik, j);
      const double al = alpha(t, grid.mode(ik, j));
      acc += detail::trap_w(j, grid.n_xi) * dxi * std::sqrt(al) * abs2(set.states[set.idx(i, it)]);
    }
  return std::sqrt(acc);
}

/// Anisotropic Sobolev norm sqrt( sum_k int <k>^{2r} <xi>^{2s} |f|^2 dxi ).
inline double sobolev_norm(const FrequencyGrid& grid, std::span<const Complex> data, double r,
                           double s) {
  const double dxi = grid.d_xi();
  double acc = 0.0;
  for (int ik = 0; ik < grid.n_k(); ++ik) {
    const double kw = std::pow(1.0 + static_cast<double>(grid.k_at(ik)) * grid.k_at(ik), r);
    for (int j = 0; j < grid.n_xi; ++j) {
      const double xi = grid.xi_at(j);
      acc += detail::trap_w(j, grid.n_xi) * dxi * kw * std::pow(1.0 + xi * xi, s) *
             std::norm(data[grid.idx(ik, j)]);
    }
  }
  return std::sqrt(acc);
}

/// Isotropic variant with the joint bracket <(k, xi)>^{2s}.
inline double sobolev_norm_iso(const FrequencyGrid& grid, std::span<const Complex> data,
                               double s) {
  const double dxi = grid.d_xi();
  double acc = 0.0;
  for (int ik = 0; ik < grid.n_k(); ++ik) {
    const double k2 = static_cast<double>(grid.k_at(ik)) * grid.k_at(ik);
    for (int j = 0; j < grid.n_xi; ++j) {
      const double xi = grid.xi_at(j);
      acc += detail::trap_w(j, grid.n_xi) * dxi * std::pow(1.0 + k2 + xi * xi, s) *
             std::norm(data[grid.idx(ik, j)]);
    }
  }
  return std::sqrt(acc);
}

/// Grid norm of the lower-bound functional R at output index `it`:
/// sqrt( sum_k int <xi>^{-1} |R|^2 dxi ), the discrete L^2_x H^{-1/2}_y surrogate.
inline double r_grid_norm(const TrajectorySet& set, std::size_t it) {
  const FrequencyGrid& grid = set.grid;
  const double dxi = grid.d_xi();
  double acc = 0.0;
  for (int ik = 0; ik < grid.n_k(); ++ik)
    for (int j = 0; j < grid.n_xi; ++j) {
      const double xi = grid.xi_at(j);
      acc += detail::trap_w(j, grid.n_xi) * dxi / std::sqrt(1.0 + xi * xi) *
             abs2(set.r_values[set.idx(grid.idx(ik, j), it)]);
    }
  return std::sqrt(acc);
}

}  // namespace couette_ep
