#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "params.hpp"

namespace couette_ep {

/// Mode lattice: integer k in [-k_max, -1] U [1, k_max] (k = 0 carries no
/// dynamics in the moving frame and is excluded), uniform xi samples.
struct FrequencyGrid {
  int k_max = 8;
  double xi_min = -32.0;
  double xi_max = 32.0;
  int n_xi = 513;

  void validate() const {
    if (k_max < 1) throw std::invalid_argument("grid: k_max must be >= 1");
    if (n_xi < 2) throw std::invalid_argument("grid: n_xi must be >= 2");
    if (!(std::isfinite(xi_min) && std::isfinite(xi_max) && xi_min < xi_max))
      throw std::invalid_argument("grid: xi_min < xi_max required");
  }

  int n_k() const { return 2 * k_max; }
  int k_at(int ik) const { return ik < k_max ? ik - k_max : ik - k_max + 1; }
  int index_of_k(int k) const {
    if (k == 0 || k < -k_max || k > k_max) throw std::invalid_argument("grid: k out of range");
    return k < 0 ? k + k_max : k + k_max - 1;
  }
  double d_xi() const { return (xi_max - xi_min) / (n_xi - 1); }
  double xi_at(int j) const { return xi_min + j * d_xi(); }
  int nearest_j(double xi) const {
    int j = static_cast<int>(std::lround((xi - xi_min) / d_xi()));
    return std::clamp(j, 0, n_xi - 1);
  }
  std::size_t size() const { return static_cast<std::size_t>(n_k()) * n_xi; }
  std::size_t idx(int ik, int j) const { return static_cast<std::size_t>(ik) * n_xi + j; }
  ModeCoord mode(int ik, int j) const { return {k_at(ik), xi_at(j)}; }

  /// True when xi_at(n_xi-1-j) == -xi_at(j) for all j (needed for the
  /// conjugate-mirror fast path on real-field data).
  bool xi_symmetric() const {
    if (std::abs(xi_min + xi_max) > 1e-12 * std::max(std::abs(xi_min), 1.0)) return false;
    for (int j : {0, 1, n_xi / 2, n_xi - 1})
      if (xi_at(n_xi - 1 - j) != -xi_at(j)) return false;
    return true;
  }

  bool operator==(const FrequencyGrid&) const = default;
};

struct UnknownProfile : std::invalid_argument {
  explicit UnknownProfile(const std::string& name)
      : std::invalid_argument("unknown initial profile: " + name) {}
};

struct ProfileOptions {
  std::string profile = "gaussian_bump";
  double amplitude = 1.0;
  double width = 1.0;
  double xi0 = 0.0;
  std::uint64_t seed = 42;
  int mode_k = 1;               // single_mode target wavenumber
  double mode_xi = 0.0;         // single_mode target frequency (snapped to grid)
  std::string field = "eta";    // single_mode target field
  double band_halfwidth = 4.0;  // random_band support |xi - xi0| <= band_halfwidth
  bool hermitian = true;        // random_band: enforce f(-k,-xi) = conj f(k,xi)
};

/// Initial data on the grid, stored per (k, xi) sample in k-major order.
struct InitialSpec {
  FrequencyGrid grid;
  std::vector<Complex> eta_hat, psi_hat, omega_hat;
  std::vector<Complex> f_hat;  // eta_hat + omega_hat, the conserved combination
  bool reality = false;        // data satisfies f(-k,-xi) = conj f(k,xi)
  std::string profile;
  std::uint64_t seed = 0;

  SymPair initial_state(std::size_t i, ModeCoord mode, const PlasmaParams& pp, Species sp) const {
    return symmetrize(eta_hat[i], psi_hat[i], 0.0, mode, pp, sp);
  }
};

namespace detail {

inline double unit_double(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;  // [0, 1)
}

}  // namespace detail

inline InitialSpec make_initial(const FrequencyGrid& grid, const ProfileOptions& po = {}) {
  grid.validate();
  if (!(std::isfinite(po.amplitude))) throw std::invalid_argument("profile: bad amplitude");
  InitialSpec spec;
  spec.grid = grid;
  spec.profile = po.profile;
  spec.seed = po.seed;
  const std::size_t n = grid.size();
  spec.eta_hat.assign(n, Complex{});
  spec.psi_hat.assign(n, Complex{});
  spec.omega_hat.assign(n, Complex{});

  if (po.profile == "gaussian_bump") {
    if (!(po.width > 0.0)) throw std::invalid_argument("profile: width must be positive");
    for (int ik = 0; ik < grid.n_k(); ++ik) {
      const double kamp = po.amplitude * std::ldexp(1.0, -std::abs(grid.k_at(ik)));
      for (int j = 0; j < grid.n_xi; ++j) {
        const double u = (grid.xi_at(j) - po.xi0) / po.width;
        const Complex v{kamp * std::exp(-0.5 * u * u), 0.0};
        const std::size_t i = grid.idx(ik, j);
        spec.eta_hat[i] = spec.psi_hat[i] = spec.omega_hat[i] = v;
      }
    }
    spec.reality = po.xi0 == 0.0 && grid.xi_symmetric();
  } else if (po.profile == "single_mode") {
    const int ik = grid.index_of_k(po.mode_k);
    const std::size_t i = grid.idx(ik, grid.nearest_j(po.mode_xi));
    std::vector<Complex>* target = nullptr;
    if (po.field == "eta")
      target = &spec.eta_hat;
    else if (po.field == "psi")
      target = &spec.psi_hat;
    else if (po.field == "omega")
      target = &spec.omega_hat;
    else
      throw std::invalid_argument("profile: field must be eta, psi or omega");
    (*target)[i] = Complex{po.amplitude, 0.0};
    spec.reality = false;
  } else if (po.profile == "random_band") {
    std::mt19937_64 eng(po.seed);
    auto draw = [&eng] {
      return Complex{2.0 * detail::unit_double(eng) - 1.0, 2.0 * detail::unit_double(eng) - 1.0};
    };
    for (int ik = 0; ik < grid.n_k(); ++ik) {
      const double kamp = po.amplitude * std::ldexp(1.0, -std::abs(grid.k_at(ik)));
      for (int j = 0; j < grid.n_xi; ++j) {
        const bool in_band = std::abs(grid.xi_at(j) - po.xi0) <= po.band_halfwidth;
        const std::size_t i = grid.idx(ik, j);
        // Draw unconditionally so the stream stays aligned across band choices.
        const Complex e = draw(), p = draw(), o = draw();
        if (!in_band) continue;
        spec.eta_hat[i] = kamp * e;
        spec.psi_hat[i] = kamp * p;
        spec.omega_hat[i] = kamp * o;
      }
    }
    if (po.hermitian && grid.xi_symmetric() && po.xi0 == 0.0) {
      for (int ik = 0; ik < grid.n_k(); ++ik) {
        if (grid.k_at(ik) >= 0) continue;
        const int mk = grid.index_of_k(-grid.k_at(ik));
        for (int j = 0; j < grid.n_xi; ++j) {
          const std::size_t dst = grid.idx(ik, j), src = grid.idx(mk, grid.n_xi - 1 - j);
          spec.eta_hat[dst] = std::conj(spec.eta_hat[src]);
          spec.psi_hat[dst] = std::conj(spec.psi_hat[src]);
          spec.omega_hat[dst] = std::conj(spec.omega_hat[src]);
        }
      }
      spec.reality = true;
    } else {
      spec.reality = false;
    }
  } else {
    throw UnknownProfile(po.profile);
  }

  spec.f_hat.resize(n);
  for (std::size_t i = 0; i < n; ++i) spec.f_hat[i] = spec.eta_hat[i] + spec.omega_hat[i];
  return spec;
}

}  // namespace couette_ep
