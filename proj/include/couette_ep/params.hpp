#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace couette_ep {

enum class Species { ion, electron };

inline const char* species_name(Species s) { return s == Species::ion ? "ion" : "electron"; }

inline Species species_from_name(const std::string& name) {
  if (name == "ion") return Species::ion;
  if (name == "electron") return Species::electron;
  throw std::invalid_argument("unknown species: " + name);
}

/// Background parameters of the linearized plasma. Ion runs use T_plus, T_minus,
/// m_plus and e; electron runs use only m_minus and e (enforced by the accessors
/// below, which are what the coefficient formulas go through).
struct PlasmaParams {
  double T_plus = 1.0;   // ion temperature
  double T_minus = 1.0;  // electron temperature (ion Poisson screening)
  double m_plus = 1.0;   // ion mass
  double m_minus = 1.0;  // electron mass
  double e = default_e();

  /// e such that 4*pi*e^2 = 1, the all-ones normalization.
  static double default_e() { return 1.0 / std::sqrt(4.0 * std::numbers::pi); }

  static PlasmaParams all_ones() { return PlasmaParams{}; }

  /// Poisson coupling 4*pi*e^2.
  double q() const { return 4.0 * std::numbers::pi * e * e; }
  double four_pi_e() const { return 4.0 * std::numbers::pi * e; }

  double ion_T() const { return checked(T_plus, "T_plus"); }
  double ion_T_screen() const { return checked(T_minus, "T_minus"); }
  double ion_m() const { return checked(m_plus, "m_plus"); }
  double electron_m() const { return checked(m_minus, "m_minus"); }

  void validate() const {
    checked(T_plus, "T_plus");
    checked(T_minus, "T_minus");
    checked(m_plus, "m_plus");
    checked(m_minus, "m_minus");
    checked(e, "e");
  }

 private:
  static double checked(double v, const char* name) {
    if (!(std::isfinite(v) && v > 0.0))
      throw std::invalid_argument(std::string("PlasmaParams: ") + name +
                                  " must be finite and positive");
    return v;
  }
};

/// One Fourier mode of the moving-frame formulation: integer x wavenumber k
/// (never 0 for an evolved mode) and continuous y frequency xi.
struct ModeCoord {
  int k = 1;
  double xi = 0.0;
};

/// Symbol of -Laplacian in the moving frame: alpha = k^2 + (xi - k t)^2.
inline double alpha(double t, ModeCoord m) {
  const double u = m.xi - m.k * t;
  return static_cast<double>(m.k) * m.k + u * u;
}

/// d/dt alpha = -2 k (xi - k t). Vanishes exactly at the critical time t = xi/k.
inline double dt_alpha(double t, ModeCoord m) { return -2.0 * m.k * (m.xi - m.k * t); }

/// Time at which alpha is minimal (= k^2) for this mode.
inline double critical_time(ModeCoord m) { return m.xi / m.k; }

/// Japanese bracket <a> = (1 + a^2)^{1/2}.
inline double bracket(double a) { return std::sqrt(1.0 + a * a); }

}  // namespace couette_ep
