#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dynamics.hpp"

namespace couette_ep {

struct IntegrateOptions {
  double tol = 1e-8;    // per-step local error tolerance (relative)
  double cap_c = 0.1;   // proportional cap dt <= cap_c / (1 + ||L(t)||_inf)
  double dt_min = 1e-9; // below this the step controller gives up
};

/// Raised when the error controller cannot proceed without dt < dt_min,
/// which signals ill-conditioned input (e.g. enormous |xi|).
struct StepSizeUnderflow : std::runtime_error {
  ModeCoord mode;
  double t, dt;
  StepSizeUnderflow(ModeCoord m, double t_, double dt_)
      : std::runtime_error(format(m, t_, dt_)), mode(m), t(t_), dt(dt_) {}

 private:
  static std::string format(ModeCoord m, double t, double dt) {
    std::ostringstream os;
    os << "step size underflow at t = " << t << " (dt = " << dt << ") for mode k = " << m.k
       << ", xi = " << m.xi;
    return os.str();
  }
};

namespace detail {

/// Adaptive stepper for one mode of the symmetrized system. Advances the state
/// A, the fundamental matrix V (dV/dt = L V) and the Duhamel quadrature
/// W(t) = int adj(V) M ds with a classical RK4 step; the local error is
/// estimated with Zonneveld's embedded third-order companion (one extra stage).
/// Accepted steps also accumulate the total variations of h/gamma and
/// log(lambda), with a forced landing at the critical time t = xi/k so the
/// accumulation never straddles the turning point of lambda.
class ModeStepper {
 public:
  ModeStepper(ModeCoord mode, const PlasmaParams& pp, Species sp, Complex forcing,
              const IntegrateOptions& opt, bool with_state = true)
      : mode_(mode), pp_(pp), sp_(sp), forcing_(forcing), opt_(opt), with_state_(with_state) {
    if (mode.k == 0) throw std::invalid_argument("integrate: mode k must be nonzero");
    if (!(opt.tol > 0.0 && opt.cap_c > 0.0 && opt.dt_min > 0.0))
      throw std::invalid_argument("integrate: tol, cap_c and dt_min must be positive");
  }

  void start(double t0, const SymPair& a0) {
    t_ = t0;
    A_ = a0;
    V_ = Mat2::identity();
    W_ = {};
    tv_hg_ = tv_ll_ = 0.0;
    b_ = coeffs(t0, mode_, pp_, sp_);
    dt_next_ = cap(b_);
  }

  /// Integrate up to `target` (>= current time), landing on it exactly.
  void advance_to(double target) {
    while (t_ < target) {
      double barrier = target;
      const double tc = critical_time(mode_);
      if (tc > t_ && tc < barrier) barrier = tc;
      run_to_barrier(barrier);
    }
  }

  double t() const { return t_; }
  const SymPair& state() const { return A_; }
  const Mat2& fundamental() const { return V_; }
  const Vec2& duhamel() const { return W_; }
  double tv_h_over_gamma() const { return tv_hg_; }
  double tv_log_lambda() const { return tv_ll_; }
  const CoeffBundle& bundle() const { return b_; }
  std::size_t n_accepted() const { return n_accepted_; }
  std::size_t n_rejected() const { return n_rejected_; }

 private:
  struct Deriv {
    SymPair dA;
    Mat2 dV;
    Vec2 dW;
  };

  Deriv deriv(const CoeffBundle& b, const SymPair& A, const Mat2& V) const {
    const Mat2 L = build_L(b);
    const Vec2 M = build_M(b, mode_);
    Deriv d;
    if (with_state_) d.dA = L * A + M * forcing_;
    d.dV = L * V;
    d.dW = V.adjugate() * M;
    return d;
  }

  double cap(const CoeffBundle& b) const { return opt_.cap_c / (1.0 + build_L(b).norm_inf()); }

  void run_to_barrier(double barrier) {
    while (t_ < barrier) {
      double dt = std::min({dt_next_, cap(b_), barrier - t_});
      bool hit = dt >= barrier - t_;
      for (;;) {
        // Underflow only when the controller forces dt below the floor; a
        // remaining gap to a landing smaller than dt_min is taken as-is.
        if (dt < opt_.dt_min && !hit) throw StepSizeUnderflow(mode_, t_, dt);
        const double ratio = try_step(dt);
        if (ratio <= 1.0) {
          const double grow = 0.9 * std::pow(std::max(ratio, 1e-8), -0.25);
          const double proposal = dt * std::clamp(grow, 0.2, 5.0);
          // A barrier-truncated step says nothing about the accuracy-limited
          // size; never let it shrink the controller's suggestion.
          dt_next_ = hit ? std::max(dt_next_, proposal) : proposal;
          break;
        }
        ++n_rejected_;
        hit = false;
        dt *= std::clamp(0.9 * std::pow(ratio, -0.25), 0.1, 0.9);
      }
      ++n_accepted_;
      const double t_new = hit ? barrier : t_ + dt;
      CoeffBundle b_new = hit ? coeffs(t_new, mode_, pp_, sp_) : b_end_;
      tv_hg_ += std::abs(b_new.h / b_new.gamma - b_.h / b_.gamma);
      tv_ll_ += std::abs(std::log(b_new.lambda) - std::log(b_.lambda));
      t_ = t_new;
      b_ = b_new;
      A_ = A_acc_;
      V_ = V_acc_;
      W_ = W_acc_;
    }
  }

  /// One trial step of size dt. Fills the accepted-candidate slots and returns
  /// the scaled error ratio (<= 1 means accept).
  double try_step(double dt) {
    const Deriv k1 = deriv(b_, A_, V_);
    const CoeffBundle b_mid = coeffs(t_ + 0.5 * dt, mode_, pp_, sp_);
    const Deriv k2 = deriv(b_mid, A_ + (0.5 * dt) * k1.dA, V_ + (0.5 * dt) * k1.dV);
    const Deriv k3 = deriv(b_mid, A_ + (0.5 * dt) * k2.dA, V_ + (0.5 * dt) * k2.dV);
    b_end_ = coeffs(t_ + dt, mode_, pp_, sp_);
    const Deriv k4 = deriv(b_end_, A_ + dt * k3.dA, V_ + dt * k3.dV);
    const CoeffBundle b_34 = coeffs(t_ + 0.75 * dt, mode_, pp_, sp_);
    const double d32 = dt / 32.0;
    const Deriv k5 = deriv(
        b_34, A_ + (5.0 * d32) * k1.dA + (7.0 * d32) * k2.dA + (13.0 * d32) * k3.dA - d32 * k4.dA,
        V_ + (5.0 * d32) * k1.dV + (7.0 * d32) * k2.dV + (13.0 * d32) * k3.dV - d32 * k4.dV);

    const double d6 = dt / 6.0;
    A_acc_ = A_ + d6 * k1.dA + (2.0 * d6) * (k2.dA + k3.dA) + d6 * k4.dA;
    V_acc_ = V_ + d6 * k1.dV + (2.0 * d6) * (k2.dV + k3.dV) + d6 * k4.dV;
    W_acc_ = W_ + d6 * k1.dW + (2.0 * d6) * (k2.dW + k3.dW) + d6 * k4.dW;

    // RK4 minus the embedded third-order solution: b - bhat = (2/3, -2, -2, -2, 16/3).
    const double c1 = dt * (2.0 / 3.0), c2 = -2.0 * dt, c5 = dt * (16.0 / 3.0);
    double ratio = 0.0;
    if (with_state_) {
      const SymPair eA = c1 * k1.dA + c2 * (k2.dA + k3.dA + k4.dA) + c5 * k5.dA;
      const double sA = std::max(norm_inf(A_), norm_inf(A_acc_)) + std::abs(forcing_) + 1e-300;
      ratio = norm_inf(eA) / (opt_.tol * sA);
    }
    const Mat2 eV = c1 * k1.dV + c2 * (k2.dV + k3.dV + k4.dV) + c5 * k5.dV;
    ratio = std::max(ratio, eV.norm_inf() / (opt_.tol * std::max(V_.norm_inf(), 1.0)));
    const Vec2 eW = c1 * k1.dW + c2 * (k2.dW + k3.dW + k4.dW) + c5 * k5.dW;
    const double sW = std::max(std::abs(W_.x0), std::abs(W_.x1)) + 1.0;
    ratio = std::max(ratio, std::max(std::abs(eW.x0), std::abs(eW.x1)) / (opt_.tol * sW));
    return ratio;
  }

  ModeCoord mode_;
  PlasmaParams pp_;
  Species sp_;
  Complex forcing_;
  IntegrateOptions opt_;
  bool with_state_;

  double t_ = 0.0, dt_next_ = 0.0;
  SymPair A_;
  Mat2 V_ = Mat2::identity();
  Vec2 W_;
  double tv_hg_ = 0.0, tv_ll_ = 0.0;
  CoeffBundle b_, b_end_;
  SymPair A_acc_;
  Mat2 V_acc_;
  Vec2 W_acc_;
  std::size_t n_accepted_ = 0, n_rejected_ = 0;
};

}  // namespace detail

/// Trajectory of one mode at the requested output times.
struct ModeTrajectory {
  ModeCoord mode;
  Species species = Species::ion;
  SymPair initial;
  Complex forcing{};
  std::vector<double> times;
  std::vector<SymPair> states;
  std::vector<Mat2> fundamental;        // Phi(t), Phi(0) = I, det = 1 up to solver error
  std::vector<Vec2> duhamel;            // I(t) = int_0^t adj(Phi(s)) M(s) ds
  std::vector<double> energies;         // E(t) of the state
  std::vector<double> tv_h_over_gamma;  // accumulated total variation up to t
  std::vector<double> tv_log_lambda;
  std::size_t n_accepted = 0, n_rejected = 0;

  /// Lower-bound functional R(t) = A_in + I(t) F_in (so R(0) = A_in exactly).
  SymPair r_functional(std::size_t i) const { return initial + duhamel[i] * forcing; }
};

/// Integrate d/dt A = L(t) A + M(t) F over the given output times (strictly
/// increasing, starting at 0), co-integrating the fundamental matrix and the
/// Duhamel quadrature.
inline ModeTrajectory integrate_mode(const SymPair& initial, Complex forcing, ModeCoord mode,
                                     const PlasmaParams& pp, Species sp,
                                     std::span<const double> times,
                                     const IntegrateOptions& opt = {}) {
  if (times.empty()) throw std::invalid_argument("integrate_mode: empty time grid");
  if (times.front() != 0.0) throw std::invalid_argument("integrate_mode: times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("integrate_mode: times must be strictly increasing");
  pp.validate();

  ModeTrajectory tr;
  tr.mode = mode;
  tr.species = sp;
  tr.initial = initial;
  tr.forcing = forcing;
  tr.times.assign(times.begin(), times.end());
  const std::size_t n = times.size();
  tr.states.reserve(n);
  tr.fundamental.reserve(n);
  tr.duhamel.reserve(n);
  tr.energies.reserve(n);
  tr.tv_h_over_gamma.reserve(n);
  tr.tv_log_lambda.reserve(n);

  detail::ModeStepper stepper(mode, pp, sp, forcing, opt);
  stepper.start(0.0, initial);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) stepper.advance_to(times[i]);
    tr.states.push_back(stepper.state());
    tr.fundamental.push_back(stepper.fundamental());
    tr.duhamel.push_back(stepper.duhamel());
    tr.energies.push_back(energy(stepper.state(), stepper.bundle()));
    tr.tv_h_over_gamma.push_back(stepper.tv_h_over_gamma());
    tr.tv_log_lambda.push_back(stepper.tv_log_lambda());
  }
  tr.n_accepted = stepper.n_accepted();
  tr.n_rejected = stepper.n_rejected();
  return tr;
}

/// Trajectory-free Duhamel evaluation at a single time,
///   A(t) = Phi(t) (A_in + int_0^t adj(Phi(s)) M(s) F ds),
/// cross-validating the direct forced integration of integrate_mode.
inline SymPair duhamel_solution(const SymPair& initial, Complex forcing, ModeCoord mode,
                                const PlasmaParams& pp, Species sp, double t,
                                const IntegrateOptions& opt = {}) {
  if (t < 0.0) throw std::invalid_argument("duhamel_solution: t must be >= 0");
  pp.validate();
  detail::ModeStepper stepper(mode, pp, sp, forcing, opt, /*with_state=*/false);
  stepper.start(0.0, SymPair{});
  stepper.advance_to(t);
  return stepper.fundamental() * (initial + stepper.duhamel() * forcing);
}

}  // namespace couette_ep
