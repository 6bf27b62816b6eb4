#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "grid.hpp"
#include "integrate.hpp"

namespace couette_ep {

struct MissingMode : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvolveOptions {
  IntegrateOptions integ{.tol = 1e-6};
  int threads = 1;         // 0 = hardware concurrency
  bool line_reuse = true;  // share one fundamental-matrix line per k (exact symmetry)
};

/// Evolved grid data at the requested output times, row-major [mode][time].
/// Mode rows follow the grid order (k ascending, xi ascending), which fixes
/// the aggregation order of every norm regardless of thread count.
struct TrajectorySet {
  FrequencyGrid grid;
  Species species = Species::ion;
  PlasmaParams params;
  std::vector<double> times;
  std::vector<SymPair> states;
  std::vector<SymPair> r_values;  // R(t) = A_in + I(t) F_in per mode
  std::vector<double> energies;
  std::vector<double> det_defect;  // per mode: max |det Phi - 1| over output times

  std::size_t nt() const { return times.size(); }
  std::size_t idx(std::size_t mode_row, std::size_t it) const { return mode_row * nt() + it; }
  double max_det_defect() const {
    double m = 0.0;
    for (double d : det_defect) m = std::max(m, d);
    return m;
  }
  int time_index(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i)
      if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

inline void parallel_over(int n_jobs, int threads, const std::function<void(int)>& job) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, n_jobs));
  if (threads <= 1) {
    for (int i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_jobs; i = next.fetch_add(1)) job(i);
    });
  for (auto& th : pool) th.join();
}

/// Evolve every xi on one k-line by integrating a single master line: all
/// coefficients depend on (t, xi) only through tau = t - xi/k, so the mode
/// (k, xi) solution is a composition of the (k, 0) fundamental curve,
///   Phi_{k,xi}(t) = V(t - xi/k) V(-xi/k)^{-1},
///   A(t) = Phi(t) R(t),  R(t) = A_in + V0 (W(tau) - W0) F / det V0,
/// with W the master Duhamel quadrature int adj(V) M dtau.
inline void evolve_line_shared(TrajectorySet& set, const InitialSpec& spec, int ik,
                               const IntegrateOptions& integ) {
  const FrequencyGrid& grid = set.grid;
  const int k = grid.k_at(ik);
  const std::size_t nt = set.nt();

  struct Request {
    double tau;
    int j;   // xi row
    int it;  // output time index, -1 for the base point sigma0 = -xi/k
  };
  std::vector<Request> reqs;
  std::vector<char> active(grid.n_xi, 0);
  for (int j = 0; j < grid.n_xi; ++j) {
    const std::size_t i = grid.idx(ik, j);
    const ModeCoord mode = grid.mode(ik, j);
    const SymPair a0 = spec.initial_state(i, mode, set.params, set.species);
    if (abs2(a0) == 0.0 && std::norm(spec.f_hat[i]) == 0.0) continue;  // exact zero data
    active[j] = 1;
    const double shift = grid.xi_at(j) / k;
    reqs.push_back({-shift, j, -1});
    for (std::size_t it = 0; it < nt; ++it)
      reqs.push_back({set.times[it] - shift, j, static_cast<int>(it)});
  }
  if (reqs.empty()) return;
  std::sort(reqs.begin(), reqs.end(), [](const Request& a, const Request& b) {
    if (a.tau != b.tau) return a.tau < b.tau;
    if (a.j != b.j) return a.j < b.j;
    return a.it < b.it;
  });

  std::vector<Mat2> v_at(static_cast<std::size_t>(grid.n_xi) * nt);
  std::vector<Vec2> w_at(static_cast<std::size_t>(grid.n_xi) * nt);
  std::vector<Mat2> v0(grid.n_xi);
  std::vector<Vec2> w0(grid.n_xi);

  ModeStepper stepper({k, 0.0}, set.params, set.species, Complex{}, integ, /*with_state=*/false);
  stepper.start(reqs.front().tau, SymPair{});
  for (const Request& r : reqs) {
    stepper.advance_to(r.tau);
    if (r.it < 0) {
      v0[r.j] = stepper.fundamental();
      w0[r.j] = stepper.duhamel();
    } else {
      v_at[static_cast<std::size_t>(r.j) * nt + r.it] = stepper.fundamental();
      w_at[static_cast<std::size_t>(r.j) * nt + r.it] = stepper.duhamel();
    }
  }

  for (int j = 0; j < grid.n_xi; ++j) {
    if (!active[j]) continue;
    const std::size_t i = grid.idx(ik, j);
    const ModeCoord mode = grid.mode(ik, j);
    const SymPair a0 = spec.initial_state(i, mode, set.params, set.species);
    const Complex f = spec.f_hat[i];
    const Mat2 adj0 = v0[j].adjugate();
    const double det0 = v0[j].det();
    const double inv_det0 = 1.0 / det0;
    double max_defect = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
      const Mat2& v = v_at[static_cast<std::size_t>(j) * nt + it];
      const Vec2 dw = w_at[static_cast<std::size_t>(j) * nt + it] - w0[j];
      const SymPair r = a0 + inv_det0 * ((v0[j] * dw) * f);
      const SymPair a = inv_det0 * (v * (adj0 * r));
      const std::size_t out = set.idx(i, it);
      set.states[out] = a;
      set.r_values[out] = r;
      set.energies[out] = energy(a, coeffs(set.times[it], mode, set.params, set.species));
      max_defect = std::max(max_defect, std::abs(v.det() * inv_det0 - 1.0));
    }
    set.det_defect[i] = max_defect;
  }
}

/// Direct per-mode fan-out (reference path; used for cross-validation).
inline void evolve_line_direct(TrajectorySet& set, const InitialSpec& spec, int ik,
                               const IntegrateOptions& integ) {
  const FrequencyGrid& grid = set.grid;
  const std::size_t nt = set.nt();
  for (int j = 0; j < grid.n_xi; ++j) {
    const std::size_t i = grid.idx(ik, j);
    const ModeCoord mode = grid.mode(ik, j);
    const SymPair a0 = spec.initial_state(i, mode, set.params, set.species);
    const Complex f = spec.f_hat[i];
    if (abs2(a0) == 0.0 && std::norm(f) == 0.0) continue;
    const ModeTrajectory tr =
        integrate_mode(a0, f, mode, set.params, set.species, set.times, integ);
    double max_defect = 0.0;
    for (std::size_t it = 0; it < nt; ++it) {
      const std::size_t out = set.idx(i, it);
      set.states[out] = tr.states[it];
      set.r_values[out] = tr.r_functional(it);
      set.energies[out] = tr.energies[it];
      max_defect = std::max(max_defect, std::abs(tr.fundamental[it].det() - 1.0));
    }
    set.det_defect[i] = max_defect;
  }
}

}  // namespace detail

inline TrajectorySet evolve_grid(const InitialSpec& spec, const PlasmaParams& pp, Species sp,
                                 std::span<const double> times, const EvolveOptions& opt = {}) {
  spec.grid.validate();
  pp.validate();
  if (times.empty() || times.front() != 0.0)
    throw std::invalid_argument("evolve_grid: times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("evolve_grid: times must be strictly increasing");

  TrajectorySet set;
  set.grid = spec.grid;
  set.species = sp;
  set.params = pp;
  set.times.assign(times.begin(), times.end());
  const std::size_t cells = spec.grid.size() * set.nt();
  set.states.assign(cells, SymPair{});
  set.r_values.assign(cells, SymPair{});
  set.energies.assign(cells, 0.0);
  set.det_defect.assign(spec.grid.size(), 0.0);

  const bool mirror = spec.reality && spec.grid.xi_symmetric();
  std::vector<int> lines;
  for (int ik = 0; ik < spec.grid.n_k(); ++ik)
    if (!mirror || spec.grid.k_at(ik) > 0) lines.push_back(ik);

  detail::parallel_over(static_cast<int>(lines.size()), opt.threads, [&](int li) {
    if (opt.line_reuse)
      detail::evolve_line_shared(set, spec, lines[li], opt.integ);
    else
      detail::evolve_line_direct(set, spec, lines[li], opt.integ);
  });

  if (mirror) {
    const FrequencyGrid& grid = spec.grid;
    const std::size_t nt = set.nt();
    for (int ik = 0; ik < grid.n_k(); ++ik) {
      if (grid.k_at(ik) >= 0) continue;
      const int mk = grid.index_of_k(-grid.k_at(ik));
      for (int j = 0; j < grid.n_xi; ++j) {
        const std::size_t dst = grid.idx(ik, j), src = grid.idx(mk, grid.n_xi - 1 - j);
        for (std::size_t it = 0; it < nt; ++it) {
          set.states[set.idx(dst, it)] = conj(set.states[set.idx(src, it)]);
          set.r_values[set.idx(dst, it)] = conj(set.r_values[set.idx(src, it)]);
          set.energies[set.idx(dst, it)] = set.energies[set.idx(src, it)];
        }
        set.det_defect[dst] = set.det_defect[src];
      }
    }
  }
  return set;
}

/// Physical-variable snapshot of the whole grid at one output time.
struct SpectralSnapshot {
  FrequencyGrid grid;
  double t = 0.0;
  std::vector<Complex> pi_hat, psi_hat, gamma_hat;  // gamma = f_in - pi (conservation)
};

inline SpectralSnapshot evolve_snapshot(const InitialSpec& spec, const TrajectorySet& set,
                                        double t) {
  if (!(spec.grid == set.grid)) throw MissingMode("snapshot: trajectory set grid mismatch");
  const int it = set.time_index(t);
  if (it < 0) throw MissingMode("snapshot: requested time not in trajectory set");
  SpectralSnapshot snap;
  snap.grid = spec.grid;
  snap.t = set.times[it];
  const std::size_t n = spec.grid.size();
  snap.pi_hat.resize(n);
  snap.psi_hat.resize(n);
  snap.gamma_hat.resize(n);
  for (int ik = 0; ik < spec.grid.n_k(); ++ik)
    for (int j = 0; j < spec.grid.n_xi; ++j) {
      const std::size_t i = spec.grid.idx(ik, j);
      const auto [pi, psi] = unsymmetrize(set.states[set.idx(i, it)], snap.t,
                                          spec.grid.mode(ik, j), set.params, set.species);
      snap.pi_hat[i] = pi;
      snap.psi_hat[i] = psi;
      snap.gamma_hat[i] = spec.f_hat[i] - pi;
    }
  return snap;
}

}  // namespace couette_ep
