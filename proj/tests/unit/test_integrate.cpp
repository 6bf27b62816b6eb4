#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include <couette_ep/integrate.hpp>

#include "../support/oracles.hpp"

using namespace couette_ep;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<double> linspace(double t_max, std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = t_max * double(i) / double(n - 1);
  return t;
}

const PlasmaParams kOnes = PlasmaParams::all_ones();
const SymPair kA0{Complex(1.0, 0.0), Complex(0.0, 0.0)};

double rel_err(const SymPair& got, const SymPair& want) {
  return norm_inf(got - want) / norm_inf(want);
}

}  // namespace

// Reference values from the fixed-step Richardson oracle (dt = 1e-5), mode
// k = 1, xi = 0, all-ones ion parameters, A(0) = (1, 0), no forcing. The
// oracle agrees with itself to ~6e-15 under step halving.
TEST_CASE("adaptive integration matches frozen oracle values") {
  const std::vector<double> times{0.0, 1.0, 5.0, 10.0};
  IntegrateOptions opt;
  opt.tol = 1e-10;
  const ModeTrajectory tr =
      integrate_mode(kA0, Complex{}, {1, 0.0}, kOnes, Species::ion, times, opt);

  const SymPair want1{Complex(-0.54352031633542786, 0.0), Complex(1.7129005862661781, 0.0)};
  const SymPair want5{Complex(-1.4501506829213355, 0.0), Complex(0.43544030774908388, 0.0)};
  const SymPair want10{Complex(-1.4793312870435908, 0.0), Complex(-0.31920817026430254, 0.0)};
  CHECK(rel_err(tr.states[1], want1) < 1e-8);
  CHECK(rel_err(tr.states[2], want5) < 1e-8);
  CHECK(rel_err(tr.states[3], want10) < 1e-8);

  // Real data stays real: L and M are real matrices.
  for (const SymPair& s : tr.states) {
    CHECK(s.c1.imag() == 0.0);
    CHECK(s.c2.imag() == 0.0);
  }
}

TEST_CASE("forced trajectory matches frozen oracle value") {
  const Complex f{1.0, 0.5};
  IntegrateOptions opt;
  opt.tol = 1e-10;
  const std::vector<double> times{0.0, 5.0};
  const ModeTrajectory tr = integrate_mode(kA0, f, {1, 0.0}, kOnes, Species::ion, times, opt);
  const SymPair want{Complex(-0.58958122748610442, 0.43028472771760734),
                     Complex(0.52850792154439963, 0.046533806897693784)};
  CHECK(rel_err(tr.states[1], want) < 1e-8);
}

TEST_CASE("electron trajectory matches frozen oracle value") {
  IntegrateOptions opt;
  opt.tol = 1e-10;
  const std::vector<double> times{0.0, 5.0};
  const ModeTrajectory tr =
      integrate_mode(kA0, Complex{}, {1, 0.0}, kOnes, Species::electron, times, opt);
  const SymPair want{Complex(-1.5433743889726836, 0.0), Complex(0.16093415926029392, 0.0)};
  CHECK(rel_err(tr.states[1], want) < 1e-8);
}

TEST_CASE("adaptive result tracks the live oracle on an off-axis forced mode") {
  const ModeCoord m{2, 3.0};
  const Complex f{-0.7, 0.2};
  const SymPair a0{Complex(0.4, -0.9), Complex(1.1, 0.3)};
  IntegrateOptions opt;
  opt.tol = 1e-10;
  const std::vector<double> times{0.0, 4.0};
  const ModeTrajectory tr = integrate_mode(a0, f, m, kOnes, Species::ion, times, opt);
  const SymPair want =
      oracle::rk4_richardson_state(a0, f, m, kOnes, Species::ion, 4.0, 400000);
  CHECK(rel_err(tr.states[1], want) < 1e-8);
}

TEST_CASE("zero data stays zero") {
  const ModeTrajectory tr =
      integrate_mode(SymPair{}, Complex{}, {2, -5.0}, kOnes, Species::ion, linspace(20.0, 11));
  for (const SymPair& s : tr.states) CHECK(abs2(s) == 0.0);
  for (double e : tr.energies) CHECK(e == 0.0);
}

TEST_CASE("fundamental matrix keeps unit determinant") {
  IntegrateOptions opt;
  opt.tol = 1e-8;
  for (Species sp : {Species::ion, Species::electron}) {
    const ModeTrajectory tr =
        integrate_mode(kA0, Complex{}, {3, 7.5}, kOnes, sp, linspace(20.0, 21), opt);
    for (const Mat2& v : tr.fundamental) CHECK_THAT(v.det(), WithinAbs(1.0, 1e-6));
  }
}

TEST_CASE("duhamel quadrature starts at zero and the functional R is consistent") {
  const Complex f{0.5, -1.0};
  const ModeTrajectory tr =
      integrate_mode(kA0, f, {1, 2.0}, kOnes, Species::ion, linspace(10.0, 11));
  CHECK(tr.duhamel[0].x0 == 0.0);
  CHECK(tr.duhamel[0].x1 == 0.0);
  CHECK(abs2(tr.r_functional(0) - kA0) == 0.0);

  // Without forcing R(t) never moves.
  const ModeTrajectory hom =
      integrate_mode(kA0, Complex{}, {1, 2.0}, kOnes, Species::ion, linspace(10.0, 11));
  for (std::size_t i = 0; i < hom.times.size(); ++i)
    CHECK(abs2(hom.r_functional(i) - kA0) == 0.0);
}

TEST_CASE("duhamel solution agrees with direct forced integration") {
  const Complex f{1.0, 0.5};
  const ModeCoord m{1, 0.0};
  IntegrateOptions opt;
  opt.tol = 1e-8;
  const std::vector<double> times{0.0, 5.0};
  const ModeTrajectory tr = integrate_mode(kA0, f, m, kOnes, Species::ion, times, opt);
  const SymPair via_duhamel = duhamel_solution(kA0, f, m, kOnes, Species::ion, 5.0, opt);
  CHECK(rel_err(via_duhamel, tr.states[1]) < 1e-6);
}

TEST_CASE("energy ratio obeys the two-sided envelope along trajectories") {
  std::mt19937 eng(57);
  std::uniform_real_distribution<double> u(-1.0, 1.0), xis(-8.0, 8.0);
  std::uniform_int_distribution<int> ks(1, 4);
  const std::vector<double> times = linspace(25.0, 26);
  for (int trial = 0; trial < 12; ++trial) {
    const ModeCoord m{(trial % 2 ? 1 : -1) * ks(eng), xis(eng)};
    const SymPair a0{Complex(u(eng), u(eng)), Complex(u(eng), u(eng))};
    for (Species sp : {Species::ion, Species::electron}) {
      const ModeTrajectory tr = integrate_mode(a0, Complex{}, m, kOnes, sp, times);
      const double pref = gronwall_prefactor(sp);
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double lr = std::abs(std::log(tr.energies[i] / tr.energies[0]));
        CHECK(lr <= pref * (tr.tv_h_over_gamma[i] + tr.tv_log_lambda[i]) + 1e-6);
      }
      CHECK(tr.tv_h_over_gamma.back() <= tv_h_over_gamma_bound(sp));
      CHECK(tr.tv_log_lambda.back() <= tv_log_lambda_bound(kOnes, sp));
      for (std::size_t i = 1; i < times.size(); ++i) {
        CHECK(tr.tv_h_over_gamma[i] >= tr.tv_h_over_gamma[i - 1]);
        CHECK(tr.tv_log_lambda[i] >= tr.tv_log_lambda[i - 1]);
      }
    }
  }
}

TEST_CASE("input validation") {
  const std::vector<double> ok{0.0, 1.0};
  CHECK_THROWS_AS(integrate_mode(kA0, Complex{}, {0, 1.0}, kOnes, Species::ion, ok),
                  std::invalid_argument);

  const std::vector<double> empty;
  CHECK_THROWS_AS(integrate_mode(kA0, Complex{}, {1, 0.0}, kOnes, Species::ion, empty),
                  std::invalid_argument);

  const std::vector<double> late{1.0, 2.0};
  CHECK_THROWS_AS(integrate_mode(kA0, Complex{}, {1, 0.0}, kOnes, Species::ion, late),
                  std::invalid_argument);

  const std::vector<double> stalled{0.0, 1.0, 1.0};
  CHECK_THROWS_AS(integrate_mode(kA0, Complex{}, {1, 0.0}, kOnes, Species::ion, stalled),
                  std::invalid_argument);

  IntegrateOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(integrate_mode(kA0, Complex{}, {1, 0.0}, kOnes, Species::ion, ok, bad),
                  std::invalid_argument);

  CHECK_THROWS_AS(duhamel_solution(kA0, Complex{}, {1, 0.0}, kOnes, Species::ion, -1.0),
                  std::invalid_argument);
}

TEST_CASE("enormous frequencies overflow the step floor") {
  const std::vector<double> times{0.0, 1.0};
  try {
    integrate_mode(kA0, Complex{}, {1, 1e9}, kOnes, Species::ion, times);
    FAIL("expected StepSizeUnderflow");
  } catch (const StepSizeUnderflow& e) {
    CHECK(e.mode.k == 1);
    CHECK(e.mode.xi == 1e9);
    CHECK(e.dt < 1e-9);
    CHECK(std::string(e.what()).find("k = 1") != std::string::npos);
  }
}

TEST_CASE("step counters are populated") {
  const ModeTrajectory tr =
      integrate_mode(kA0, Complex{}, {1, 0.0}, kOnes, Species::ion, linspace(10.0, 11));
  CHECK(tr.n_accepted > 50);
  CHECK(tr.n_accepted < 100000);
}
