#include "helpers.hpp"

#include <cmath>

#include "cact/classical.hpp"

using namespace cact;
using namespace cact::classical;

namespace {

ComplexHamiltonianSpec coupled_spec() {
  ComplexHamiltonianSpec s;
  s.masses = {1.0, 2.0};
  s.coefficients = {{0.1, 0.2, 0.5, -0.1, 0.1, 0.01, 0.002}, {0, 0, 1.0, 0.05, 0.02}};
  s.couplings = {{0, 1, 1, 1, 0.2}, {1, 0, 2, 1, -0.05}};
  s.bumps = {{{0.3, -0.2}, {0.0, 0.1}, 0.5, 1.5}, {{-1.0, 0.0}, {0.0, 0.0}, 0.4, -0.7}};
  return s;
}

ComplexHamiltonianSpec harmonic() {
  ComplexHamiltonianSpec s;
  s.masses = {1.0};
  s.coefficients = {{0.0, 0.0, 0.5}};
  return s;
}

ComplexHamiltonianSpec free_particle(double sigma, double weight) {
  ComplexHamiltonianSpec s;
  s.masses = {1.0};
  s.coefficients = {{}};
  s.bumps = {{{0.0}, {1.0}, sigma, weight}};
  return s;
}

}  // namespace

TEST_CASE("gradient and Hessian against central differences") {
  const auto spec = coupled_spec();
  const std::vector<double> q{0.4, -0.7};
  const auto g = potential_gradient(spec, q);
  const auto h = potential_hessian(spec, q);
  const double e = 1e-5;
  for (std::size_t i = 0; i < 2; ++i) {
    auto qp = q, qm = q;
    qp[i] += e;
    qm[i] -= e;
    CHECK(g[i] == doctest::Approx((potential(spec, qp) - potential(spec, qm)) / (2 * e)).epsilon(1e-8));
    const auto gp = potential_gradient(spec, qp), gm = potential_gradient(spec, qm);
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(h[j * 2 + i] == doctest::Approx((gp[j] - gm[j]) / (2 * e)).epsilon(1e-7));
  }
  CHECK(h[1] == h[2]);
}

TEST_CASE("phase-space functions on hand-worked values") {
  const auto dw = inflaton_spec(1, 1.0, 0.3, 1.0);
  // V = -q^2/2 + q^4/4
  CHECK(potential(dw, {1.0}) == doctest::Approx(-0.25));
  CHECK(potential(dw, {2.0}) == doctest::Approx(2.0));
  CHECK(re_h(dw, {{1.0}, {2.0}}) == doctest::Approx(2.0 - 0.25));
  CHECK(im_h(dw, {{0.0}, {0.0}}) == 1.0);
  CHECK(im_h(dw, {{0.3}, {0.0}}) == doctest::Approx(std::exp(-0.5)));
}

TEST_CASE("critical points of the double well") {
  const auto cps = saddle_points(inflaton_spec(1, 1.0));
  REQUIRE(cps.size() == 3);
  CHECK(cps[0].q[0] == doctest::Approx(-1.0));
  CHECK(cps[1].q[0] == 0.0);
  CHECK(cps[2].q[0] == doctest::Approx(1.0));
  CHECK(cps[0].index == 0);
  CHECK(cps[1].index == 1);
  CHECK(cps[2].index == 0);
  CHECK(cps[1].eigenvalues[0] == doctest::Approx(-1.0));
  CHECK(cps[0].eigenvalues[0] == doctest::Approx(2.0));
}

TEST_CASE("critical points of a product of double wells") {
  // Nine critical points: index = number of coordinates sitting at 0.
  const auto cps = saddle_points(inflaton_spec(2, 1.0));
  REQUIRE(cps.size() == 9);
  for (const auto& cp : cps) {
    int zeros = 0;
    for (double v : cp.q) zeros += v == 0.0 ? 1 : 0;
    CHECK(cp.index == zeros);
  }
}

TEST_CASE("leapfrog tracks the harmonic oscillator") {
  const auto traj = integrate(harmonic(), {{1.0}, {0.0}}, 1e-3, 10000);
  REQUIRE(traj.states.size() == 10001);
  CHECK(traj.horizon() == doctest::Approx(10.0));
  for (std::size_t k = 0; k < traj.states.size(); k += 1000) {
    const double t = static_cast<double>(k) * 1e-3;
    CHECK(std::abs(traj.states[k].q[0] - std::cos(t)) < 1e-5);
    CHECK(std::abs(traj.states[k].p[0] + std::sin(t)) < 1e-5);
  }
}

TEST_CASE("leapfrog is second order and time reversible") {
  const auto spec = coupled_spec();
  const PhaseState s0{{0.5, -0.3}, {0.2, 0.4}};
  auto drift = [&](double dt) {
    const auto tr = integrate(spec, s0, dt, static_cast<int>(std::lround(10.0 / dt)));
    double d = 0.0;
    for (double e : tr.energy) d = std::max(d, std::abs(e - tr.energy.front()));
    return d;
  };
  const double ratio = drift(1e-2) / drift(5e-3);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));

  const auto fwd = integrate(spec, s0, 1e-2, 500);
  PhaseState back = fwd.states.back();
  for (double& p : back.p) p = -p;
  const auto rev = integrate(spec, back, 1e-2, 500);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(std::abs(rev.states.back().q[i] - s0.q[i]) < 1e-10);
    CHECK(std::abs(rev.states.back().p[i] + s0.p[i]) < 1e-10);
  }
}

TEST_CASE("runaway trajectories are reported") {
  ComplexHamiltonianSpec spec;
  spec.masses = {1.0};
  spec.coefficients = {{0, 0, 0, 0, -1.0}};
  CHECK_THROWS_KIND(integrate(spec, {{2.0}, {0.0}}, 1e-2, 10000), ErrorKind::Blowup);
  CHECK_THROWS_KIND(integrate(spec, {{2.0, 1.0}, {0.0, 0.0}}, 1e-2, 10), ErrorKind::DimMismatch);
}

TEST_CASE("spec validation") {
  auto bad = harmonic();
  bad.masses = {-1.0};
  CHECK_THROWS_KIND(validate(bad), ErrorKind::Validation);
  bad = harmonic();
  bad.coefficients = {{0, 0, 0, 0, 0, 0, 0, 1.0}};
  CHECK_THROWS_KIND(validate(bad), ErrorKind::Validation);
  bad = harmonic();
  bad.couplings = {{0, 3, 1, 1, 1.0}};
  CHECK_THROWS_KIND(validate(bad), ErrorKind::Validation);
  bad = harmonic();
  bad.bumps = {{{0.0}, {0.0}, 0.0, 1.0}};
  CHECK_THROWS_KIND(validate(bad), ErrorKind::Validation);
  CHECK_NOTHROW(validate(coupled_spec()));
}

TEST_CASE("reward of a free particle crossing a bump") {
  // q(t) = -3 + t, p = 1 sits on the bump's p-center, so Im H = w exp(-(t-3)^2 / (2 sigma^2)).
  const double sigma = 0.5, w = 2.0;
  const auto spec = free_particle(sigma, w);
  const auto traj = integrate(spec, {{-3.0}, {1.0}}, 1e-3, 6000);
  const double exact = w * sigma * std::sqrt(2.0 * M_PI) * std::erf(3.0 / (sigma * std::sqrt(2.0)));
  CHECK(reward_value(traj, spec) == doctest::Approx(exact).epsilon(1e-6));
  const auto rep = reward(traj, spec, {});
  // Inside 2 sigma for |t - 3| <= 1.
  CHECK(rep.dwell[0] == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(rep.nearest_saddle_distance == -1.0);
}

TEST_CASE("resting on the hilltop earns the full reward") {
  const auto dw = inflaton_spec(1, 1.0, 0.3, 1.0);
  const auto traj = integrate(dw, {{0.0}, {0.0}}, 1e-2, 1000);
  const auto rep = reward(traj, dw);
  CHECK(std::abs(rep.reward - 10.0) < 1e-12);
  CHECK(rep.dwell[0] == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(rep.nearest_saddle_distance == 0.0);
}

TEST_CASE("optimizer finds the hilltop and is reproducible") {
  const auto dw = inflaton_spec(1, 1.0, 0.3, 1.0);
  SearchConfig search;
  search.lower = {-2.0, -2.0};
  search.upper = {2.0, 2.0};
  search.restarts = 4;
  const auto a = optimize_initial(dw, 5.0, 1e-2, search);
  const auto b = optimize_initial(dw, 5.0, 1e-2, search);
  CHECK(a.s0_star == b.s0_star);
  CHECK(a.reward_star == b.reward_star);
  CHECK(std::hypot(a.s0_star.q[0], a.s0_star.p[0]) < 0.05);
  CHECK(a.restart_start_rewards.size() == 4);
  for (std::size_t r = 0; r < 4; ++r) CHECK(a.restart_best_rewards[r] >= a.restart_start_rewards[r]);

  search.lower = {-2.0};
  CHECK_THROWS_KIND(optimize_initial(dw, 5.0, 1e-2, search), ErrorKind::Precondition);
}

TEST_CASE("dwell time near a hyperbolic point") {
  const auto dw = inflaton_spec(1, 1.0);
  // Linearized motion q = delta cosh t leaves |q| < Delta at acosh(Delta / delta).
  const auto d = dwell_time(dw, 1e-6, 0.1, 1.0);
  CHECK(d.exited);
  CHECK(d.measured == doctest::Approx(std::acosh(1e5)).epsilon(2e-3));
  CHECK(d.predicted == doctest::Approx(std::log(1e5)));
  const auto zero = dwell_time(dw, 0.1, 0.1, 1.0);
  CHECK(zero.measured == 0.0);
  CHECK(zero.exited);
  CHECK_THROWS_KIND(dwell_time(dw, 0.2, 0.1, 1.0), ErrorKind::Precondition);
  CHECK_THROWS_KIND(dwell_time(harmonic(), 1e-3, 0.1, 1.0), ErrorKind::Precondition);
}

TEST_CASE("mass-weighted unstable direction") {
  // V = -q0^2/2 + q1^2/2 with heavy q0: exponent sqrt(1 / m0).
  ComplexHamiltonianSpec spec;
  spec.masses = {4.0, 1.0};
  spec.coefficients = {{0, 0, -0.5, 0, 0.25}, {0, 0, 0.5}};
  DwellConfig cfg;
  cfg.saddle_q = {0.0, 0.0};
  const auto d = dwell_time(spec, 1e-6, 0.1, 0.5, cfg);
  CHECK(d.measured == doctest::Approx(2.0 * std::acosh(1e5)).epsilon(5e-3));
}

TEST_CASE("integrator examples") {
  // One period of the unit oscillator.
  const double period = 2.0 * M_PI;
  const int steps = static_cast<int>(std::lround(period / 1e-3));
  const auto osc = integrate(harmonic(), {{1.0}, {0.0}}, period / steps, steps);
  CHECK(std::abs(osc.states.back().q[0] - 1.0) < 1e-4);
  CHECK(std::abs(osc.states.back().p[0]) < 1e-4);

  // A fixed point stays put.
  const auto dw = inflaton_spec(1, 1.0);
  const auto still = integrate(dw, {{1.0}, {0.0}}, 1e-2, 500);
  for (const auto& s : still.states) CHECK(s == still.states.front());

  // Forward then backward on the double well.
  const PhaseState s0{{0.3}, {0.45}};
  const auto fwd = integrate(dw, s0, 1e-3, 5000);
  PhaseState back = fwd.states.back();
  back.p[0] = -back.p[0];
  const auto rev = integrate(dw, back, 1e-3, 5000);
  CHECK(std::abs(rev.states.back().q[0] - s0.q[0]) < 1e-9);
  CHECK(std::abs(rev.states.back().p[0] + s0.p[0]) < 1e-9);
}

TEST_CASE("Im H never feeds back into the motion") {
  auto a = coupled_spec();
  auto b = a;
  b.bumps = {{{2.0, 2.0}, {0.0, -1.0}, 0.1, 50.0}};
  const PhaseState s0{{0.4, 0.1}, {-0.2, 0.3}};
  const auto ta = integrate(a, s0, 1e-2, 2000), tb = integrate(b, s0, 1e-2, 2000);
  for (std::size_t k = 0; k < ta.states.size(); ++k) CHECK(ta.states[k] == tb.states[k]);
  CHECK(ta.energy == tb.energy);
}

TEST_CASE("reward bounds and refinement") {
  ComplexHamiltonianSpec none = harmonic();
  const auto traj0 = integrate(none, {{1.0}, {0.0}}, 1e-2, 100);
  CHECK(reward_value(traj0, none) == 0.0);

  // Oscillator swinging once through a narrow bump: compare against 10x finer steps.
  auto osc = harmonic();
  osc.bumps = {{{0.0}, {1.0}, 0.05, 3.0}};
  const auto coarse = integrate(osc, {{-1.0}, {0.0}}, 1e-3, 3000);
  const auto fine = integrate(osc, {{-1.0}, {0.0}}, 1e-4, 30000);
  const double rc = reward_value(coarse, osc), rf = reward_value(fine, osc);
  CHECK(rc > 0.0);
  CHECK(rc == doctest::Approx(rf).epsilon(1e-4));
  CHECK(rc <= 3.0 * 3.0);

  // Positive-weight fields: reward never exceeds horizon times the largest weight.
  auto two = coupled_spec();
  two.bumps[1].weight = 0.7;
  const auto tr = integrate(two, {{0.3, -0.2}, {0.0, 0.1}}, 1e-2, 1000);
  CHECK(reward_value(tr, two) <= 10.0 * 1.5);
}

TEST_CASE("stable dwelling beats a transient visit") {
  // Equal bumps at the left minimum and on the steep outer slope.
  auto dw = inflaton_spec(1, 1.0, 0.3, 1.0);
  dw.bumps = {{{-1.0}, {0.0}, 0.3, 1.0}, {{1.8}, {0.0}, 0.3, 1.0}};
  const double horizon = 10.0, dt = 1e-2;
  const auto at_min = integrate(dw, {{-1.0}, {0.0}}, dt, 1000);
  const auto on_slope = integrate(dw, {{1.8}, {0.0}}, dt, 1000);
  CHECK(reward_value(at_min, dw) > reward_value(on_slope, dw) + 1.0);

  SearchConfig search;
  search.lower = {-2.0, -2.0};
  search.upper = {2.0, 2.0};
  const auto opt = optimize_initial(dw, horizon, dt, search);
  CHECK(std::hypot(opt.s0_star.q[0] + 1.0, opt.s0_star.p[0]) < 0.05);

  // Bump at a minimum alone: the optimizer sits there.
  dw.bumps = {{{1.0}, {0.0}, 0.3, 1.0}};
  const auto opt2 = optimize_initial(dw, horizon, dt, search);
  CHECK(std::hypot(opt2.s0_star.q[0] - 1.0, opt2.s0_star.p[0]) < 0.05);
}

TEST_CASE("flat reward landscape is reported") {
  auto flat = harmonic();
  SearchConfig search;
  search.lower = {-1.0, -1.0};
  search.upper = {1.0, 1.0};
  search.restarts = 2;
  CHECK_THROWS_KIND(optimize_initial(flat, 1.0, 1e-2, search), ErrorKind::NoImprovement);
}

TEST_CASE("halving the displacement adds ln 2 to the dwell") {
  const auto dw = inflaton_spec(1, 1.0);
  const double a = dwell_time(dw, 2e-7, 0.1, 1.0).measured;
  const double b = dwell_time(dw, 1e-7, 0.1, 1.0).measured;
  CHECK(b - a == doctest::Approx(std::log(2.0)).epsilon(1e-3));
}

TEST_CASE("inflaton origin is a saddle of full index") {
  const auto spec = inflaton_spec(3, 2.0);
  SaddleSearchOptions opts;
  opts.starts = 200;
  bool found = false;
  for (const auto& cp : saddle_points(spec, opts)) {
    if (cp.q == std::vector<double>(3, 0.0)) {
      found = true;
      CHECK(cp.index == 3);
      for (double e : cp.eigenvalues) CHECK(e == doctest::Approx(-2.0));
    }
  }
  CHECK(found);
  CHECK(inflaton_spec(1, 1.0).coefficients[0] == std::vector<double>{0.0, 0.0, -0.5, 0.0, 0.25});
}
