#include "suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <random>

#include "cact/classical.hpp"
#include "cact/emergence.hpp"
#include "cact/errors.hpp"
#include "cact/maximization.hpp"
#include "cact/qmetric.hpp"
#include "cact/scenario.hpp"
#include "cact/seeds.hpp"

namespace cact::acceptance {

namespace {

namespace cl = cact::classical;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

CVector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

CVector q_unit(const QMetric& q, CVector v) { return v / q_norm(q, v); }

struct QuantumCase {
  SpectralDecomposition dec;
  QMetric q;
};

QuantumCase quantum_case(int dim, std::uint64_t seed) {
  QuantumCase c;
  c.dec = eig_decompose(random_diagonalizable(dim, seed, 1.0));
  c.q = build_q(c.dec);
  return c;
}

// Seeded scenarios whose max-Im eigenvalue is simple, dim 2..10.
std::vector<QuantumCase> maximization_cases() {
  std::vector<QuantumCase> out;
  for (std::uint64_t k = 0; out.size() < 25; ++k) {
    const int dim = 2 + static_cast<int>(out.size() % 9);
    auto c = quantum_case(dim, derive_seed(2000, k));
    if (max_im_subspace(c.dec).size() == 1) out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------

CriterionResult q_normality() {
  CriterionResult r{1, "Q-normality of random non-normal H", true, "", 0.0};
  double worst = 0.0, worst_herm = 0.0;
  int chol_failures = 0;
  for (std::uint64_t k = 0; k < 50; ++k) {
    const int dim = 2 + static_cast<int>(k % 15);
    const auto c = quantum_case(dim, derive_seed(1000, k));
    const CMatrix& H = c.dec.H;
    const double rel = commutator_norm(H, q_adjoint(c.q, H)) / H.squaredNorm();
    worst = std::max(worst, rel);
    worst_herm = std::max(worst_herm, (c.q.Q - c.q.Q.adjoint()).norm() / c.q.Q.norm());
    Eigen::LLT<CMatrix> llt(c.q.Q);
    if (!c.q.chol_ok || llt.info() != Eigen::Success) ++chol_failures;
  }
  r.pass = worst <= 1e-8 && worst_herm <= 1e-14 && chol_failures == 0;
  r.detail = fmt("max ||[H,H^dQ]||/||H||^2 = %.3g, max Q hermiticity residual = %.3g, Cholesky failures = %d", worst,
                 worst_herm, chol_failures);
  return r;
}

CriterionResult maximization_agreement() {
  CriterionResult r{2, "analytic vs numeric vs brute-force maximization", true, "", 0.0};
  const double T_A = 0.0, T_B = 1.0;
  double worst_num = 0.0, worst_closed = 0.0, worst_excess = -std::numeric_limits<double>::infinity();
  std::uint64_t case_id = 0;
  for (const auto& c : maximization_cases()) {
    const auto an = analytic_maximize(c.dec, c.q, T_A, T_B);
    const auto nu = numeric_maximize(c.dec, c.q, T_A, T_B);
    const double expected = std::exp(c.dec.max_im() * (T_B - T_A));
    worst_num = std::max(worst_num, std::abs(nu.amplitude - an.amplitude));
    worst_closed = std::max(worst_closed, std::abs(an.amplitude - expected) / expected);

    const CMatrix U = mat_exp_prop(c.dec, T_B - T_A);
    std::mt19937_64 rng(derive_seed(2500, case_id++));
    double best = 0.0;
    for (int s = 0; s < 100000; ++s) {
      const CVector a = q_unit(c.q, gaussian_vector(c.dec.dim(), rng));
      const CVector b = q_unit(c.q, gaussian_vector(c.dec.dim(), rng));
      best = std::max(best, std::abs(q_inner(c.q, b, U * a)));
    }
    worst_excess = std::max(worst_excess, best - an.amplitude);
  }
  r.pass = worst_num <= 1e-7 && worst_closed <= 1e-7 && worst_excess <= 1e-9;
  r.detail = fmt("max |numeric - analytic| = %.3g, max rel. error vs exp(max_im dT) = %.3g, "
                 "max (sampled - analytic) = %.3g",
                 worst_num, worst_closed, worst_excess);
  return r;
}

CriterionResult reality() {
  CriterionResult r{3, "reality of Q-normalized matrix elements at the optimum", true, "", 0.0};
  const double T_A = 0.0, T_B = 1.0;
  const auto grid = uniform_grid(T_A, T_B, 10);
  double worst = 0.0;
  int exceed = 0, n = 0;
  for (const auto& c : maximization_cases()) {
    const auto an = analytic_maximize(c.dec, c.q, T_A, T_B);
    const auto rep = verify_reality(c.dec, c.q, an, 20, grid, derive_seed(3000, n), 1e-8);
    worst = std::max(worst, rep.max_abs_im);
    const auto neg = reality_negative_control(c.dec, c.q, T_A, T_B, 20, grid, derive_seed(3500, n), 1e-8);
    if (neg.max_abs_im > 1e-4) ++exceed;
    ++n;
  }
  r.pass = worst <= 1e-8;
  const bool conclusive = exceed >= 20;
  r.detail = fmt("max |Im| over %d scenarios = %.3g; negative control exceeded 1e-4 on %d/%d%s", n, worst, exceed, n,
                 conclusive ? "" : " (control inconclusive)");
  return r;
}

CriterionResult proportionality() {
  CriterionResult r{4, "|B(t)> proportional to |A(t)> at the optimum", true, "", 0.0};
  const auto grid = uniform_grid(0.0, 1.0, 10);
  double worst = 0.0;
  for (const auto& c : maximization_cases()) {
    const auto an = analytic_maximize(c.dec, c.q, 0.0, 1.0);
    worst = std::max(worst, max_pair_angle(c.dec, c.q, an, grid));
  }
  r.pass = worst <= 1e-7;
  r.detail = fmt("max Q-angle = %.3g rad", worst);
  return r;
}

struct RateCheck {
  double worst_rel = 0.0;
  double worst_defect = 0.0;
  int fits = 0;
};

void check_rates(const SpectralDecomposition& dec, std::uint64_t seed, RateCheck& out) {
  const QMetric q = build_q(dec);
  const auto top = max_im_subspace(dec);
  std::vector<bool> in_top(static_cast<std::size_t>(dec.dim()), false);
  for (auto k : top) in_top[static_cast<std::size_t>(k)] = true;
  double second = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < dec.dim(); ++k)
    if (!in_top[static_cast<std::size_t>(k)]) second = std::max(second, dec.lambda(k).imag());
  const double gap = dec.max_im() - second;
  const auto psi0 = generic_initial_state(dec, seed);

  for (Eigen::Index k = 0; k < dec.dim(); ++k) {
    if (in_top[static_cast<std::size_t>(k)]) continue;
    const double g = dec.max_im() - dec.lambda(k).imag();
    // Long enough to see the decay, short enough to stay clear of underflow.
    const double t_max = std::min(10.0 / gap, 300.0 / g);
    const auto series = survival_fractions(dec, q, psi0, uniform_grid(0.0, t_max, 201));
    const double slope = decay_rate_fit(series, static_cast<int>(k));
    out.worst_rel = std::max(out.worst_rel, std::abs(slope - (-2.0 * g)) / (2.0 * g));
    ++out.fits;
  }
  out.worst_defect = std::max(out.worst_defect, hermiticity_defect(dec, q, psi0, 10.0 / gap));
}

CriterionResult emergence_rates() {
  CriterionResult r{5, "emergent hermiticity decay rates", true, "", 0.0};
  RateCheck rc;
  CMatrix H = CMatrix::Zero(3, 3);
  H(1, 1) = Complex(0.0, 0.5);
  H(2, 2) = Complex(0.0, 1.0);
  check_rates(eig_decompose(H), 5000, rc);
  for (std::uint64_t k = 0; k < 10; ++k)
    check_rates(eig_decompose(random_diagonalizable(8, derive_seed(5100, k), 1.0)), derive_seed(5200, k), rc);
  r.pass = rc.worst_rel <= 0.05 && rc.worst_defect <= 1e-6;
  r.detail = fmt("%d slopes, max relative slope error = %.3g, max defect at t = 10/gap = %.3g", rc.fits,
                 rc.worst_rel, rc.worst_defect);
  return r;
}

cl::ComplexHamiltonianSpec double_well() { return cl::inflaton_spec(1, 1.0, 0.3, 1.0); }

CriterionResult saddle_selection() {
  CriterionResult r{6, "classical optimizer selects the hilltop", true, "", 0.0};
  const auto spec = double_well();
  const double horizon = 10.0, dt = 1e-2;
  const int steps = 1000;
  double grid_best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 41; ++i) {
    for (int j = 0; j < 41; ++j) {
      const cl::PhaseState s0{{-2.0 + 0.1 * i}, {-2.0 + 0.1 * j}};
      try {
        grid_best = std::max(grid_best, cl::reward_value(cl::integrate(spec, s0, dt, steps), spec));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Blowup) throw;
      }
    }
  }
  cl::SearchConfig search;
  search.lower = {-2.0, -2.0};
  search.upper = {2.0, 2.0};
  const auto opt = cl::optimize_initial(spec, horizon, dt, search);
  const double dist = std::hypot(opt.s0_star.q[0], opt.s0_star.p[0]);
  r.pass = dist <= 0.05 && opt.reward_star - grid_best >= -1e-6;
  r.detail = fmt("s0* = (%.3g, %.3g), distance %.3g; reward %.12g vs grid best %.12g", opt.s0_star.q[0],
                 opt.s0_star.p[0], dist, opt.reward_star, grid_best);
  return r;
}

CriterionResult dwell_law() {
  CriterionResult r{7, "logarithmic dwell-time law at a saddle", true, "", 0.0};
  const auto spec = double_well();
  std::string detail;
  for (double delta : {1e-4, 1e-6, 1e-8}) {
    const auto d = cl::dwell_time(spec, delta, 0.1, 1.0);
    const double ratio = d.measured / d.predicted;
    if (!d.exited || ratio < 0.85 || ratio > 1.15) r.pass = false;
    detail += fmt("%sdelta=%g: %.4g/%.4g=%.4f", detail.empty() ? "" : ", ", delta, d.measured, d.predicted, ratio);
  }
  r.detail = detail;
  return r;
}

CriterionResult inflaton() {
  CriterionResult r{8, "inflaton toy: product structure and joint-origin selection", true, "", 0.0};
  cl::SearchConfig search;
  search.lower.assign(6, -1.0);
  search.upper.assign(6, 1.0);
  cl::InflatonConfig cfg;
  cfg.delta = 1e-8;
  const auto rep = cl::inflaton_toy(3, 1.0, 5.0, 1e-2, search, cfg);
  const auto single = cl::dwell_time(cl::inflaton_spec(1, 1.0), cfg.delta, cfg.Delta, 1.0);

  double worst_single = 0.0, worst_pred = 0.0, worst_coord = 0.0;
  for (const auto& d : rep.per_mode_dwell) {
    worst_single = std::max(worst_single, std::abs(d.measured / single.measured - 1.0));
    worst_pred = std::max(worst_pred, std::abs(d.measured / d.predicted - 1.0));
  }
  for (double v : rep.opt.s0_star.q) worst_coord = std::max(worst_coord, std::abs(v));
  for (double v : rep.opt.s0_star.p) worst_coord = std::max(worst_coord, std::abs(v));
  r.pass = worst_single <= 0.15 && worst_pred <= 0.15 && worst_coord <= 0.05;
  r.detail = fmt("max |dwell/single-mode - 1| = %.3g, max |dwell/prediction - 1| = %.3g, max |s0* coord| = %.3g",
                 worst_single, worst_pred, worst_coord);
  return r;
}

double energy_drift(const cl::ComplexHamiltonianSpec& spec, const cl::PhaseState& s0) {
  const auto traj = cl::integrate(spec, s0, 1e-3, 100000);
  double drift = 0.0;
  for (double e : traj.energy) drift = std::max(drift, std::abs(e - traj.energy.front()));
  return drift;
}

std::string run_text(const Scenario& s) {
  const auto b = run_scenario(s);
  std::string out = format_summary(b);
  for (const auto& t : b.tables) out += t.name + "\n" + format_csv(t);
  return out;
}

std::vector<Scenario> determinism_scenarios() {
  std::vector<Scenario> out;
  out.push_back(parse_scenario(R"({"kind": "quantum",
    "hamiltonian": {"generator": "random_diagonalizable", "dim": 6, "seed": 11, "im_spread": 1.0},
    "observables": {"count": 5}, "emergence": {"grid_points": 51}})"));
  out.push_back(parse_scenario(R"({"kind": "quantum", "hamiltonian": {"generator": "standard_2x2"}})"));
  out.push_back(parse_scenario(R"({"kind": "classical",
    "classical": {"masses": [1.0], "coefficients": [[0, 0, -0.5, 0, 0.25]],
                  "bumps": [{"center_q": [0], "center_p": [0], "sigma": 0.3, "weight": 1}],
                  "s0": {"q": [0.3], "p": [0.1]}, "dt": 0.01, "horizon": 5,
                  "dwell": {"delta": 1e-6, "Delta": 0.1, "lyapunov": 1}},
    "search": {"restarts": 3, "max_evals": 1500}})"));
  out.push_back(parse_scenario(R"({"kind": "inflaton",
    "inflaton": {"n_modes": 2, "horizon": 3}, "search": {"restarts": 2, "max_evals": 1500}})"));
  return out;
}

CriterionResult energy_and_determinism() {
  CriterionResult r{9, "leapfrog energy conservation and rerun determinism", true, "", 0.0};
  const double d1 = energy_drift(double_well(), {{0.5}, {0.2}});
  cl::ComplexHamiltonianSpec coupled;
  coupled.masses = {1.0, 2.0};
  coupled.coefficients = {{0, 0, 0.5, 0, 0.1}, {0, 0, 1.0, 0.05, 0.02}};
  coupled.couplings = {{0, 1, 1, 1, 0.2}};
  const double d2 = energy_drift(coupled, {{0.8, -0.4}, {0.1, 0.3}});

  int mismatches = 0, runs = 0;
  for (const auto& s : determinism_scenarios()) {
    if (run_text(s) != run_text(s)) ++mismatches;
    ++runs;
  }
  r.pass = std::max(d1, d2) <= 1e-6 && mismatches == 0;
  r.detail = fmt("drift over T=100 at dt=1e-3: double well %.3g, coupled %.3g; %d/%d scenario reruns differ", d1, d2,
                 mismatches, runs);
  return r;
}

CriterionResult weak_value_reductions() {
  CriterionResult r{10, "weak-value reductions", true, "", 0.0};
  std::mt19937_64 rng(derive_seed(10000, 0));
  double worst = 0.0;
  int identity_misses = 0;
  for (int k = 0; k < 100; ++k) {
    const int dim = 2 + k % 7;
    CMatrix O(dim, dim);
    for (int j = 0; j < dim; ++j) O.col(j) = gaussian_vector(dim, rng);
    const StateVector a(gaussian_vector(dim, rng), Side::A);
    const StateVector b(gaussian_vector(dim, rng), Side::B);
    const Complex avg = ordinary_average(O, a);
    worst = std::max(worst, std::abs(weak_value(O, a, a) - avg) / std::max(1.0, std::abs(avg)));

    const auto dec = eig_decompose(random_diagonalizable(dim, derive_seed(10001, k), 1.0));
    const auto q = build_q(dec);
    const CMatrix I = CMatrix::Identity(dim, dim);
    const Complex one(1.0, 0.0);
    if (ordinary_average(I, a) != one) ++identity_misses;
    if (weak_value(I, b, a) != one) ++identity_misses;
    if (q_matrix_element(q, I, b, a) != one) ++identity_misses;
    if (weak_value_propagated(dec, I, a, b, 0.3, 0.0, 1.0) != one) ++identity_misses;
  }
  r.pass = worst <= 1e-12 && identity_misses == 0;
  r.detail = fmt("max |weak(O,a,a) - avg(O,a)| = %.3g; identity quotients != 1: %d", worst, identity_misses);
  return r;
}

struct Entry {
  CriterionResult (*fn)();
  double budget_seconds;  // 0: no runtime bound
};

const Entry kEntries[] = {
    {q_normality, 10.0},   {maximization_agreement, 60.0}, {reality, 0.0},      {proportionality, 0.0},
    {emergence_rates, 0.0}, {saddle_selection, 120.0},     {dwell_law, 0.0},    {inflaton, 0.0},
    {energy_and_determinism, 0.0}, {weak_value_reductions, 0.0},
};

}  // namespace

int criterion_count() { return static_cast<int>(std::size(kEntries)); }

CriterionResult run_criterion(int id) {
  const auto& e = kEntries[id - 1];
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = e.fn();
  } catch (const std::exception& ex) {
    r.id = id;
    r.name = "criterion " + std::to_string(id);
    r.pass = false;
    r.detail = std::string("threw: ") + ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (e.budget_seconds > 0.0 && r.seconds > e.budget_seconds) {
    r.pass = false;
    r.detail += fmt("; runtime %.1f s over the %.0f s budget", r.seconds, e.budget_seconds);
  }
  return r;
}

std::vector<CriterionResult> run_all(std::ostream& out) {
  std::vector<CriterionResult> results;
  for (int id = 1; id <= criterion_count(); ++id) {
    results.push_back(run_criterion(id));
    const auto& r = results.back();
    out << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " (" << fmt("%.2f", r.seconds)
        << " s): " << r.detail << "\n";
    out.flush();
  }
  return results;
}

}  // namespace cact::acceptance
