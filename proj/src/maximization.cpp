#include "cact/maximization.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cact/errors.hpp"
#include "cact/seeds.hpp"

namespace cact {

namespace {

CVector random_complex(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v;
}

CVector q_normalized(const QMetric& q, const CVector& v) {
  const double n = q_norm(q, v);
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::ZeroNorm, "cannot Q-normalize vector");
  return v / n;
}

void require_interval(double T_A, double T_B) {
  if (!(T_B > T_A)) throw Error(ErrorKind::Precondition, "T_B must exceed T_A");
}

std::vector<CMatrix> make_observables(const QMetric& q, int n, std::uint64_t seed) {
  std::vector<CMatrix> obs;
  obs.reserve(static_cast<std::size_t>(std::max(n, 0)));
  for (int k = 0; k < n; ++k) obs.push_back(random_q_hermitian(q, derive_seed(seed, static_cast<std::uint64_t>(k))));
  return obs;
}

RealityReport measure_reality(const SpectralDecomposition& dec, const QMetric& q, const StateVector& a,
                              const StateVector& b, double T_A, double T_B, int n_observables,
                              const std::vector<double>& t_grid, std::uint64_t seed, double tol,
                              const QuotientOptions& quot) {
  for (double t : t_grid)
    if (t < T_A || t > T_B) throw Error(ErrorKind::Precondition, "time grid leaves [T_A, T_B]");
  const auto obs = make_observables(q, n_observables, seed);
  RealityReport rep;
  rep.observables = n_observables;
  rep.time_points = static_cast<int>(t_grid.size());
  for (double t : t_grid) {
    const StateVector at = evolve_a(dec, a, T_A, t);
    const StateVector bt = evolve_b(dec, q, b, T_B, t, BAdjointMode::q_dagger);
    for (const auto& o : obs)
      rep.max_abs_im = std::max(rep.max_abs_im, std::abs(q_matrix_element(q, o, bt, at, quot).imag()));
  }
  rep.pass = rep.max_abs_im <= tol;
  return rep;
}

}  // namespace

std::vector<double> uniform_grid(double T_A, double T_B, int n) {
  if (n < 1) throw Error(ErrorKind::Precondition, "grid needs at least one point");
  std::vector<double> g(static_cast<std::size_t>(n));
  if (n == 1) {
    g[0] = T_A;
    return g;
  }
  for (int k = 0; k < n; ++k) g[static_cast<std::size_t>(k)] = T_A + (T_B - T_A) * k / (n - 1);
  g.back() = T_B;
  return g;
}

MaximizerResult analytic_maximize(const SpectralDecomposition& dec, const QMetric& q, double T_A, double T_B,
                                  double deg_tol) {
  require_interval(T_A, T_B);
  const auto top = max_im_subspace(dec, deg_tol);

  // Q-uniform superposition of the top eigenvectors; they are Q-orthonormal.
  CVector a = CVector::Zero(dec.dim());
  for (auto k : top) a += dec.P.col(k);
  a = q_normalized(q, a);

  const CVector ua = mat_exp_prop(dec, T_B - T_A) * a;
  const CVector b = q_normalized(q, ua);

  MaximizerResult res;
  res.a_star = StateVector(a, Side::A);
  res.b_star = StateVector(b, Side::B);
  res.amplitude = std::abs(q_inner(q, b, ua));
  res.max_im = dec.max_im();
  res.subspace_dim = static_cast<int>(top.size());
  res.method = MaximizeMethod::analytic;
  res.T_A = T_A;
  res.T_B = T_B;
  return res;
}

MaximizerResult numeric_maximize(const SpectralDecomposition& dec, const QMetric& q, double T_A, double T_B,
                                 const NumericMaximizeOptions& opts) {
  require_interval(T_A, T_B);
  if (opts.restarts < 1) throw Error(ErrorKind::Precondition, "restarts must be at least 1");
  const CMatrix u = mat_exp_prop(dec, T_B - T_A);
  const CMatrix u_adj = q_adjoint(q, u);

  struct Run {
    CVector a;
    double amplitude = -1.0;
    int iterations = 0;
    std::vector<double> trace;
  };

  // Alternating maximization: for fixed a the best b is U a / ||U a||_Q, for
  // fixed b the best a is U^{dagger_Q} b / ||.||_Q. Each half step cannot
  // lower |<b|_Q U a>|.
  auto run_restart = [&](int r) {
    std::mt19937_64 rng(derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
    Run run;
    CVector a = q_normalized(q, random_complex(dec.dim(), rng));
    bool converged = false;
    for (int it = 0; it < opts.max_iters; ++it) {
      const CVector ua = u * a;
      const double amp = q_norm(q, ua);
      run.trace.push_back(amp);
      const CVector next = q_normalized(q, u_adj * (ua / amp));
      const double step = q_angle(q, a, next);
      a = next;
      run.iterations = it + 1;
      if (step <= opts.step_tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw Error(ErrorKind::NoConvergence, "restart " + std::to_string(r) + " exhausted " +
                                                std::to_string(opts.max_iters) + " iterations");
    run.amplitude = q_norm(q, u * a);
    run.a = std::move(a);
    return run;
  };

  Run best;
  for (int r = 0; r < opts.restarts; ++r) {
    Run run = run_restart(r);
    if (run.amplitude > best.amplitude) best = std::move(run);
  }

  const CVector ua = u * best.a;
  const CVector b = q_normalized(q, ua);
  MaximizerResult res;
  res.a_star = StateVector(best.a, Side::A);
  res.b_star = StateVector(b, Side::B);
  res.amplitude = std::abs(q_inner(q, b, ua));
  res.max_im = dec.max_im();
  res.subspace_dim = static_cast<int>(max_im_subspace(dec).size());
  res.method = MaximizeMethod::numeric;
  res.T_A = T_A;
  res.T_B = T_B;
  res.iterations = best.iterations;
  res.objective = std::move(best.trace);
  return res;
}

RealityReport verify_reality(const SpectralDecomposition& dec, const QMetric& q, const MaximizerResult& res,
                             int n_observables, const std::vector<double>& t_grid, std::uint64_t seed, double tol,
                             const QuotientOptions& quot) {
  return measure_reality(dec, q, res.a_star, res.b_star, res.T_A, res.T_B, n_observables, t_grid, seed, tol, quot);
}

RealityReport reality_negative_control(const SpectralDecomposition& dec, const QMetric& q, double T_A, double T_B,
                                       int n_observables, const std::vector<double>& t_grid, std::uint64_t seed,
                                       double tol, const QuotientOptions& quot) {
  require_interval(T_A, T_B);
  std::mt19937_64 rng(derive_seed(seed, 0xA11CEULL));
  const CVector a = q_normalized(q, dec.P * random_complex(dec.dim(), rng));
  const CVector b = q_normalized(q, random_complex(dec.dim(), rng));
  return measure_reality(dec, q, StateVector(a, Side::A), StateVector(b, Side::B), T_A, T_B, n_observables, t_grid,
                         seed, tol, quot);
}

bool effective_generator_check(const SpectralDecomposition& dec, const QMetric& q, const MaximizerResult& res,
                               double tol, double deg_tol) {
  const auto top = max_im_subspace(dec, deg_tol);
  const Eigen::Index n = dec.dim();
  // Q-orthogonal projector onto the top eigenspace: sum_k v_k v_k^dagger Q = P E P^{-1}.
  CMatrix proj = CMatrix::Zero(n, n);
  for (auto k : top) proj += dec.P.col(k) * dec.P_inv.row(k);
  const CMatrix restricted = proj * dec.H * proj;
  const CMatrix generator = restricted - Complex(0.0, res.max_im) * proj;
  return is_q_hermitian(q, generator, tol);
}

double max_pair_angle(const SpectralDecomposition& dec, const QMetric& q, const MaximizerResult& res,
                      const std::vector<double>& t_grid) {
  double worst = 0.0;
  for (double t : t_grid) {
    const StateVector at = evolve_a(dec, res.a_star, res.T_A, t);
    const StateVector bt = evolve_b(dec, q, res.b_star, res.T_B, t, BAdjointMode::q_dagger);
    worst = std::max(worst, q_angle(q, bt.amp, at.amp));
  }
  return worst;
}

}  // namespace cact
