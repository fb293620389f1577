#include "cact/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "cact/errors.hpp"
#include "cact/seeds.hpp"
#include "nelder_mead.hpp"

namespace cact::classical {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

// d/dx x^k and d2/dx2 x^k
double dpow(double x, int k) { return k == 0 ? 0.0 : k * ipow(x, k - 1); }
double ddpow(double x, int k) { return k < 2 ? 0.0 : k * (k - 1) * ipow(x, k - 2); }

void require_finite(double v, const std::string& what) {
  if (!std::isfinite(v)) throw Error(ErrorKind::Validation, what + " is not finite");
}

double squared_distance(const PhaseState& s, const Bump& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < s.q.size(); ++i) d += (s.q[i] - b.center_q[i]) * (s.q[i] - b.center_q[i]);
  for (std::size_t i = 0; i < s.p.size(); ++i) d += (s.p[i] - b.center_p[i]) * (s.p[i] - b.center_p[i]);
  return d;
}

bool out_of_bounds(const PhaseState& s, double bound) {
  for (double v : s.q)
    if (!(std::abs(v) <= bound)) return true;
  for (double v : s.p)
    if (!(std::abs(v) <= bound)) return true;
  return false;
}

// One kick-drift-kick step. `grad` holds dV/dq at s.q on entry and at the new q on exit.
void leapfrog_step(const ComplexHamiltonianSpec& spec, PhaseState& s, std::vector<double>& grad, double dt) {
  const std::size_t n = s.q.size();
  for (std::size_t i = 0; i < n; ++i) s.p[i] -= 0.5 * dt * grad[i];
  for (std::size_t i = 0; i < n; ++i) s.q[i] += dt * s.p[i] / spec.masses[i];
  grad = potential_gradient(spec, s.q);
  for (std::size_t i = 0; i < n; ++i) s.p[i] -= 0.5 * dt * grad[i];
}

void require_state(const ComplexHamiltonianSpec& spec, const PhaseState& s) {
  if (s.q.size() != spec.dof() || s.p.size() != spec.dof())
    throw Error(ErrorKind::DimMismatch, "phase state has " + std::to_string(s.q.size()) + "/" +
                                            std::to_string(s.p.size()) + " coordinates, spec has " +
                                            std::to_string(spec.dof()));
  for (double v : s.q)
    if (!std::isfinite(v)) throw Error(ErrorKind::Precondition, "non-finite coordinate");
  for (double v : s.p)
    if (!std::isfinite(v)) throw Error(ErrorKind::Precondition, "non-finite momentum");
}

// Reward along a path without storing it; identical arithmetic to integrate() + reward_value().
double path_reward(const ComplexHamiltonianSpec& spec, PhaseState s, double dt, int steps, double bound) {
  std::vector<double> grad = potential_gradient(spec, s.q);
  double prev = im_h(spec, s);
  double acc = 0.0;
  for (int k = 0; k < steps; ++k) {
    leapfrog_step(spec, s, grad, dt);
    if (out_of_bounds(s, bound)) return -std::numeric_limits<double>::infinity();
    const double cur = im_h(spec, s);
    acc += 0.5 * dt * (prev + cur);
    prev = cur;
  }
  return acc;
}

int steps_for(double horizon, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Precondition, "dt must be positive");
  if (!(horizon > 0.0)) throw Error(ErrorKind::Precondition, "horizon must be positive");
  const double ratio = horizon / dt;
  const double steps = std::round(ratio);
  if (std::abs(steps - ratio) > 1e-9 * std::max(1.0, ratio))
    throw Error(ErrorKind::Precondition, "horizon is not an integer multiple of dt");
  return static_cast<int>(steps);
}

Eigen::MatrixXd hessian_matrix(const ComplexHamiltonianSpec& spec, const std::vector<double>& q) {
  const auto n = static_cast<Eigen::Index>(spec.dof());
  const auto flat = potential_hessian(spec, q);
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) h(i, j) = flat[static_cast<std::size_t>(i * n + j)];
  return h;
}

}  // namespace

void validate(const ComplexHamiltonianSpec& spec) {
  const std::size_t n = spec.dof();
  if (n == 0) throw Error(ErrorKind::Validation, "at least one degree of freedom is required");
  for (std::size_t i = 0; i < n; ++i) {
    require_finite(spec.masses[i], "mass");
    if (!(spec.masses[i] > 0.0)) throw Error(ErrorKind::Validation, "masses must be positive");
  }
  if (spec.coefficients.size() != n)
    throw Error(ErrorKind::Validation, "potential needs one coefficient row per coordinate");
  for (const auto& row : spec.coefficients) {
    if (row.size() > kMaxDegree + 1) throw Error(ErrorKind::Validation, "potential degree exceeds 6");
    for (double c : row) require_finite(c, "potential coefficient");
  }
  for (const auto& c : spec.couplings) {
    if (c.i < 0 || c.j < 0 || static_cast<std::size_t>(c.i) >= n || static_cast<std::size_t>(c.j) >= n)
      throw Error(ErrorKind::Validation, "coupling index out of range");
    if (c.pi < 0 || c.pj < 0 || c.pi > kMaxDegree || c.pj > kMaxDegree)
      throw Error(ErrorKind::Validation, "coupling power outside 0..6");
    require_finite(c.c, "coupling coefficient");
  }
  for (const auto& b : spec.bumps) {
    if (b.center_q.size() != n || b.center_p.size() != n)
      throw Error(ErrorKind::Validation, "bump center dimension differs from the phase space");
    require_finite(b.sigma, "bump width");
    require_finite(b.weight, "bump weight");
    if (!(b.sigma > 0.0)) throw Error(ErrorKind::Validation, "bump widths must be positive");
    for (double v : b.center_q) require_finite(v, "bump center");
    for (double v : b.center_p) require_finite(v, "bump center");
  }
}

double potential(const ComplexHamiltonianSpec& spec, const std::vector<double>& q) {
  double v = 0.0;
  for (std::size_t i = 0; i < spec.coefficients.size(); ++i) {
    const auto& row = spec.coefficients[i];
    for (std::size_t k = 0; k < row.size(); ++k) v += row[k] * ipow(q[i], static_cast<int>(k));
  }
  for (const auto& c : spec.couplings) v += c.c * ipow(q[c.i], c.pi) * ipow(q[c.j], c.pj);
  return v;
}

std::vector<double> potential_gradient(const ComplexHamiltonianSpec& spec, const std::vector<double>& q) {
  std::vector<double> g(q.size(), 0.0);
  for (std::size_t i = 0; i < spec.coefficients.size(); ++i) {
    const auto& row = spec.coefficients[i];
    for (std::size_t k = 1; k < row.size(); ++k) g[i] += row[k] * dpow(q[i], static_cast<int>(k));
  }
  for (const auto& c : spec.couplings) {
    if (c.i == c.j) {
      g[c.i] += c.c * dpow(q[c.i], c.pi + c.pj);
      continue;
    }
    g[c.i] += c.c * dpow(q[c.i], c.pi) * ipow(q[c.j], c.pj);
    g[c.j] += c.c * ipow(q[c.i], c.pi) * dpow(q[c.j], c.pj);
  }
  return g;
}

std::vector<double> potential_hessian(const ComplexHamiltonianSpec& spec, const std::vector<double>& q) {
  const std::size_t n = q.size();
  std::vector<double> h(n * n, 0.0);
  for (std::size_t i = 0; i < spec.coefficients.size(); ++i) {
    const auto& row = spec.coefficients[i];
    for (std::size_t k = 2; k < row.size(); ++k) h[i * n + i] += row[k] * ddpow(q[i], static_cast<int>(k));
  }
  for (const auto& c : spec.couplings) {
    const auto i = static_cast<std::size_t>(c.i);
    const auto j = static_cast<std::size_t>(c.j);
    if (i == j) {
      h[i * n + i] += c.c * ddpow(q[i], c.pi + c.pj);
      continue;
    }
    h[i * n + i] += c.c * ddpow(q[i], c.pi) * ipow(q[j], c.pj);
    h[j * n + j] += c.c * ipow(q[i], c.pi) * ddpow(q[j], c.pj);
    const double mixed = c.c * dpow(q[i], c.pi) * dpow(q[j], c.pj);
    h[i * n + j] += mixed;
    h[j * n + i] += mixed;
  }
  return h;
}

double re_h(const ComplexHamiltonianSpec& spec, const PhaseState& s) {
  double kinetic = 0.0;
  for (std::size_t i = 0; i < s.p.size(); ++i) kinetic += 0.5 * s.p[i] * s.p[i] / spec.masses[i];
  return kinetic + potential(spec, s.q);
}

double im_h(const ComplexHamiltonianSpec& spec, const PhaseState& s) {
  double v = 0.0;
  for (const auto& b : spec.bumps) v += b.weight * std::exp(-squared_distance(s, b) / (2.0 * b.sigma * b.sigma));
  return v;
}

Trajectory integrate(const ComplexHamiltonianSpec& spec, const PhaseState& s0, double dt, int steps,
                     const IntegrateOptions& opts) {
  validate(spec);
  require_state(spec, s0);
  if (!(dt > 0.0)) throw Error(ErrorKind::Precondition, "dt must be positive");
  if (steps < 1) throw Error(ErrorKind::Precondition, "at least one step is required");

  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);
  traj.energy.reserve(static_cast<std::size_t>(steps) + 1);
  PhaseState s = s0;
  std::vector<double> grad = potential_gradient(spec, s.q);
  traj.states.push_back(s);
  traj.energy.push_back(re_h(spec, s));
  for (int k = 0; k < steps; ++k) {
    leapfrog_step(spec, s, grad, dt);
    if (out_of_bounds(s, opts.blowup_bound))
      throw Error(ErrorKind::Blowup, "trajectory left the bound " + std::to_string(opts.blowup_bound) + " at step " +
                                         std::to_string(k + 1));
    traj.states.push_back(s);
    traj.energy.push_back(re_h(spec, s));
  }
  return traj;
}

std::vector<CriticalPoint> saddle_points(const ComplexHamiltonianSpec& spec, const SaddleSearchOptions& opts) {
  validate(spec);
  const std::size_t n = spec.dof();
  const auto ni = static_cast<Eigen::Index>(n);

  std::vector<std::vector<double>> starts;
  starts.emplace_back(n, 0.0);
  if (n <= 2) {
    const int per_axis = 21;
    std::vector<double> axis(per_axis);
    for (int k = 0; k < per_axis; ++k) axis[static_cast<std::size_t>(k)] = -opts.radius + 2.0 * opts.radius * k / (per_axis - 1);
    if (n == 1) {
      for (double a : axis) starts.push_back({a});
    } else {
      for (double a : axis)
        for (double b : axis) starts.push_back({a, b});
    }
  } else {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(-opts.radius, opts.radius);
    for (int s = 0; s < opts.starts; ++s) {
      std::vector<double> x(n);
      for (auto& v : x) v = unit(rng);
      starts.push_back(std::move(x));
    }
  }

  auto grad_norm = [&](const std::vector<double>& x) {
    double g2 = 0.0;
    for (double g : potential_gradient(spec, x)) g2 += g * g;
    return std::sqrt(g2);
  };

  std::vector<CriticalPoint> found;
  for (auto x : starts) {
    double gn = grad_norm(x);
    for (int it = 0; it < opts.max_newton && gn > opts.grad_tol; ++it) {
      const auto g = potential_gradient(spec, x);
      Eigen::VectorXd gv(ni);
      for (Eigen::Index i = 0; i < ni; ++i) gv(i) = g[static_cast<std::size_t>(i)];
      const Eigen::VectorXd step = hessian_matrix(spec, x).completeOrthogonalDecomposition().solve(gv);
      if (!step.allFinite() || step.norm() == 0.0) break;
      double damping = 1.0;
      std::vector<double> trial(n);
      double trial_gn = gn;
      for (int back = 0; back < 30; ++back, damping *= 0.5) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - damping * step(static_cast<Eigen::Index>(i));
        trial_gn = grad_norm(trial);
        if (trial_gn < gn) break;
      }
      if (!(trial_gn < gn)) break;
      x = trial;
      gn = trial_gn;
    }
    if (!(gn <= 1e-9)) continue;
    bool inside = true;
    for (double v : x) inside = inside && std::abs(v) <= 2.0 * opts.radius;
    if (!inside) continue;
    bool duplicate = false;
    for (const auto& cp : found) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(cp.q[i] - x[i]));
      if (d <= opts.merge_tol) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    CriticalPoint cp;
    cp.q = x;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian_matrix(spec, x));
    const auto& ev = eig.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < ni; ++i) {
      cp.eigenvalues.push_back(ev(i));
      if (ev(i) < -1e-10 * scale) ++cp.index;
    }
    found.push_back(std::move(cp));
  }
  // Snap values that are zero up to Newton noise, then order lexicographically.
  for (auto& cp : found)
    for (auto& v : cp.q)
      if (std::abs(v) < 1e-14) v = 0.0;
  std::sort(found.begin(), found.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.q < b.q; });
  return found;
}

double reward_value(const Trajectory& traj, const ComplexHamiltonianSpec& spec) {
  if (traj.states.empty()) throw Error(ErrorKind::Precondition, "empty trajectory");
  double prev = im_h(spec, traj.states.front());
  double acc = 0.0;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double cur = im_h(spec, traj.states[k]);
    acc += 0.5 * traj.dt * (prev + cur);
    prev = cur;
  }
  return acc;
}

RewardReport reward(const Trajectory& traj, const ComplexHamiltonianSpec& spec,
                    const std::vector<CriticalPoint>& saddles) {
  RewardReport rep;
  rep.reward = reward_value(traj, spec);
  rep.dwell.assign(spec.bumps.size(), 0.0);

  // Each sample belongs to at most one region (smallest distance in units of sigma),
  // and carries half of each adjacent interval.
  auto region_of = [&](const PhaseState& s) {
    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < spec.bumps.size(); ++b) {
      const double ratio = std::sqrt(squared_distance(s, spec.bumps[b])) / spec.bumps[b].sigma;
      if (ratio <= 2.0 && ratio < best_ratio) {
        best = static_cast<int>(b);
        best_ratio = ratio;
      }
    }
    return best;
  };
  const std::size_t m = traj.states.size();
  for (std::size_t k = 0; k < m; ++k) {
    const int r = region_of(traj.states[k]);
    if (r < 0) continue;
    const double share = (k == 0 || k + 1 == m) ? 0.5 : 1.0;
    if (m > 1) rep.dwell[static_cast<std::size_t>(r)] += share * traj.dt;
  }

  for (const auto& cp : saddles) {
    if (cp.index < 1) continue;
    for (const auto& s : traj.states) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < s.q.size(); ++i) d2 += (s.q[i] - cp.q[i]) * (s.q[i] - cp.q[i]) + s.p[i] * s.p[i];
      const double d = std::sqrt(d2);
      if (rep.nearest_saddle_distance < 0.0 || d < rep.nearest_saddle_distance) rep.nearest_saddle_distance = d;
    }
  }
  return rep;
}

RewardReport reward(const Trajectory& traj, const ComplexHamiltonianSpec& spec) {
  return reward(traj, spec, saddle_points(spec));
}

OptResult optimize_initial(const ComplexHamiltonianSpec& spec, double horizon, double dt, const SearchConfig& search,
                           const IntegrateOptions& integ) {
  validate(spec);
  const int steps = steps_for(horizon, dt);
  const std::size_t n = spec.dof();
  if (search.lower.size() != 2 * n || search.upper.size() != 2 * n)
    throw Error(ErrorKind::Precondition, "search bounds need 2N entries (q then p)");
  for (std::size_t i = 0; i < 2 * n; ++i)
    if (!(search.lower[i] < search.upper[i])) throw Error(ErrorKind::Precondition, "degenerate search bounds");
  if (search.restarts < 1) throw Error(ErrorKind::Precondition, "restarts must be at least 1");

  auto unpack = [n](const std::vector<double>& x) {
    PhaseState s;
    s.q.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n));
    s.p.assign(x.begin() + static_cast<std::ptrdiff_t>(n), x.end());
    return s;
  };
  auto objective = [&](const std::vector<double>& x) {
    return -path_reward(spec, unpack(x), dt, steps, integ.blowup_bound);
  };

  detail::NelderMeadOptions nm;
  nm.max_evals = search.max_evals;
  nm.simplex_tol = search.simplex_tol;

  OptResult out;
  out.reward_star = -std::numeric_limits<double>::infinity();
  bool improved = false;
  std::vector<double> best_x;
  for (int r = 0; r < search.restarts; ++r) {
    std::mt19937_64 rng(derive_seed(search.seed, static_cast<std::uint64_t>(r)));
    std::vector<double> x0(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i)
      x0[i] = std::uniform_real_distribution<double>(search.lower[i], search.upper[i])(rng);
    const auto res = detail::nelder_mead(objective, x0, search.lower, search.upper, nm);
    out.evals += res.evals;
    out.restart_start_rewards.push_back(-res.f_start);
    out.restart_best_rewards.push_back(-res.f);
    if (res.f < res.f_initial_best) improved = true;
    if (-res.f > out.reward_star) {
      out.reward_star = -res.f;
      best_x = res.x;
    }
  }
  if (!improved) throw Error(ErrorKind::NoImprovement, "every restart ended on its initial simplex");
  out.s0_star = unpack(best_x);
  return out;
}

namespace {

struct UnstableDirection {
  std::vector<double> q_star;
  std::vector<double> direction;
};

UnstableDirection unstable_direction(const ComplexHamiltonianSpec& spec, const DwellConfig& cfg) {
  UnstableDirection u;
  const std::size_t n = spec.dof();
  if (!cfg.saddle_q.empty()) {
    if (cfg.saddle_q.size() != n) throw Error(ErrorKind::DimMismatch, "saddle coordinate count differs from spec");
    u.q_star = cfg.saddle_q;
  } else {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cp : saddle_points(spec, cfg.search)) {
      if (cp.index < 1) continue;
      double d = 0.0;
      for (double v : cp.q) d += v * v;
      if (d < best) {
        best = d;
        u.q_star = cp.q;
      }
    }
    if (u.q_star.empty()) throw Error(ErrorKind::Precondition, "no hyperbolic fixed point found");
  }
  // Mass-weighted Hessian M^{-1/2} H M^{-1/2}; the most negative mode is the unstable one.
  Eigen::MatrixXd h = hessian_matrix(spec, u.q_star);
  const auto ni = static_cast<Eigen::Index>(n);
  Eigen::VectorXd inv_sqrt_m(ni);
  for (Eigen::Index i = 0; i < ni; ++i) inv_sqrt_m(i) = 1.0 / std::sqrt(spec.masses[static_cast<std::size_t>(i)]);
  h = inv_sqrt_m.asDiagonal() * h * inv_sqrt_m.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  if (!(eig.eigenvalues()(0) < 0.0)) throw Error(ErrorKind::Precondition, "fixed point is not hyperbolic");
  Eigen::VectorXd d = inv_sqrt_m.asDiagonal() * eig.eigenvectors().col(0);
  d.normalize();
  // Deterministic sign: first nonzero component positive.
  for (Eigen::Index i = 0; i < ni; ++i) {
    if (std::abs(d(i)) > 1e-12) {
      if (d(i) < 0.0) d = -d;
      break;
    }
  }
  u.direction.assign(d.data(), d.data() + ni);
  return u;
}

// Linear interpolation of the crossing time of `level` between two samples.
double crossing_time(double t0, double r0, double t1, double r1, double level) {
  if (r1 == r0) return t1;
  return t0 + (t1 - t0) * (level - r0) / (r1 - r0);
}

}  // namespace

DwellResult dwell_time(const ComplexHamiltonianSpec& spec, double delta, double Delta, double lyapunov,
                       const DwellConfig& cfg) {
  validate(spec);
  if (!(lyapunov > 0.0)) throw Error(ErrorKind::Precondition, "lyapunov exponent must be positive");
  if (!(delta > 0.0) || !(delta <= Delta)) throw Error(ErrorKind::Precondition, "need 0 < delta <= Delta");
  if (!(cfg.dt > 0.0)) throw Error(ErrorKind::Precondition, "dt must be positive");

  const auto u = unstable_direction(spec, cfg);
  const std::size_t n = spec.dof();
  PhaseState s;
  s.q.resize(n);
  s.p.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) s.q[i] = u.q_star[i] + delta * u.direction[i];

  auto radius = [&](const PhaseState& st) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) d2 += (st.q[i] - u.q_star[i]) * (st.q[i] - u.q_star[i]);
    return std::sqrt(d2);
  };

  DwellResult res;
  res.predicted = std::log(Delta / delta) / lyapunov;
  double r_prev = radius(s);
  if (r_prev >= Delta) {
    res.exited = true;
    return res;
  }
  std::vector<double> grad = potential_gradient(spec, s.q);
  const auto max_steps = static_cast<long long>(std::ceil(cfg.max_time / cfg.dt));
  for (long long k = 0; k < max_steps; ++k) {
    leapfrog_step(spec, s, grad, cfg.dt);
    if (out_of_bounds(s, cfg.integ.blowup_bound)) throw Error(ErrorKind::Blowup, "dwell trajectory escaped");
    const double r = radius(s);
    if (r >= Delta) {
      res.measured = crossing_time(static_cast<double>(k) * cfg.dt, r_prev, static_cast<double>(k + 1) * cfg.dt, r,
                                   Delta);
      res.exited = true;
      return res;
    }
    r_prev = r;
  }
  res.measured = static_cast<double>(max_steps) * cfg.dt;
  return res;
}

ComplexHamiltonianSpec inflaton_spec(int n_modes, double mode_curvature, double bump_sigma, double bump_weight) {
  if (n_modes < 1) throw Error(ErrorKind::Precondition, "n_modes must be at least 1");
  if (!(mode_curvature > 0.0)) throw Error(ErrorKind::Precondition, "mode curvature must be positive");
  const auto n = static_cast<std::size_t>(n_modes);
  ComplexHamiltonianSpec spec;
  spec.masses.assign(n, 1.0);
  spec.coefficients.assign(n, {0.0, 0.0, -0.5 * mode_curvature, 0.0, 0.25});
  spec.bumps.push_back(Bump{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), bump_sigma, bump_weight});
  validate(spec);
  return spec;
}

InflatonReport inflaton_toy(int n_modes, double mode_curvature, double horizon, double dt, const SearchConfig& search,
                            const InflatonConfig& cfg) {
  const auto spec = inflaton_spec(n_modes, mode_curvature, cfg.bump_sigma, cfg.bump_weight);
  const auto n = static_cast<std::size_t>(n_modes);
  const double rate = std::sqrt(mode_curvature);

  InflatonReport rep;
  rep.opt = optimize_initial(spec, horizon, dt, search, cfg.integ);
  const auto traj = integrate(spec, rep.opt.s0_star, dt, steps_for(horizon, dt), cfg.integ);
  CriticalPoint origin{std::vector<double>(n, 0.0), n_modes, std::vector<double>(n, -mode_curvature)};
  const auto rr = reward(traj, spec, {origin});
  rep.total_reward = rr.reward;
  rep.saddle_dwell = rr.dwell.empty() ? 0.0 : rr.dwell[0];
  rep.efolding_analog = rep.saddle_dwell * rate;

  // Leakage floor: every mode displaced by delta from the joint saddle, p = 0.
  if (!(cfg.delta > 0.0) || !(cfg.delta <= cfg.Delta))
    throw Error(ErrorKind::Precondition, "need 0 < delta <= Delta");
  PhaseState s{std::vector<double>(n, cfg.delta), std::vector<double>(n, 0.0)};
  rep.per_mode_dwell.assign(n, DwellResult{0.0, std::log(cfg.Delta / cfg.delta) / rate, false});
  std::vector<double> grad = potential_gradient(spec, s.q);
  std::size_t remaining = n;
  const double max_time = cfg.max_time;
  const auto max_steps = static_cast<long long>(std::ceil(max_time / cfg.dwell_dt));
  for (long long k = 0; k < max_steps && remaining > 0; ++k) {
    const PhaseState prev = s;
    leapfrog_step(spec, s, grad, cfg.dwell_dt);
    if (out_of_bounds(s, cfg.integ.blowup_bound)) throw Error(ErrorKind::Blowup, "inflaton mode escaped");
    for (std::size_t i = 0; i < n; ++i) {
      auto& d = rep.per_mode_dwell[i];
      if (d.exited || std::abs(s.q[i]) < cfg.Delta) continue;
      d.measured = crossing_time(static_cast<double>(k) * cfg.dwell_dt, std::abs(prev.q[i]),
                                 static_cast<double>(k + 1) * cfg.dwell_dt, std::abs(s.q[i]), cfg.Delta);
      d.exited = true;
      --remaining;
    }
  }
  for (auto& d : rep.per_mode_dwell)
    if (!d.exited) d.measured = max_time;
  return rep;
}

}  // namespace cact::classical
