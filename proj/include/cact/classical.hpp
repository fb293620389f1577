#pragma once

// Classical phase-space picture: motion is generated by Re H, paths are scored
// by the time integral of Im H, and initial conditions are chosen to maximize it.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cact::classical {

struct PhaseState {
  std::vector<double> q;
  std::vector<double> p;

  std::size_t dof() const { return q.size(); }
  bool operator==(const PhaseState&) const = default;
};

// c * q_i^pi * q_j^pj
struct Coupling {
  int i = 0;
  int j = 1;
  int pi = 1;
  int pj = 1;
  double c = 0.0;
  bool operator==(const Coupling&) const = default;
};

// w * exp(-|z - center|^2 / (2 sigma^2)) on phase space z = (q, p).
// Positive weight marks a favoured region, negative a penalized one.
struct Bump {
  std::vector<double> center_q;
  std::vector<double> center_p;
  double sigma = 1.0;
  double weight = 1.0;
  bool operator==(const Bump&) const = default;
};

inline constexpr int kMaxDegree = 6;

struct ComplexHamiltonianSpec {
  std::vector<double> masses;
  // coefficients[i][k] multiplies q_i^k, k = 0..6
  std::vector<std::vector<double>> coefficients;
  std::vector<Coupling> couplings;
  std::vector<Bump> bumps;

  std::size_t dof() const { return masses.size(); }
  bool operator==(const ComplexHamiltonianSpec&) const = default;
};

// Throws Validation when the Hamiltonian description breaks its invariants.
void validate(const ComplexHamiltonianSpec& spec);

double potential(const ComplexHamiltonianSpec& spec, const std::vector<double>& q);
std::vector<double> potential_gradient(const ComplexHamiltonianSpec& spec, const std::vector<double>& q);
// Row-major N x N.
std::vector<double> potential_hessian(const ComplexHamiltonianSpec& spec, const std::vector<double>& q);
double re_h(const ComplexHamiltonianSpec& spec, const PhaseState& s);
double im_h(const ComplexHamiltonianSpec& spec, const PhaseState& s);

struct Trajectory {
  double dt = 0.0;
  std::vector<PhaseState> states;
  std::vector<double> energy;

  double horizon() const { return dt * static_cast<double>(states.empty() ? 0 : states.size() - 1); }
};

struct IntegrateOptions {
  double blowup_bound = 1e6;
};

// Kick-drift-kick leapfrog on Re H.
Trajectory integrate(const ComplexHamiltonianSpec& spec, const PhaseState& s0, double dt, int steps,
                     const IntegrateOptions& opts = {});

struct CriticalPoint {
  std::vector<double> q;
  int index = 0;  // number of negative Hessian eigenvalues
  std::vector<double> eigenvalues;
};

struct SaddleSearchOptions {
  double radius = 3.0;
  int starts = 400;
  std::uint64_t seed = 7;
  int max_newton = 100;
  double grad_tol = 1e-12;
  double merge_tol = 1e-6;
};

std::vector<CriticalPoint> saddle_points(const ComplexHamiltonianSpec& spec, const SaddleSearchOptions& opts = {});

struct RewardReport {
  double reward = 0.0;
  std::vector<double> dwell;  // per bump, time within 2 sigma of its center
  double nearest_saddle_distance = -1.0;  // -1 when no index >= 1 critical point is known
};

// Trapezoidal integral of Im H along the path.
double reward_value(const Trajectory& traj, const ComplexHamiltonianSpec& spec);

RewardReport reward(const Trajectory& traj, const ComplexHamiltonianSpec& spec,
                    const std::vector<CriticalPoint>& saddles);
RewardReport reward(const Trajectory& traj, const ComplexHamiltonianSpec& spec);

struct SearchConfig {
  std::vector<double> lower;  // 2N entries: q then p
  std::vector<double> upper;
  int restarts = 8;
  std::uint64_t seed = 1;
  int max_evals = 4000;  // per restart
  double simplex_tol = 1e-12;
  bool operator==(const SearchConfig&) const = default;
};

struct OptResult {
  PhaseState s0_star;
  double reward_star = 0.0;
  int evals = 0;
  std::vector<double> restart_start_rewards;
  std::vector<double> restart_best_rewards;
};

OptResult optimize_initial(const ComplexHamiltonianSpec& spec, double horizon, double dt, const SearchConfig& search,
                           const IntegrateOptions& integ = {});

struct DwellConfig {
  std::vector<double> saddle_q;  // empty: nearest index >= 1 critical point to the origin
  double dt = 1e-3;
  double max_time = 1000.0;
  SaddleSearchOptions search{};
  IntegrateOptions integ{};
};

struct DwellResult {
  double measured = 0.0;
  double predicted = 0.0;
  bool exited = false;
};

// Start at displacement delta along the unstable direction with p = 0 and time
// the exit from |q - q*| < Delta. Predicted: ln(Delta / delta) / lyapunov.
DwellResult dwell_time(const ComplexHamiltonianSpec& spec, double delta, double Delta, double lyapunov,
                       const DwellConfig& cfg = {});

// N uncoupled modes with V_i = -kappa q_i^2 / 2 + q_i^4 / 4, one favourable bump at the phase-space origin.
ComplexHamiltonianSpec inflaton_spec(int n_modes, double mode_curvature, double bump_sigma = 0.3,
                                     double bump_weight = 1.0);

struct InflatonConfig {
  double bump_sigma = 0.3;
  double bump_weight = 1.0;
  double delta = 1e-8;   // leakage floor on each mode's displacement from the saddle
  double Delta = 0.1;
  double dwell_dt = 1e-3;
  double max_time = 1000.0;
  IntegrateOptions integ{};
};

struct InflatonReport {
  std::vector<DwellResult> per_mode_dwell;
  double total_reward = 0.0;
  double saddle_dwell = 0.0;      // time the optimized path spends in the origin bump region
  double efolding_analog = 0.0;   // saddle_dwell * sqrt(kappa)
  OptResult opt;
};

InflatonReport inflaton_toy(int n_modes, double mode_curvature, double horizon, double dt, const SearchConfig& search,
                            const InflatonConfig& cfg = {});

}  // namespace cact::classical
