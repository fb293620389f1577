#pragma once

// Boundary-state selection by maximizing |<B(T_B)|_Q exp(-iH(T_B-T_A)) |A(T_A)>|
// over Q-normalized pairs, and checks that Q-normalized matrix elements of
// Q-Hermitian observables come out real at the optimum.

#include <cstdint>
#include <vector>

#include "cact/evolution.hpp"

namespace cact {

enum class MaximizeMethod { analytic, numeric };

struct MaximizerResult {
  StateVector a_star;  // at T_A
  StateVector b_star;  // at T_B
  double amplitude = 0.0;
  double max_im = 0.0;
  int subspace_dim = 1;
  MaximizeMethod method = MaximizeMethod::analytic;
  double T_A = 0.0;
  double T_B = 1.0;
  int iterations = 0;               // numeric only
  std::vector<double> objective;    // numeric only, best restart, per iteration
};

MaximizerResult analytic_maximize(const SpectralDecomposition& dec, const QMetric& q, double T_A, double T_B,
                                  double deg_tol = -1.0);

struct NumericMaximizeOptions {
  int restarts = 4;
  std::uint64_t seed = 1;
  int max_iters = 20000;
  double step_tol = 1e-12;
};

MaximizerResult numeric_maximize(const SpectralDecomposition& dec, const QMetric& q, double T_A, double T_B,
                                 const NumericMaximizeOptions& opts = {});

struct RealityReport {
  int observables = 0;
  int time_points = 0;
  double max_abs_im = 0.0;
  bool pass = false;
};

RealityReport verify_reality(const SpectralDecomposition& dec, const QMetric& q, const MaximizerResult& res,
                             int n_observables, const std::vector<double>& t_grid, std::uint64_t seed, double tol,
                             const QuotientOptions& quot = {});

// Same measurement on a deliberately non-maximizing pair: |A> spread over all
// eigencomponents, |B> random. Generically pass == false.
RealityReport reality_negative_control(const SpectralDecomposition& dec, const QMetric& q, double T_A, double T_B,
                                       int n_observables, const std::vector<double>& t_grid, std::uint64_t seed,
                                       double tol, const QuotientOptions& quot = {});

bool effective_generator_check(const SpectralDecomposition& dec, const QMetric& q, const MaximizerResult& res,
                               double tol, double deg_tol = -1.0);

// Largest Q-angle between |B(t)> (H^{dagger_Q} evolution from T_B) and |A(t)> over the grid.
double max_pair_angle(const SpectralDecomposition& dec, const QMetric& q, const MaximizerResult& res,
                      const std::vector<double>& t_grid);

// n points evenly spaced over [T_A, T_B], both ends included.
std::vector<double> uniform_grid(double T_A, double T_B, int n);

}  // namespace cact
