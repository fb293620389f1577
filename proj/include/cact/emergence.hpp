#pragma once

// Late-time collapse of a generic state onto the max-Im eigenspace, measured in
// the Q-orthonormal eigenbasis.

#include <cstdint>
#include <vector>

#include "cact/evolution.hpp"

namespace cact {

struct SurvivalSeries {
  std::vector<double> t_grid;
  std::vector<std::vector<double>> weights;  // [time][component], each row sums to 1
  std::vector<double> fidelity_top;          // weight carried by the max-Im subspace
  std::vector<double> defect;                // weight outside it, computed without cancellation
  std::vector<bool> in_top;                  // per component
  CVector lambda;
};

SurvivalSeries survival_fractions(const SpectralDecomposition& dec, const QMetric& q, const StateVector& psi0,
                                  const std::vector<double>& t_grid, double deg_tol = -1.0);

// Least-squares slope of log(weight_i / fidelity_top) over the last half of the grid.
double decay_rate_fit(const SurvivalSeries& series, int component);

// 1 - fidelity_top at time t.
double hermiticity_defect(const SpectralDecomposition& dec, const QMetric& q, const StateVector& psi0, double t,
                          double deg_tol = -1.0);

// Uniform superposition of the Q-orthonormal eigenbasis with seeded relative jitter.
StateVector generic_initial_state(const SpectralDecomposition& dec, std::uint64_t seed, double jitter = 1e-3);

}  // namespace cact
