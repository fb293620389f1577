#pragma once

// Two-state (pre- and post-selected) evolution and the quotients built from it:
// ordinary averages, weak values, Q-normalized matrix elements.

#include "cact/linalg.hpp"
#include "cact/qmetric.hpp"

namespace cact {

enum class Side { A, B };

struct StateVector {
  CVector amp;
  Side side = Side::A;

  StateVector() = default;
  StateVector(CVector v, Side s);  // throws ZeroNorm / Precondition on zero or non-finite input
};

// How |B> is propagated: with H^dagger (as in the two-time weak value formula)
// or with the Q-adjoint of H.
enum class BAdjointMode { plain_dagger, q_dagger };

struct EvolveOptions {
  bool renormalize = false;  // rescale to unit Euclidean norm after propagating
};

struct QuotientOptions {
  double floor = 1e-12;  // relative to the product of the two state norms
};

struct EvolvingPair {
  StateVector a0;
  StateVector b0;
  double T_A = 0.0;
  double T_B = 1.0;
  BAdjointMode mode = BAdjointMode::q_dagger;
  bool normalized = false;
};

// Validates T_A < T_B; when `normalize` Q-normalizes both boundary states.
EvolvingPair make_pair(const QMetric& q, CVector a0, CVector b0, double T_A, double T_B, BAdjointMode mode,
                       bool normalize);

StateVector evolve_a(const SpectralDecomposition& dec, const StateVector& a0, double t0, double t1,
                     const EvolveOptions& opts = {});

StateVector evolve_b(const SpectralDecomposition& dec, const QMetric& q, const StateVector& b0, double t0, double t1,
                     BAdjointMode mode, const EvolveOptions& opts = {});

// <a|O|a> / <a|a>
Complex ordinary_average(const CMatrix& o, const StateVector& a);

// <b|O|a> / <b|a>
Complex weak_value(const CMatrix& o, const StateVector& b, const StateVector& a, const QuotientOptions& opts = {});

// <b(T_B)| exp(-i(T_B-t)H) O exp(-i(t-T_A)H) |a(T_A)> / <b(T_B)| exp(-i(T_B-T_A)H) |a(T_A)>
Complex weak_value_propagated(const SpectralDecomposition& dec, const CMatrix& o, const StateVector& a_TA,
                              const StateVector& b_TB, double t, double T_A, double T_B,
                              const QuotientOptions& opts = {});

// <b|_Q O|a> / <b|_Q a>
Complex q_matrix_element(const QMetric& q, const CMatrix& o, const StateVector& b, const StateVector& a,
                         const QuotientOptions& opts = {});

}  // namespace cact
