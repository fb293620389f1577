#pragma once

// Metric operator Q making a diagonalizable H normal: Q = (P^{-1})^dagger P^{-1}.
// In <x|_Q y> = x^dagger Q y the right eigenvectors of H are orthonormal.

#include <cstdint>

#include "cact/linalg.hpp"

namespace cact {

struct QMetric {
  CMatrix Q;
  CMatrix Q_inv;
  CMatrix L;  // Cholesky factor, Q = L L^dagger
  bool chol_ok = false;

  Eigen::Index dim() const { return Q.rows(); }
};

struct QMetricOptions {
  double inverse_tol = 1e-9;  // bound on ||Q Q_inv - I||_F
};

QMetric build_q(const SpectralDecomposition& dec, const QMetricOptions& opts = {});

// Q = I, for comparisons against the ordinary inner product.
QMetric identity_metric(Eigen::Index dim);

Complex q_inner(const QMetric& q, const CVector& x, const CVector& y);
double q_norm(const QMetric& q, const CVector& x);

// Angle between the complex rays spanned by x and y in the Q geometry, in [0, pi/2].
double q_angle(const QMetric& q, const CVector& x, const CVector& y);

// Q^{-1} O^dagger Q
CMatrix q_adjoint(const QMetric& q, const CMatrix& o);

bool is_q_hermitian(const QMetric& q, const CMatrix& o, double tol);

// L^{-dagger} S L^dagger for a seeded random Hermitian S; Q-Hermitian by construction.
CMatrix random_q_hermitian(const QMetric& q, std::uint64_t seed);

}  // namespace cact
