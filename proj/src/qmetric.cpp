#include "cact/qmetric.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cact/errors.hpp"

namespace cact {

namespace {

void require_vec_dim(const QMetric& q, const CVector& x) {
  if (x.size() != q.dim())
    throw Error(ErrorKind::DimMismatch, "vector of size " + std::to_string(x.size()) + " against metric of dim " +
                                            std::to_string(q.dim()));
}

}  // namespace

QMetric build_q(const SpectralDecomposition& dec, const QMetricOptions& opts) {
  const Eigen::Index n = dec.dim();
  QMetric q;
  CMatrix q_raw = dec.P_inv.adjoint() * dec.P_inv;
  q.Q = 0.5 * (q_raw + q_raw.adjoint());
  CMatrix qi_raw = dec.P * dec.P.adjoint();
  q.Q_inv = 0.5 * (qi_raw + qi_raw.adjoint());

  Eigen::LLT<CMatrix> llt(q.Q);
  q.chol_ok = llt.info() == Eigen::Success;
  if (q.chol_ok) {
    q.L = llt.matrixL();
    for (Eigen::Index i = 0; i < n; ++i)
      if (!(q.L(i, i).real() > 0.0)) q.chol_ok = false;
  }
  if (!q.chol_ok) throw Error(ErrorKind::IllConditioned, "Q failed the Cholesky positive-definiteness certificate");

  const double inv_res = (q.Q * q.Q_inv - CMatrix::Identity(n, n)).norm();
  if (!(inv_res <= opts.inverse_tol))
    throw Error(ErrorKind::IllConditioned, "||Q Q^{-1} - I|| = " + std::to_string(inv_res));
  return q;
}

QMetric identity_metric(Eigen::Index dim) {
  QMetric q;
  q.Q = CMatrix::Identity(dim, dim);
  q.Q_inv = q.Q;
  q.L = q.Q;
  q.chol_ok = true;
  return q;
}

Complex q_inner(const QMetric& q, const CVector& x, const CVector& y) {
  require_vec_dim(q, x);
  require_vec_dim(q, y);
  return x.dot(q.Q * y);
}

double q_norm(const QMetric& q, const CVector& x) {
  require_vec_dim(q, x);
  // ||L^dagger x|| equals sqrt(x^dagger Q x) without the cancellation of the quadratic form.
  return (q.L.adjoint() * x).norm();
}

double q_angle(const QMetric& q, const CVector& x, const CVector& y) {
  const CVector lx = q.L.adjoint() * x;
  const CVector ly = q.L.adjoint() * y;
  const double nx = lx.norm();
  const double ny = ly.norm();
  if (nx == 0.0 || ny == 0.0) throw Error(ErrorKind::ZeroNorm, "angle with a zero vector");
  const CVector ux = lx / nx;
  const CVector uy = ly / ny;
  const Complex overlap = ux.dot(uy);
  const double sine = (uy - overlap * ux).norm();
  return std::atan2(sine, std::abs(overlap));
}

CMatrix q_adjoint(const QMetric& q, const CMatrix& o) {
  require_same_dim(q.Q, o);
  return q.Q_inv * o.adjoint() * q.Q;
}

bool is_q_hermitian(const QMetric& q, const CMatrix& o, double tol) {
  return (q_adjoint(q, o) - o).norm() <= tol * std::max(1.0, o.norm());
}

CMatrix random_q_hermitian(const QMetric& q, std::uint64_t seed) {
  const Eigen::Index n = q.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix s(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s(i, i) = Complex(gauss(rng), 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      s(i, j) = Complex(gauss(rng), gauss(rng)) / std::sqrt(2.0);
      s(j, i) = std::conj(s(i, j));
    }
  }
  const CMatrix l_adj = q.L.adjoint();
  // L^{-dagger} S L^dagger via a triangular solve.
  return l_adj.triangularView<Eigen::Upper>().solve(CMatrix(s * l_adj));
}

}  // namespace cact
