#include "cact/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "cact/errors.hpp"

namespace cact {

namespace {

// Unit Euclidean norm, first component of (near-)maximal magnitude made real positive.
void fix_phase(Eigen::Ref<CVector> v) {
  v.normalize();
  double best = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) best = std::max(best, std::abs(v(i)));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= best * (1.0 - 1e-10)) {
      v *= std::conj(v(i)) / std::abs(v(i));
      v(i) = Complex(v(i).real(), 0.0);
      return;
    }
  }
}

bool lex_less(const CVector& a, const CVector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

Eigen::Index find_root(std::vector<Eigen::Index>& parent, Eigen::Index i) {
  while (parent[i] != i) i = parent[i] = parent[parent[i]];
  return i;
}

}  // namespace

void require_square_finite(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols())
    throw Error(ErrorKind::DimMismatch, std::string(what) + " is not square");
  if (m.rows() == 0) throw Error(ErrorKind::Precondition, std::string(what) + " is empty");
  if (!m.allFinite()) throw Error(ErrorKind::Precondition, std::string(what) + " has non-finite entries");
}

void require_same_dim(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw Error(ErrorKind::DimMismatch, "operand dimensions differ (" + std::to_string(a.rows()) + "x" +
                                            std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                            "x" + std::to_string(b.cols()) + ")");
}

SpectralDecomposition eig_decompose(const CMatrix& m, const DecomposeOptions& opts) {
  require_square_finite(m, "matrix");
  const Eigen::Index n = m.rows();

  Eigen::ComplexEigenSolver<CMatrix> solver(m, true);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Defective, "complex Schur iteration did not converge");

  CVector vals = solver.eigenvalues();
  CMatrix vecs = solver.eigenvectors();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (vecs.col(j).norm() == 0.0 || !vecs.col(j).allFinite())
      throw Error(ErrorKind::Defective, "degenerate eigenvector returned");
    fix_phase(vecs.col(j));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (vals(a).imag() != vals(b).imag()) return vals(a).imag() > vals(b).imag();
    if (vals(a).real() != vals(b).real()) return vals(a).real() < vals(b).real();
    return lex_less(vecs.col(a), vecs.col(b));
  });

  SpectralDecomposition dec;
  dec.H = m;
  dec.overflow_ceiling = opts.overflow_ceiling;
  dec.lambda.resize(n);
  dec.P.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    dec.lambda(k) = vals(order[static_cast<std::size_t>(k)]);
    dec.P.col(k) = vecs.col(order[static_cast<std::size_t>(k)]);
  }

  // Orthonormalize within clusters of (numerically) equal eigenvalues, in sorted order.
  const double norm_m = m.norm();
  const double cluster_gap = opts.cluster_tol * std::max(1.0, norm_m);
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (std::abs(dec.lambda(i) - dec.lambda(j)) <= cluster_gap)
        parent[find_root(parent, j)] = find_root(parent, i);
  for (Eigen::Index j = 0; j < n; ++j) {
    bool touched = false;
    for (Eigen::Index i = 0; i < j; ++i) {
      if (find_root(parent, i) != find_root(parent, j)) continue;
      dec.P.col(j) -= dec.P.col(i).dot(dec.P.col(j)) * dec.P.col(i);
      touched = true;
    }
    if (!touched) continue;
    if (dec.P.col(j).norm() < 1e-300)
      throw Error(ErrorKind::Defective, "eigenvectors of a repeated eigenvalue are dependent");
    fix_phase(dec.P.col(j));
  }

  Eigen::JacobiSVD<CMatrix> svd(dec.P);
  const auto& sv = svd.singularValues();
  const double smin = sv(n - 1);
  dec.cond_P = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(dec.cond_P <= opts.cond_ceiling))
    throw Error(ErrorKind::Defective, "eigenvector matrix condition number " + std::to_string(dec.cond_P) +
                                          " exceeds ceiling");

  dec.P_inv = dec.P.fullPivLu().inverse();

  const double recon = (m * dec.P - dec.P * dec.lambda.asDiagonal()).norm();
  if (!(recon <= opts.tol_recon * norm_m))
    throw Error(ErrorKind::Defective, "reconstruction residual " + std::to_string(recon) + " exceeds tolerance");
  const double inv_res = (dec.P * dec.P_inv - CMatrix::Identity(n, n)).norm();
  if (!(inv_res <= opts.tol_recon))
    throw Error(ErrorKind::Defective, "inverse residual " + std::to_string(inv_res) + " exceeds tolerance");
  return dec;
}

double default_deg_tol(const SpectralDecomposition& dec) {
  return 1e-9 * std::max(1.0, std::abs(dec.max_im()));
}

std::vector<Eigen::Index> max_im_subspace(const SpectralDecomposition& dec, double deg_tol) {
  if (deg_tol < 0.0) deg_tol = default_deg_tol(dec);
  std::vector<Eigen::Index> top;
  const double cut = dec.max_im() - deg_tol;
  for (Eigen::Index k = 0; k < dec.dim(); ++k)
    if (dec.lambda(k).imag() >= cut) top.push_back(k);
  return top;
}

namespace {

CVector propagator_factors(const CVector& lambda, double t, double ceiling, bool conjugate) {
  const double log_ceiling = std::log(ceiling);
  CVector f(lambda.size());
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    const double re = lambda(k).real();
    const double im = conjugate ? -lambda(k).imag() : lambda(k).imag();
    const double log_mag = im * t;
    if (log_mag > log_ceiling)
      throw Error(ErrorKind::Overflow, "propagator factor exp(" + std::to_string(log_mag) + ") exceeds ceiling");
    f(k) = std::polar(std::exp(log_mag), -re * t);
  }
  return f;
}

}  // namespace

CMatrix mat_exp_prop(const SpectralDecomposition& dec, double t) {
  if (t == 0.0) return CMatrix::Identity(dec.dim(), dec.dim());
  return dec.P * propagator_factors(dec.lambda, t, dec.overflow_ceiling, false).asDiagonal() * dec.P_inv;
}

CMatrix mat_exp_prop_conj(const SpectralDecomposition& dec, double t) {
  if (t == 0.0) return CMatrix::Identity(dec.dim(), dec.dim());
  return dec.P * propagator_factors(dec.lambda, t, dec.overflow_ceiling, true).asDiagonal() * dec.P_inv;
}

double commutator_norm(const CMatrix& a, const CMatrix& b) {
  require_same_dim(a, b);
  return (a * b - b * a).norm();
}

CMatrix random_diagonalizable(int dim, std::uint64_t seed, double im_spread) {
  if (dim < 1) throw Error(ErrorKind::Precondition, "dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  CMatrix s = CMatrix::Identity(dim, dim);
  const double scale = 0.5 / std::sqrt(static_cast<double>(dim));
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) s(i, j) += scale * Complex(gauss(rng), gauss(rng));

  CVector lambda(dim);
  for (int k = 0; k < dim; ++k) {
    const double re = -1.0 + 2.0 * unit(rng);
    const double im = -im_spread * unit(rng);
    lambda(k) = Complex(re, im);
  }
  return s * lambda.asDiagonal() * s.fullPivLu().inverse();
}

CMatrix standard_2x2() {
  CMatrix h(2, 2);
  h << Complex(0, 0), Complex(1, 0), Complex(0, 0), Complex(0, 1);
  return h;
}

}  // namespace cact
