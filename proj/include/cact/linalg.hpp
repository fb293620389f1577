#pragma once

// Dense complex matrix primitives: diagonalization of non-normal matrices,
// eigenbasis propagators, commutators.

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace cact {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct DecomposeOptions {
  double tol_recon = 1e-8;     // relative reconstruction residual
  double cond_ceiling = 1e8;   // largest accepted condition number of P
  double cluster_tol = 1e-9;   // relative, eigenvalues closer than this are treated as degenerate
  double overflow_ceiling = 1e150;  // largest |exp(-i lambda t)| a propagator may contain
};

// H = P diag(lambda) P^{-1}. Columns of P are unit-norm right eigenvectors with
// the largest-magnitude component real positive. Ordered by decreasing Im,
// then increasing Re.
struct SpectralDecomposition {
  CMatrix H;
  CMatrix P;
  CVector lambda;
  CMatrix P_inv;
  double cond_P = 1.0;
  double overflow_ceiling = 1e150;

  Eigen::Index dim() const { return lambda.size(); }
  double max_im() const { return lambda.size() > 0 ? lambda(0).imag() : 0.0; }
};

void require_square_finite(const CMatrix& m, const char* what);
void require_same_dim(const CMatrix& a, const CMatrix& b);

SpectralDecomposition eig_decompose(const CMatrix& m, const DecomposeOptions& opts = {});

// Indices of eigenvalues whose Im lies within deg_tol of the largest Im.
// deg_tol < 0 selects the default 1e-9 * max(1, |max_im|).
std::vector<Eigen::Index> max_im_subspace(const SpectralDecomposition& dec, double deg_tol = -1.0);
double default_deg_tol(const SpectralDecomposition& dec);

// P diag(exp(-i lambda t)) P^{-1}. Throws Overflow past dec.overflow_ceiling.
CMatrix mat_exp_prop(const SpectralDecomposition& dec, double t);

// P diag(exp(-i conj(lambda) t)) P^{-1}, the propagator of the eigenbasis-conjugated generator.
CMatrix mat_exp_prop_conj(const SpectralDecomposition& dec, double t);

double commutator_norm(const CMatrix& a, const CMatrix& b);

// Non-normal diagonalizable test matrix: H = S diag(lambda) S^{-1} with
// S = I + 0.5 G / sqrt(dim), G complex Gaussian. Re lambda in [-1, 1],
// Im lambda in [-im_spread, 0].
CMatrix random_diagonalizable(int dim, std::uint64_t seed, double im_spread);

// [[0, 1], [0, i]]
CMatrix standard_2x2();

}  // namespace cact
