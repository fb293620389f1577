#pragma once

#include <random>

#include "doctest.h"

#include "cact/errors.hpp"
#include "cact/linalg.hpp"

namespace testing {

using cact::CMatrix;
using cact::Complex;
using cact::CVector;

inline CVector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  CVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
  return v;
}

inline CMatrix gaussian_matrix(Eigen::Index n, std::mt19937_64& rng) {
  CMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m.col(j) = gaussian_vector(n, rng);
  return m;
}

// exp(-i H t) by scaling and squaring with a 20-term Taylor series; shares no
// code with the eigenbasis propagator.
inline CMatrix taylor_propagator(const CMatrix& H, double t) {
  const CMatrix A = Complex(0.0, -t) * H;
  int squarings = 0;
  double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const CMatrix B = A / std::pow(2.0, squarings);
  CMatrix term = CMatrix::Identity(H.rows(), H.cols());
  CMatrix sum = term;
  for (int k = 1; k <= 20; ++k) {
    term = term * B / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

inline bool rel_close(double a, double b, double tol) { return std::abs(a - b) <= tol * std::abs(b); }

}  // namespace testing

#define CHECK_THROWS_KIND(expr, k)                            \
  do {                                                        \
    bool thrown_ = false;                                     \
    try {                                                     \
      (void)(expr);                                           \
    } catch (const cact::Error& e_) {                         \
      thrown_ = true;                                         \
      CHECK_MESSAGE(e_.kind() == (k), e_.what());             \
    }                                                         \
    CHECK_MESSAGE(thrown_, "expected cact::Error: " #expr);   \
  } while (0)
