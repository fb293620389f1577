#include "cact/emergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "cact/errors.hpp"

namespace cact {

namespace {

constexpr double kWeightFloor = 1e-280;

struct Row {
  std::vector<double> weights;
  double top = 0.0;
  double rest = 0.0;
};

// Weights |c_k(t)|^2 / sum |c_j(t)|^2 with c_k(t) = exp(-i lambda_k t) c_k(0),
// assembled in log space so that long horizons do not overflow.
Row weights_at(const CVector& c0, const CVector& lambda, const std::vector<bool>& in_top, double t) {
  const Eigen::Index n = c0.size();
  std::vector<double> logmag(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  double peak = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double m = std::abs(c0(k));
    if (m == 0.0) continue;
    logmag[static_cast<std::size_t>(k)] = std::log(m) + lambda(k).imag() * t;
    peak = std::max(peak, logmag[static_cast<std::size_t>(k)]);
  }
  Row row;
  row.weights.assign(static_cast<std::size_t>(n), 0.0);
  double total = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double w = std::exp(2.0 * (logmag[static_cast<std::size_t>(k)] - peak));
    row.weights[static_cast<std::size_t>(k)] = w;
    total += w;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    auto& w = row.weights[static_cast<std::size_t>(k)];
    w /= total;
    (in_top[static_cast<std::size_t>(k)] ? row.top : row.rest) += w;
  }
  return row;
}

CVector eigen_coefficients(const SpectralDecomposition& dec, const QMetric& q, const StateVector& psi0) {
  if (psi0.amp.size() != dec.dim()) throw Error(ErrorKind::DimMismatch, "state and Hamiltonian dimensions differ");
  if (!(q_norm(q, psi0.amp) > 0.0)) throw Error(ErrorKind::ZeroNorm, "initial state has zero Q-norm");
  // Coordinates in the Q-orthonormal eigenbasis.
  return dec.P_inv * psi0.amp;
}

std::vector<bool> top_mask(const SpectralDecomposition& dec, double deg_tol) {
  std::vector<bool> mask(static_cast<std::size_t>(dec.dim()), false);
  for (auto k : max_im_subspace(dec, deg_tol)) mask[static_cast<std::size_t>(k)] = true;
  return mask;
}

}  // namespace

SurvivalSeries survival_fractions(const SpectralDecomposition& dec, const QMetric& q, const StateVector& psi0,
                                  const std::vector<double>& t_grid, double deg_tol) {
  const CVector c0 = eigen_coefficients(dec, q, psi0);
  SurvivalSeries s;
  s.t_grid = t_grid;
  s.in_top = top_mask(dec, deg_tol);
  s.lambda = dec.lambda;
  for (double t : t_grid) {
    Row row = weights_at(c0, dec.lambda, s.in_top, t);
    s.weights.push_back(std::move(row.weights));
    s.fidelity_top.push_back(row.top);
    s.defect.push_back(row.rest);
  }
  return s;
}

double decay_rate_fit(const SurvivalSeries& series, int component) {
  if (component < 0 || static_cast<std::size_t>(component) >= series.in_top.size())
    throw Error(ErrorKind::Precondition, "component index out of range");
  if (series.in_top[static_cast<std::size_t>(component)])
    throw Error(ErrorKind::Precondition, "component " + std::to_string(component) + " lies in the max-Im subspace");

  const std::size_t n = series.t_grid.size();
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  int used = 0;
  for (std::size_t i = n / 2; i < n; ++i) {
    const double w = series.weights[i][static_cast<std::size_t>(component)];
    const double f = series.fidelity_top[i];
    if (!(w > kWeightFloor) || !(f > kWeightFloor)) continue;
    const double t = series.t_grid[i];
    const double y = std::log(w) - std::log(f);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++used;
  }
  if (used < 4) throw Error(ErrorKind::InsufficientData, std::to_string(used) + " usable points in fit window");
  const double denom = used * stt - st * st;
  if (!(denom > 0.0)) throw Error(ErrorKind::InsufficientData, "fit window has no time spread");
  return (used * sty - st * sy) / denom;
}

double hermiticity_defect(const SpectralDecomposition& dec, const QMetric& q, const StateVector& psi0, double t,
                          double deg_tol) {
  const CVector c0 = eigen_coefficients(dec, q, psi0);
  return weights_at(c0, dec.lambda, top_mask(dec, deg_tol), t).rest;
}

StateVector generic_initial_state(const SpectralDecomposition& dec, std::uint64_t seed, double jitter) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  CVector c(dec.dim());
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = Complex(1.0 + jitter * unit(rng), jitter * unit(rng));
  CVector psi = dec.P * c;
  // Eigencoordinates c have unit Q-norm scale up to the jitter; normalize exactly.
  psi /= (c.norm());
  return StateVector(psi, Side::A);
}

}  // namespace cact
