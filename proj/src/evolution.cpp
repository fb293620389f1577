#include "cact/evolution.hpp"

#include <cmath>
#include <string>

#include "cact/errors.hpp"

namespace cact {

namespace {

void require_dim(const CMatrix& o, const CVector& v) {
  if (o.rows() != v.size() || o.cols() != v.size())
    throw Error(ErrorKind::DimMismatch, "operator and state dimensions differ");
}

void require_dim(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimMismatch, "state dimensions differ");
}

Complex guarded_quotient(Complex num, Complex den, double scale, double floor) {
  if (!(std::abs(den) > floor * scale))
    throw Error(ErrorKind::NearOrthogonal,
                "|overlap| = " + std::to_string(std::abs(den)) + " below floor " + std::to_string(floor * scale));
  if (num == den) return {1.0, 0.0};  // std::complex division is not exact for z / z
  return num / den;
}

StateVector finish(CVector v, Side side, const EvolveOptions& opts) {
  if (opts.renormalize) {
    const double n = v.norm();
    if (n > 0.0 && std::isfinite(n)) v /= n;
  }
  return StateVector(std::move(v), side);
}

}  // namespace

StateVector::StateVector(CVector v, Side s) : amp(std::move(v)), side(s) {
  if (amp.size() == 0) throw Error(ErrorKind::Precondition, "empty state vector");
  if (!amp.allFinite()) throw Error(ErrorKind::Precondition, "state vector has non-finite entries");
  if (amp.norm() == 0.0) throw Error(ErrorKind::ZeroNorm, "state vector is identically zero");
}

EvolvingPair make_pair(const QMetric& q, CVector a0, CVector b0, double T_A, double T_B, BAdjointMode mode,
                       bool normalize) {
  if (!(T_A < T_B)) throw Error(ErrorKind::Precondition, "T_A must precede T_B");
  EvolvingPair pair{StateVector(std::move(a0), Side::A), StateVector(std::move(b0), Side::B), T_A, T_B, mode,
                    normalize};
  if (normalize) {
    pair.a0.amp /= q_norm(q, pair.a0.amp);
    pair.b0.amp /= q_norm(q, pair.b0.amp);
  }
  return pair;
}

StateVector evolve_a(const SpectralDecomposition& dec, const StateVector& a0, double t0, double t1,
                     const EvolveOptions& opts) {
  require_dim(dec.P, a0.amp);
  if (t1 == t0) return a0;
  return finish(mat_exp_prop(dec, t1 - t0) * a0.amp, a0.side, opts);
}

StateVector evolve_b(const SpectralDecomposition& dec, const QMetric& q, const StateVector& b0, double t0, double t1,
                     BAdjointMode mode, const EvolveOptions& opts) {
  require_dim(dec.P, b0.amp);
  if (t1 == t0) return b0;
  const double dt = t1 - t0;
  if (mode == BAdjointMode::q_dagger) {
    const Eigen::Index n = dec.dim();
    if ((dec.P.adjoint() * q.Q * dec.P - CMatrix::Identity(n, n)).norm() <= 1e-8) {
      // Eigenbasis is Q-orthonormal, so H^{dagger_Q} = P diag(conj(lambda)) P^{-1}.
      return finish(mat_exp_prop_conj(dec, dt) * b0.amp, b0.side, opts);
    }
    DecomposeOptions dopts;
    dopts.overflow_ceiling = dec.overflow_ceiling;
    const SpectralDecomposition adj = eig_decompose(q_adjoint(q, dec.H), dopts);
    return finish(mat_exp_prop(adj, dt) * b0.amp, b0.side, opts);
  }
  // exp(-i H^dagger dt) = (exp(i H dt))^dagger
  return finish(mat_exp_prop(dec, -dt).adjoint() * b0.amp, b0.side, opts);
}

Complex ordinary_average(const CMatrix& o, const StateVector& a) {
  require_dim(o, a.amp);
  const Complex nn = a.amp.dot(a.amp);
  if (nn == 0.0) throw Error(ErrorKind::ZeroNorm, "ordinary average of a zero state");
  const Complex num = a.amp.dot(o * a.amp);
  return num == nn ? Complex(1.0, 0.0) : num / nn;
}

Complex weak_value(const CMatrix& o, const StateVector& b, const StateVector& a, const QuotientOptions& opts) {
  require_dim(o, a.amp);
  require_dim(a.amp, b.amp);
  return guarded_quotient(b.amp.dot(o * a.amp), b.amp.dot(a.amp), b.amp.norm() * a.amp.norm(), opts.floor);
}

Complex weak_value_propagated(const SpectralDecomposition& dec, const CMatrix& o, const StateVector& a_TA,
                              const StateVector& b_TB, double t, double T_A, double T_B, const QuotientOptions& opts) {
  if (!(T_A <= t && t <= T_B)) throw Error(ErrorKind::Precondition, "insertion time outside [T_A, T_B]");
  require_dim(o, a_TA.amp);
  require_dim(a_TA.amp, b_TB.amp);
  const CVector left = mat_exp_prop(dec, T_B - t).adjoint() * b_TB.amp;
  const CVector right = mat_exp_prop(dec, t - T_A) * a_TA.amp;
  // left^dagger right equals <b| exp(-i(T_B-T_A)H) |a>; using it keeps O = I exact.
  return guarded_quotient(left.dot(o * right), left.dot(right), left.norm() * right.norm(), opts.floor);
}

Complex q_matrix_element(const QMetric& q, const CMatrix& o, const StateVector& b, const StateVector& a,
                         const QuotientOptions& opts) {
  require_dim(o, a.amp);
  require_dim(a.amp, b.amp);
  const CVector qb = q.Q * b.amp;
  return guarded_quotient(qb.dot(o * a.amp), qb.dot(a.amp), q_norm(q, b.amp) * q_norm(q, a.amp), opts.floor);
}

}  // namespace cact
