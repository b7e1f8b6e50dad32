#pragma once

// Operations on the composite system as general linear maps on operators.
// A LinearMap is stored as its d^2 x d^2 matrix acting on column-stacked
// operators: vec(A)[i + j*d] = A(i, j), so vec(L rho R) = (R^T (x) L) vec(rho).
// Members need not be completely positive or trace preserving: the expansions
// this library verifies carry negative coefficients, so the full linear space
// of maps is the working arena.

#include "ddmeas/linalg.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace ddmeas {

inline Vector vec(const Matrix& a) {
  return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Matrix unvec(const Vector& v, int d) {
  if (v.size() != Eigen::Index(d) * d) throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

struct LinearMap {
  int total_dim = 0;  // the map acts on total_dim x total_dim operators
  Matrix mat;         // side total_dim^2, column-stacking convention

  static LinearMap identity(int d) { return {d, Matrix::Identity(Eigen::Index(d) * d, Eigen::Index(d) * d)}; }
  static LinearMap zero(int d) { return {d, Matrix::Zero(Eigen::Index(d) * d, Eigen::Index(d) * d)}; }
};

// rho -> l rho r
inline LinearMap sandwich_map(const Matrix& l, const Matrix& r) {
  if (l.rows() != l.cols() || r.rows() != r.cols() || l.rows() != r.rows())
    throw std::invalid_argument("sandwich_map: factors must be square and equal-sized");
  return {int(l.rows()), tensor(r.transpose(), l)};
}

// rho -> u rho u^dag; matrix is conj(u) (x) u in this convention.
inline LinearMap conjugation_map(const Matrix& u) { return sandwich_map(u, u.adjoint()); }

inline LinearMap left_mult_map(const Matrix& a) {
  return sandwich_map(a, Matrix::Identity(a.rows(), a.cols()));
}

inline LinearMap right_mult_map(const Matrix& a) {
  return sandwich_map(Matrix::Identity(a.rows(), a.cols()), a);
}

// Instantaneous pi pulse about the given axis: conjugation by sigma_axis (x) 1.
inline LinearMap pulse_map(Axis axis, const HilbertDims& dims) {
  return conjugation_map(tensor(pauli(axis), Matrix::Identity(dims.env_dim, dims.env_dim)));
}

// Outcome labels are +1/-1 on the X axis and +i/-i on the Y axis; the Y labels
// are kept as exact complex units so the two alphabets stay distinguishable.
inline int outcome_sign(Axis axis, cx outcome) {
  if (axis == Axis::x) {
    if (outcome == cx{1, 0}) return +1;
    if (outcome == cx{-1, 0}) return -1;
  } else if (axis == Axis::y) {
    if (outcome == cx{0, 1}) return +1;
    if (outcome == cx{0, -1}) return -1;
  }
  throw std::invalid_argument("outcome_sign: unknown axis/outcome combination");
}

inline Axis axis_of_outcome(cx outcome) {
  if (outcome == cx{1, 0} || outcome == cx{-1, 0}) return Axis::x;
  if (outcome == cx{0, 1} || outcome == cx{0, -1}) return Axis::y;
  throw std::invalid_argument("axis_of_outcome: outcome is not in {+1,-1,+i,-i}");
}

// Branch map of a projective measurement: rho -> (P_m (x) 1) rho (P_m (x) 1).
// Not trace preserving; the output trace is the outcome probability.
inline LinearMap projection_map(Axis axis, cx outcome, const HilbertDims& dims) {
  const int sign = outcome_sign(axis, outcome);
  const Matrix p = tensor(projector(axis, sign), Matrix::Identity(dims.env_dim, dims.env_dim));
  return sandwich_map(p, p);
}

// D[rho] = (sigma (x) 1) rho + rho (sigma (x) 1). Hermiticity-preserving, not CP.
inline LinearMap anticommutator_map(Axis axis, const HilbertDims& dims) {
  const Matrix s = tensor(pauli(axis), Matrix::Identity(dims.env_dim, dims.env_dim));
  LinearMap l = left_mult_map(s);
  l.mat += right_mult_map(s).mat;
  return l;
}

// outer after inner: compose(A, B)[rho] = A[B[rho]]
inline LinearMap compose(const LinearMap& outer, const LinearMap& inner) {
  if (outer.total_dim != inner.total_dim)
    throw std::invalid_argument("compose: dimension mismatch");
  return {outer.total_dim, outer.mat * inner.mat};
}

inline LinearMap lincomb(const std::vector<std::pair<cx, LinearMap>>& terms) {
  if (terms.empty()) throw std::invalid_argument("lincomb: no terms");
  LinearMap acc = LinearMap::zero(terms.front().second.total_dim);
  for (const auto& [c, l] : terms) {
    if (l.total_dim != acc.total_dim) throw std::invalid_argument("lincomb: dimension mismatch");
    acc.mat += c * l.mat;
  }
  return acc;
}

inline Matrix apply(const LinearMap& l, const Matrix& rho) {
  if (rho.rows() != l.total_dim || rho.cols() != l.total_dim)
    throw std::invalid_argument("apply: operator shape does not match map dimension");
  return unvec(l.mat * vec(rho), l.total_dim);
}

inline Matrix apply(const LinearMap& l, const StateOperator& rho) { return ddmeas::apply(l, rho.rho); }

// Build a map column by column from its action on the operator basis E_ij.
inline LinearMap map_from_action(int d, const std::function<Matrix(const Matrix&)>& action) {
  LinearMap out{d, Matrix(Eigen::Index(d) * d, Eigen::Index(d) * d)};
  Matrix e = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      e(i, j) = 1.0;
      out.mat.col(i + Eigen::Index(j) * d) = vec(action(e));
      e(i, j) = 0.0;
    }
  return out;
}

inline double map_max_abs_diff(const LinearMap& a, const LinearMap& b) {
  if (a.total_dim != b.total_dim)
    throw std::invalid_argument("map_max_abs_diff: dimension mismatch");
  return (a.mat - b.mat).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Informational tags, verified on demand

inline bool is_trace_preserving(const LinearMap& l, double tol = tol::algebraic) {
  const Vector id = vec(Matrix::Identity(l.total_dim, l.total_dim));
  return ((l.mat.adjoint() * id) - id).norm() <= tol * l.total_dim;
}

inline bool is_unital(const LinearMap& l, double tol = tol::algebraic) {
  const Matrix id = Matrix::Identity(l.total_dim, l.total_dim);
  return (ddmeas::apply(l, id) - id).norm() <= tol * l.total_dim;
}

inline Matrix choi_matrix(const LinearMap& l) {
  const int d = l.total_dim;
  Matrix choi(Eigen::Index(d) * d, Eigen::Index(d) * d);
  Matrix e = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      e(i, j) = 1.0;
      choi.block(Eigen::Index(i) * d, Eigen::Index(j) * d, d, d) = ddmeas::apply(l, e);
      e(i, j) = 0.0;
    }
  return choi;
}

inline bool is_completely_positive(const LinearMap& l, double tol = tol::psd_floor) {
  const Matrix c = choi_matrix(l);
  if ((c - c.adjoint()).norm() > tol::algebraic * std::max(1.0, c.norm())) return false;
  return min_eigenvalue_hermitian(0.5 * (c + c.adjoint())) >= -tol * std::max(1.0, c.norm());
}

}  // namespace ddmeas
