#pragma once

// Dense complex linear algebra for small composite Hilbert spaces.
// Conventions used throughout the library:
//   * factor ordering is system ⊗ environment, everywhere;
//   * Kronecker products are row-major in the factors, so
//     tensor(a, b)(ia*nb + ib, ja*mb + jb) = a(ia, ja) * b(ib, jb);
//   * env_dim = 1 is the scalar-environment limit.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace ddmeas {

using cx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cx iu{0.0, 1.0};

// Tolerance tiers. Algebraic identities on directly constructed objects get
// the tight bound; identities chained through ~2n matrix products the loose
// one (error accumulates through the products).
namespace tol {
inline constexpr double algebraic = 1e-12;
inline constexpr double chained = 1e-10;
inline constexpr double psd_floor = 1e-10;     // eigenvalue floor for positivity
inline constexpr double realness = 1e-10;      // allowed imaginary residue on signals
inline constexpr double control_break = 1e-3;  // required discrepancy in negative controls
}  // namespace tol

struct HilbertDims {
  int system_dim = 2;  // 2 for a qubit, d for a qudit, 2^n for n qubits
  int env_dim = 1;

  int total() const { return system_dim * env_dim; }

  void validate() const {
    if (system_dim < 1 || env_dim < 1)
      throw std::invalid_argument("HilbertDims: both factors must be >= 1");
  }

  bool operator==(const HilbertDims&) const = default;
};

enum class Axis { x, y, z };

inline char axis_char(Axis a) { return a == Axis::x ? 'x' : (a == Axis::y ? 'y' : 'z'); }

// ---------------------------------------------------------------------------
// Structural predicates (Frobenius-norm based)

inline bool is_hermitian(const Matrix& a, double tol = tol::algebraic) {
  return (a - a.adjoint()).norm() <= tol * a.norm() || a.norm() == 0.0;
}

inline bool is_unitary(const Matrix& a, double tol = tol::algebraic) {
  return (a.adjoint() * a - Matrix::Identity(a.rows(), a.cols())).norm() <= tol;
}

inline bool is_projector(const Matrix& p, double tol = tol::algebraic) {
  return (p * p - p).norm() <= tol;
}

// ---------------------------------------------------------------------------
// Constructions

inline Matrix tensor(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b);
}

inline Matrix pauli(Axis k) {
  Matrix s(2, 2);
  switch (k) {
    case Axis::x: s << 0, 1, 1, 0; break;
    case Axis::y: s << 0, -iu, iu, 0; break;
    case Axis::z: s << 1, 0, 0, -1; break;
  }
  return s;
}

// Rank-one eigenprojector (1 + m*sigma_axis)/2 of the transverse Pauli axes.
inline Matrix projector(Axis axis, int m) {
  if (axis == Axis::z)
    throw std::invalid_argument("projector: measurement axes are x and y");
  if (m != +1 && m != -1)
    throw std::invalid_argument("projector: outcome sign must be +1 or -1");
  return 0.5 * (Matrix::Identity(2, 2) + double(m) * pauli(axis));
}

inline double min_eigenvalue_hermitian(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Partial traces

inline Matrix partial_trace_env(const Matrix& rho, const HilbertDims& dims) {
  dims.validate();
  if (rho.rows() != dims.total() || rho.cols() != dims.total())
    throw std::invalid_argument("partial_trace_env: operator shape does not match dims");
  const int ns = dims.system_dim, ne = dims.env_dim;
  Matrix out = Matrix::Zero(ns, ns);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j)
      for (int e = 0; e < ne; ++e) out(i, j) += rho(i * ne + e, j * ne + e);
  return out;
}

inline Matrix partial_trace_sys(const Matrix& rho, const HilbertDims& dims) {
  dims.validate();
  if (rho.rows() != dims.total() || rho.cols() != dims.total())
    throw std::invalid_argument("partial_trace_sys: operator shape does not match dims");
  const int ns = dims.system_dim, ne = dims.env_dim;
  Matrix out = Matrix::Zero(ne, ne);
  for (int e = 0; e < ne; ++e)
    for (int f = 0; f < ne; ++f)
      for (int s = 0; s < ns; ++s) out(e, f) += rho(s * ne + e, s * ne + f);
  return out;
}

// Signals are stored as complex but must be real; a larger residue indicates
// a conjugation-convention bug and is treated as an error, not a warning.
inline double real_checked(cx v, double tol = tol::realness, const char* what = "value") {
  if (std::abs(v.imag()) > tol)
    throw std::runtime_error(std::string(what) + ": imaginary residue " +
                             std::to_string(std::abs(v.imag())) + " exceeds tolerance");
  return v.real();
}

// ---------------------------------------------------------------------------
// States

struct StateOperator {
  enum class Policy { normalized, unnormalized_branch };

  HilbertDims dims;
  Matrix rho;
  Policy policy = Policy::normalized;

  // Normalized density operator: Hermitian, positive semidefinite, unit trace.
  static StateOperator density(const HilbertDims& dims, Matrix entries) {
    StateOperator s{dims, std::move(entries), Policy::normalized};
    s.validate();
    return s;
  }

  // Post-measurement branch: trace is the branch weight, in [0, 1].
  static StateOperator branch(const HilbertDims& dims, Matrix entries) {
    StateOperator s{dims, std::move(entries), Policy::unnormalized_branch};
    s.validate();
    return s;
  }

  void validate() const {
    dims.validate();
    if (rho.rows() != dims.total() || rho.cols() != dims.total())
      throw std::invalid_argument("StateOperator: shape does not match dims");
    if ((rho - rho.adjoint()).norm() > tol::algebraic * std::max(1.0, rho.norm()))
      throw std::invalid_argument("StateOperator: not Hermitian within tolerance");
    if (min_eigenvalue_hermitian(0.5 * (rho + rho.adjoint())) < -tol::psd_floor)
      throw std::invalid_argument("StateOperator: not positive semidefinite within tolerance");
    const double tr = real_checked(rho.trace(), tol::algebraic, "StateOperator trace");
    if (policy == Policy::normalized) {
      if (std::abs(tr - 1.0) > tol::algebraic)
        throw std::invalid_argument("StateOperator: trace must be 1 for a normalized state");
    } else {
      if (tr < -tol::algebraic || tr > 1.0 + tol::algebraic)
        throw std::invalid_argument("StateOperator: branch weight outside [0, 1]");
    }
  }
};

}  // namespace ddmeas
