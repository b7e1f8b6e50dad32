#pragma once

// Composite qubit+environment models: Hamiltonian data, seeded random model
// generation, and evolution unitaries via Hermitian eigendecomposition.

#include "ddmeas/linalg.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

namespace ddmeas {

enum class ModelKind { general, pure_dephasing };

// Kind of evolution generator on one interval: the full composite Hamiltonian,
// or the environment Hamiltonian alone (qubit decoupled for a finite time).
enum class SegmentKind { composite, env_only };

// Pure-dephasing fast path: H = a_z sigma_z (x) V_z + a_1 1 (x) V_1.
struct DephasingParams {
  double a_z = 0.0;
  double a_1 = 0.0;
  Matrix v_z;
  Matrix v_1;
};

struct ModelSpec {
  HilbertDims dims;
  Matrix qubit_h;                   // on the system factor
  Matrix env_h;                     // on the environment factor
  std::map<char, Matrix> couplings; // axis label in {x,y,z} -> Hermitian V_k
  std::optional<DephasingParams> dephasing;
  Matrix env_initial;               // environment density matrix rho_E
  std::uint64_t seed = 0;

  bool is_pure_dephasing() const { return dephasing.has_value(); }

  // Full-space generator for the given segment kind.
  Matrix hamiltonian(SegmentKind kind) const {
    const Matrix id_q = Matrix::Identity(dims.system_dim, dims.system_dim);
    const Matrix id_e = Matrix::Identity(dims.env_dim, dims.env_dim);
    if (kind == SegmentKind::env_only) return tensor(id_q, env_h);
    Matrix h = tensor(qubit_h, id_e) + tensor(id_q, env_h);
    for (const auto& [axis, v] : couplings) {
      Axis a = axis == 'x' ? Axis::x : (axis == 'y' ? Axis::y : Axis::z);
      h += tensor(pauli(a), v);
    }
    return h;
  }

  void validate() const {
    dims.validate();
    if (dims.system_dim != 2)
      throw std::invalid_argument("ModelSpec: system factor must be a qubit");
    const int ne = dims.env_dim;
    auto check_shape = [](const Matrix& m, int n, const char* what) {
      if (m.rows() != n || m.cols() != n)
        throw std::invalid_argument(std::string("ModelSpec: bad shape for ") + what);
    };
    check_shape(qubit_h, 2, "qubit_hamiltonian");
    check_shape(env_h, ne, "env_hamiltonian");
    check_shape(env_initial, ne, "env_initial");
    if (!is_hermitian(qubit_h)) throw std::invalid_argument("ModelSpec: qubit_hamiltonian not Hermitian");
    if (!is_hermitian(env_h)) throw std::invalid_argument("ModelSpec: env_hamiltonian not Hermitian");
    for (const auto& [axis, v] : couplings) {
      if (axis != 'x' && axis != 'y' && axis != 'z')
        throw std::invalid_argument("ModelSpec: unknown coupling axis");
      check_shape(v, ne, "coupling");
      if (!is_hermitian(v)) throw std::invalid_argument("ModelSpec: coupling operator not Hermitian");
    }
    StateOperator::density({1, ne}, env_initial);  // Hermitian, PSD, unit trace
    if (dephasing) {
      for (char a : {'x', 'y'}) {
        auto it = couplings.find(a);
        if (it != couplings.end() && it->second.norm() > tol::algebraic)
          throw std::invalid_argument("ModelSpec: dephasing model has a transverse coupling");
      }
      check_shape(dephasing->v_z, ne, "V_z");
      check_shape(dephasing->v_1, ne, "V_1");
      const Matrix rebuilt = dephasing->a_z * tensor(pauli(Axis::z), dephasing->v_z) +
                             dephasing->a_1 * tensor(Matrix::Identity(2, 2), dephasing->v_1);
      if ((rebuilt - hamiltonian(SegmentKind::composite)).norm() > tol::algebraic)
        throw std::invalid_argument("ModelSpec: dephasing parameters do not reproduce the Hamiltonian");
    }
  }

  bool operator==(const ModelSpec& o) const {
    auto eq = [](const Matrix& a, const Matrix& b) {
      return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
    };
    if (!(dims == o.dims) || seed != o.seed) return false;
    if (!eq(qubit_h, o.qubit_h) || !eq(env_h, o.env_h) || !eq(env_initial, o.env_initial)) return false;
    if (couplings.size() != o.couplings.size()) return false;
    for (const auto& [a, v] : couplings) {
      auto it = o.couplings.find(a);
      if (it == o.couplings.end() || !eq(v, it->second)) return false;
    }
    if (dephasing.has_value() != o.dephasing.has_value()) return false;
    if (dephasing &&
        !(dephasing->a_z == o.dephasing->a_z && dephasing->a_1 == o.dephasing->a_1 &&
          eq(dephasing->v_z, o.dephasing->v_z) && eq(dephasing->v_1, o.dephasing->v_1)))
      return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Seeded randomness. All draws flow through one generator in a fixed order.

struct Rng {
  std::mt19937_64 gen;
  std::normal_distribution<double> normal{0.0, 1.0};
  std::uniform_real_distribution<double> unit{0.0, 1.0};

  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double gauss() { return normal(gen); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(gen); }
};

// GUE-style draw, Hermitized and rescaled to unit spectral norm. Generic
// position avoids accidental symmetries that could mask identity failures.
inline Matrix random_hermitian(int n, Rng& rng) {
  Matrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = cx{rng.gauss(), rng.gauss()};
  Matrix h = 0.5 * (g + g.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  const double spectral = es.eigenvalues().cwiseAbs().maxCoeff();
  if (spectral > 0) h /= spectral;
  return h;
}

// Wishart construction: full rank almost surely.
inline Matrix random_density(int n, Rng& rng) {
  Matrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = cx{rng.gauss(), rng.gauss()};
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return rho;
}

inline Matrix random_unitary(int n, Rng& rng) {
  const Matrix h = random_hermitian(n, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases(n);
  for (int i = 0; i < n; ++i) phases(i) = std::exp(-iu * es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// Deterministic function of (dims, kind, seed): same inputs, bit-identical model.
inline ModelSpec random_model(const HilbertDims& dims, ModelKind kind, std::uint64_t seed) {
  dims.validate();
  if (dims.system_dim != 2)
    throw std::invalid_argument("random_model: system factor must be a qubit");
  const int ne = dims.env_dim;
  Rng rng(seed);
  ModelSpec m;
  m.dims = dims;
  m.seed = seed;
  if (kind == ModelKind::general) {
    m.qubit_h = random_hermitian(2, rng);
    m.env_h = random_hermitian(ne, rng);
    for (char a : {'x', 'y', 'z'}) m.couplings[a] = random_hermitian(ne, rng);
  } else {
    const double a_z = rng.uniform(0.25, 1.25);
    const double a_1 = rng.uniform(0.25, 1.25);
    const Matrix v_z = random_hermitian(ne, rng);
    const Matrix v_1 = random_hermitian(ne, rng);
    m.qubit_h = Matrix::Zero(2, 2);
    m.env_h = a_1 * v_1;
    m.couplings['z'] = a_z * v_z;
    m.dephasing = DephasingParams{a_z, a_1, v_z, v_1};
  }
  m.env_initial = random_density(ne, rng);
  m.validate();
  return m;
}

// H_C = 0 model (frozen dynamics), maximally mixed environment.
inline ModelSpec zero_model(const HilbertDims& dims) {
  ModelSpec m;
  m.dims = dims;
  m.qubit_h = Matrix::Zero(2, 2);
  m.env_h = Matrix::Zero(dims.env_dim, dims.env_dim);
  m.env_initial = Matrix::Identity(dims.env_dim, dims.env_dim) / double(dims.env_dim);
  m.validate();
  return m;
}

// Scalar-environment dephasing model: H = half_splitting*sigma_z + offset*1.
// With half_splitting = 1/2 the free-induction signal is exactly cos(t).
inline ModelSpec scalar_dephasing_model(double half_splitting, double offset) {
  ModelSpec m;
  m.dims = {2, 1};
  m.qubit_h = Matrix::Zero(2, 2);
  m.env_h = Matrix::Constant(1, 1, offset);
  m.couplings['z'] = Matrix::Constant(1, 1, half_splitting);
  m.dephasing = DephasingParams{half_splitting, offset, Matrix::Identity(1, 1), Matrix::Identity(1, 1)};
  m.env_initial = Matrix::Identity(1, 1);
  m.validate();
  return m;
}

// ---------------------------------------------------------------------------
// Evolution

// Eigendecomposed generator; all generators here are Hermitian and small, so
// exp(-iHt) through the spectral form is exact to rounding.
struct Propagator {
  Matrix vecs;
  Eigen::VectorXd vals;

  static Propagator make(const ModelSpec& m, SegmentKind kind) {
    const Matrix h = m.hamiltonian(kind);
    if (!is_hermitian(h))
      throw std::runtime_error("Propagator: assembled Hamiltonian is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    return {es.eigenvectors(), es.eigenvalues()};
  }

  Matrix unitary(double duration) const {
    if (duration < 0) throw std::invalid_argument("Propagator: negative duration");
    Vector phases(vals.size());
    for (int i = 0; i < vals.size(); ++i) phases(i) = std::exp(-iu * vals(i) * duration);
    Matrix u = vecs * phases.asDiagonal() * vecs.adjoint();
    if (!is_unitary(u))
      throw std::runtime_error("Propagator: evolution operator failed the unitarity check");
    return u;
  }
};

inline Matrix evolution_unitary(const ModelSpec& m, double duration, SegmentKind kind) {
  return Propagator::make(m, kind).unitary(duration);
}

// P_+ (x) rho_E, the canonical input state of the signal protocols.
inline StateOperator plus_state(const ModelSpec& m) {
  return StateOperator::density(m.dims, tensor(projector(Axis::x, +1), m.env_initial));
}

}  // namespace ddmeas
