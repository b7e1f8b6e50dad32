#pragma once

// Generalizations beyond the single-qubit X-axis protocols: mixed X/Y pulse
// and measurement slots, local pulses on several qubits, and the qudit shift
// algebra with d-th roots of unity as outcome labels.

#include "ddmeas/protocols.hpp"

#include <numbers>
#include <optional>

namespace ddmeas {

// ---------------------------------------------------------------------------
// Two-axis duality

struct TwoAxisReport {
  IdentityReport meas_in_dd;  // non-selective chain vs averaged pulse patterns
  IdentityReport dd_in_meas;  // pulse sequence vs signed measurement expansion
  bool pass = false;
};

// Per-slot outcome alphabet: {+1,-1} for X, {+i,-i} for Y.
inline std::vector<cx> axis_alphabet(Axis a) {
  if (a == Axis::x) return {cx{1, 0}, cx{-1, 0}};
  if (a == Axis::y) return {cx{0, 1}, cx{0, -1}};
  throw std::invalid_argument("axis_alphabet: measurement axes are x and y");
}

// Runs both expansion directions with each slot using its own axis's pillar
// identity; the final measurement at t_n stays on the X axis.
inline TwoAxisReport two_axis_duality_check(const ModelSpec& m, const ProtocolSchedule& s,
                                            const std::vector<Axis>& axis_pattern) {
  if (int(axis_pattern.size()) != s.n_steps() - 1)
    throw std::invalid_argument("two_axis_duality_check: pattern must have n-1 slots");
  for (Axis a : axis_pattern)
    if (a == Axis::z) throw std::invalid_argument("two_axis_duality_check: axes are x and y");
  const auto us = segment_unitaries(m, s);
  const int n = s.n_steps();
  const int d = m.dims.total();
  const LinearMap proj_final[2] = {projection_map(Axis::x, cx{1, 0}, m.dims),
                                   projection_map(Axis::x, cx{-1, 0}, m.dims)};

  TwoAxisReport report;

  // Direction 1: summed measurement branches vs averaged pulse patterns.
  {
    std::vector<LinearMap> branches{conjugation_map(us[0])};
    std::vector<LinearMap> patterns{conjugation_map(us[0])};
    for (int k = 1; k < n; ++k) {
      const Axis a = axis_pattern[k - 1];
      const LinearMap uk = conjugation_map(us[k]);
      const LinearMap pk = pulse_map(a, m.dims);
      std::vector<LinearMap> nb, np;
      for (const LinearMap& f : branches)
        for (cx outcome : axis_alphabet(a))
          nb.push_back(compose(uk, compose(projection_map(a, outcome, m.dims), f)));
      for (const LinearMap& f : patterns) {
        np.push_back(compose(uk, f));
        np.push_back(compose(uk, compose(pk, f)));
      }
      branches = std::move(nb);
      patterns = std::move(np);
    }
    LinearMap branch_sum = LinearMap::zero(d), pattern_sum = LinearMap::zero(d);
    for (const LinearMap& f : branches) branch_sum.mat += f.mat;
    for (const LinearMap& f : patterns) pattern_sum.mat += f.mat;
    pattern_sum.mat /= double(std::size_t(1) << (n - 1));
    double err = 0.0;
    for (const LinearMap& pf : proj_final)
      err = std::max(err, map_max_abs_diff(compose(pf, branch_sum), compose(pf, pattern_sum)));
    report.meas_in_dd.max_abs_error = err;
    report.meas_in_dd.pass = err <= report.meas_in_dd.threshold;
  }

  // Direction 2: the all-pulse sequence vs its signed measurement expansion,
  // distributing sigma = 2(P_a + P_b) - I slot by slot.
  {
    PulsePattern all_pulses;
    for (Axis a : axis_pattern)
      all_pulses.slots.push_back(a == Axis::x ? PulseOp::x_pulse : PulseOp::y_pulse);
    const LinearMap lhs = dd_map(m, s, all_pulses);

    LinearMap acc = LinearMap::zero(d);
    auto recurse = [&](auto&& self, const LinearMap& map, double coeff, int k) -> void {
      const LinearMap after_u = compose(conjugation_map(us[k]), map);
      if (k == n - 1) {
        acc.mat += coeff * after_u.mat;
        return;
      }
      const Axis a = axis_pattern[k];
      self(self, after_u, -coeff, k + 1);
      for (cx outcome : axis_alphabet(a))
        self(self, compose(projection_map(a, outcome, m.dims), after_u), 2.0 * coeff, k + 1);
    };
    recurse(recurse, LinearMap::identity(d), 1.0, 0);
    report.dd_in_meas.max_abs_error = map_max_abs_diff(lhs, acc);
    report.dd_in_meas.pass = report.dd_in_meas.max_abs_error <= report.dd_in_meas.threshold;
  }

  report.pass = report.meas_in_dd.pass && report.dd_in_meas.pass;
  return report;
}

// ---------------------------------------------------------------------------
// Multi-qubit local-pulse identity

struct MultiQubitRegister {
  int n_qubits = 1;
  int env_dim = 1;

  int system_dim() const { return 1 << n_qubits; }
  int total_dim() const { return system_dim() * env_dim; }

  // 1 (x) ... (x) op_j (x) ... (x) 1 (x) 1_E
  Matrix embed(const Matrix& single, int j) const {
    if (j < 0 || j >= n_qubits) throw std::invalid_argument("MultiQubitRegister: bad qubit index");
    Matrix out = Matrix::Identity(1, 1);
    for (int q = 0; q < n_qubits; ++q)
      out = tensor(out, q == j ? single : Matrix::Identity(2, 2));
    return tensor(out, Matrix::Identity(env_dim, env_dim));
  }

  LinearMap x_pulse_op(int j) const { return conjugation_map(embed(pauli(Axis::x), j)); }

  LinearMap projection_op(int j, int sign) const {
    const Matrix p = embed(projector(Axis::x, sign), j);
    return sandwich_map(p, p);
  }
};

struct MultiQubitReport {
  IdentityReport product_identity;                  // prod_j (I + X_j) = 2^n prod_j (P+_j + P-_j)
  IdentityReport pairwise_commutation;              // ops on distinct qubits commute
  std::optional<IdentityReport> two_qubit_expansion;  // explicit 4-term vs 4-term form
  bool pass = false;
};

inline MultiQubitReport multiqubit_identity_check(const MultiQubitRegister& reg) {
  if (reg.n_qubits < 1 || reg.n_qubits > 4)
    throw std::invalid_argument("multiqubit_identity_check: 1 to 4 qubits supported");
  const int d = reg.total_dim();
  MultiQubitReport report;

  LinearMap lhs = LinearMap::identity(d);
  LinearMap rhs = LinearMap::identity(d);
  for (int j = 0; j < reg.n_qubits; ++j) {
    LinearMap li = LinearMap::identity(d);
    li.mat += reg.x_pulse_op(j).mat;
    lhs = compose(lhs, li);
    LinearMap pi = reg.projection_op(j, +1);
    pi.mat += reg.projection_op(j, -1).mat;
    pi.mat *= 2.0;
    rhs = compose(rhs, pi);
  }
  report.product_identity.max_abs_error = map_max_abs_diff(lhs, rhs);
  report.product_identity.pass =
      report.product_identity.max_abs_error <= report.product_identity.threshold;

  // Commutation of single-qubit operations across distinct qubits.
  double comm = 0.0;
  for (int a = 0; a < reg.n_qubits; ++a)
    for (int b = a + 1; b < reg.n_qubits; ++b) {
      const LinearMap ops_a[3] = {reg.x_pulse_op(a), reg.projection_op(a, +1),
                                  reg.projection_op(a, -1)};
      const LinearMap ops_b[3] = {reg.x_pulse_op(b), reg.projection_op(b, +1),
                                  reg.projection_op(b, -1)};
      for (const auto& oa : ops_a)
        for (const auto& ob : ops_b)
          comm = std::max(comm, map_max_abs_diff(compose(oa, ob), compose(ob, oa)));
    }
  report.pairwise_commutation.max_abs_error = comm;
  report.pairwise_commutation.threshold = tol::algebraic;
  report.pairwise_commutation.pass = comm <= tol::algebraic;

  if (reg.n_qubits == 2) {
    // I + X1 + X2 + X1 o X2 = 4 * sum over signs of P_s1^(1) o P_s2^(2).
    LinearMap left = LinearMap::identity(d);
    left.mat += reg.x_pulse_op(0).mat;
    left.mat += reg.x_pulse_op(1).mat;
    left.mat += compose(reg.x_pulse_op(0), reg.x_pulse_op(1)).mat;
    LinearMap right = LinearMap::zero(d);
    for (int s1 : {+1, -1})
      for (int s2 : {+1, -1})
        right.mat += compose(reg.projection_op(0, s1), reg.projection_op(1, s2)).mat;
    right.mat *= 4.0;
    IdentityReport eq11;
    eq11.max_abs_error = map_max_abs_diff(left, right);
    eq11.pass = eq11.max_abs_error <= eq11.threshold;
    report.two_qubit_expansion = eq11;
  }

  report.pass = report.product_identity.pass && report.pairwise_commutation.pass &&
                (!report.two_qubit_expansion || report.two_qubit_expansion->pass);
  return report;
}

// Single-slot identity interlaced with evolutions on both sides:
// V o prod_j(I + X_j) o U = 2^n V o prod_j(P+_j + P-_j) o U.
inline IdentityReport multiqubit_interlaced_check(const MultiQubitRegister& reg,
                                                  std::uint64_t seed) {
  const int d = reg.total_dim();
  Rng rng(seed);
  const LinearMap u = conjugation_map(random_unitary(d, rng));
  const LinearMap v = conjugation_map(random_unitary(d, rng));
  LinearMap lhs = LinearMap::identity(d);
  LinearMap rhs = LinearMap::identity(d);
  for (int j = 0; j < reg.n_qubits; ++j) {
    LinearMap li = LinearMap::identity(d);
    li.mat += reg.x_pulse_op(j).mat;
    lhs = compose(lhs, li);
    LinearMap pi = reg.projection_op(j, +1);
    pi.mat += reg.projection_op(j, -1).mat;
    pi.mat *= 2.0;
    rhs = compose(rhs, pi);
  }
  IdentityReport r;
  r.max_abs_error =
      map_max_abs_diff(compose(v, compose(lhs, u)), compose(v, compose(rhs, u)));
  r.pass = r.max_abs_error <= r.threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Qudit shift algebra

// Cyclic shift generator g (ones on the superdiagonal and in the bottom-left
// corner), its DFT eigenprojections, and the d-th roots of unity as outcome
// labels m_j = exp(2*pi*i*j/d), ascending in j.
struct QuditShiftAlgebra {
  int d = 2;
  Matrix g;
  std::vector<Matrix> projections;
  std::vector<cx> outcomes;

  static QuditShiftAlgebra make(int d) {
    if (d < 2) throw std::invalid_argument("QuditShiftAlgebra: d must be >= 2");
    QuditShiftAlgebra alg;
    alg.d = d;
    alg.g = Matrix::Zero(d, d);
    for (int i = 0; i + 1 < d; ++i) alg.g(i, i + 1) = 1.0;
    alg.g(d - 1, 0) = 1.0;
    const double step = 2.0 * std::numbers::pi / d;
    for (int j = 0; j < d; ++j) {
      alg.outcomes.push_back(std::exp(iu * (step * j)));
      Vector chi(d);
      for (int a = 0; a < d; ++a) chi(a) = std::exp(iu * (step * j * a)) / std::sqrt(double(d));
      alg.projections.push_back(chi * chi.adjoint());
    }
    alg.validate();
    return alg;
  }

  Matrix shift(int k) const {
    Matrix out = Matrix::Identity(d, d);
    for (int i = 0; i < k; ++i) out = out * g;
    return out;
  }

  // Structural deviations, all of which must stay below the algebraic
  // tolerance: g^d = 1, the spectral decomposition of g, projector algebra,
  // the vanishing root sum, and closure of the outcome set.
  double max_structure_error() const {
    double err = (shift(d) - Matrix::Identity(d, d)).norm();
    Matrix spectral = Matrix::Zero(d, d);
    Matrix completeness = Matrix::Zero(d, d);
    for (int j = 0; j < d; ++j) {
      spectral += outcomes[j] * projections[j];
      completeness += projections[j];
    }
    err = std::max(err, (spectral - g).norm());
    err = std::max(err, (completeness - Matrix::Identity(d, d)).norm());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const Matrix expected = i == j ? projections[i] : Matrix::Zero(d, d);
        err = std::max(err, (projections[i] * projections[j] - expected).norm());
      }
    cx root_sum = 0;
    for (cx m : outcomes) {
      err = std::max(err, std::abs(std::abs(m) - 1.0));
      root_sum += m;
    }
    err = std::max(err, std::abs(root_sum));
    if (!alphabet_closed(outcomes, 10 * tol::algebraic)) err = std::max(err, 1.0);
    return err;
  }

  void validate() const {
    if (max_structure_error() > tol::algebraic * d * d)
      throw std::runtime_error("QuditShiftAlgebra: structural identity violated");
  }
};

struct QuditResidualTerm {
  int i = 0, j = 0;
  cx coefficient;  // 1 + sum_{k=1}^{d-1} (m_i conj(m_j))^k
};

struct QuditExpansion {
  LinearMap lhs;               // I + sum_k S_k, on the system-only space
  LinearMap measurement_part;  // d * sum_i P_i
  std::vector<QuditResidualTerm> residuals;
  double decomposition_error;  // |lhs - (measurement_part + sum c_ij Q_ij)|
};

inline QuditExpansion qudit_expansion(const QuditShiftAlgebra& alg) {
  const int d = alg.d;
  QuditExpansion out;
  out.lhs = LinearMap::identity(d);
  for (int k = 1; k < d; ++k) out.lhs.mat += conjugation_map(alg.shift(k)).mat;
  out.measurement_part = LinearMap::zero(d);
  for (int i = 0; i < d; ++i)
    out.measurement_part.mat += sandwich_map(alg.projections[i], alg.projections[i]).mat;
  out.measurement_part.mat *= double(d);

  LinearMap residual_sum = LinearMap::zero(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      if (i == j) continue;
      // Full-cycle geometric sum of the root m_i * conj(m_j).
      const cx z = alg.outcomes[i] * std::conj(alg.outcomes[j]);
      cx c = 0;
      cx zk = 1;
      for (int k = 0; k < d; ++k) {
        c += zk;
        zk *= z;
      }
      out.residuals.push_back({i, j, c});
      residual_sum.mat += c * sandwich_map(alg.projections[i], alg.projections[j]).mat;
    }
  LinearMap rhs = out.measurement_part;
  rhs.mat += residual_sum.mat;
  out.decomposition_error = map_max_abs_diff(out.lhs, rhs);
  return out;
}

struct QuditPrimeReport {
  double residual_norm = 0.0;  // |(I + sum_k S_k) - d sum_i P_i| on d x env space
  double threshold = tol::chained;
  bool residuals_vanish = false;  // all off-diagonal c_ij below tolerance
  bool pass = false;              // asserted only when the residuals vanish
  double state_check_error = 0.0; // both sides applied to one seeded random state
};

inline QuditPrimeReport qudit_prime_identity_check(const QuditShiftAlgebra& alg, int env_dim,
                                                   std::uint64_t seed) {
  const int d = alg.d;
  const Matrix id_e = Matrix::Identity(env_dim, env_dim);
  const int total = d * env_dim;
  LinearMap lhs = LinearMap::identity(total);
  for (int k = 1; k < d; ++k) lhs.mat += conjugation_map(tensor(alg.shift(k), id_e)).mat;
  LinearMap rhs = LinearMap::zero(total);
  for (int i = 0; i < d; ++i) {
    const Matrix p = tensor(alg.projections[i], id_e);
    rhs.mat += sandwich_map(p, p).mat;
  }
  rhs.mat *= double(d);

  QuditPrimeReport report;
  report.residual_norm = map_max_abs_diff(lhs, rhs);
  const auto expansion = qudit_expansion(alg);
  report.residuals_vanish = true;
  for (const auto& r : expansion.residuals)
    if (std::abs(r.coefficient) > tol::algebraic * d) report.residuals_vanish = false;
  report.pass = report.residuals_vanish && report.residual_norm <= report.threshold;

  Rng rng(seed);
  Matrix rho = tensor(random_density(d, rng), random_density(env_dim, rng));
  report.state_check_error = (ddmeas::apply(lhs, rho) - ddmeas::apply(rhs, rho)).cwiseAbs().maxCoeff();
  return report;
}

// Least-squares residual of the shift operation S_k against the span of
// {I, P_0, ..., P_{d-1}} as maps; a residual well above zero shows a single
// shift is not expressible through measurements and idles alone.
inline double qudit_span_residual(const QuditShiftAlgebra& alg, int k) {
  const int d = alg.d;
  const LinearMap target = conjugation_map(alg.shift(k));
  std::vector<LinearMap> basis{LinearMap::identity(d)};
  for (int i = 0; i < d; ++i)
    basis.push_back(sandwich_map(alg.projections[i], alg.projections[i]));
  const Eigen::Index rows = target.mat.size();
  Matrix a(rows, Eigen::Index(basis.size()));
  for (size_t c = 0; c < basis.size(); ++c)
    a.col(Eigen::Index(c)) = Eigen::Map<const Vector>(basis[c].mat.data(), rows);
  const Vector b = Eigen::Map<const Vector>(target.mat.data(), rows);
  const Vector coeffs = a.colPivHouseholderQr().solve(b);
  return (a * coeffs - b).norm();
}

}  // namespace ddmeas
