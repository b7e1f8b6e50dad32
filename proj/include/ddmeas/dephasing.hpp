#pragma once

// Pure-dephasing specialization. Because the coupling commutes with sigma_z,
// every evolution factors into environment-side branch propagators
// U = |up><up| (x) U_up + |down><down| (x) U_down, and a measurement chain
// reduces to environment-side Kraus operators K_{m,p} = (U_up + p m U_down)/2.
// This module implements that reduction, the re-preparation protocol with
// R[rho] = P_+ (x) tr_Q{rho}, the outcome relabeling bijection connecting the
// two protocols, and the correlation form of the last-measurement expectation.

#include "ddmeas/protocols.hpp"

namespace ddmeas {

struct DephasingStep {
  double duration = 0.0;
  Matrix u_up;    // environment-side propagator in the sigma_z = +1 branch
  Matrix u_down;  // and in the sigma_z = -1 branch
};

namespace detail {

inline Matrix hermitian_exp(const Matrix& h, double duration) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases(h.rows());
  for (int i = 0; i < h.rows(); ++i) phases(i) = std::exp(-iu * es.eigenvalues()(i) * duration);
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

// Branch propagators for every segment; env_only segments have equal branches.
// Each step is checked against the full-space evolution on construction.
inline std::vector<DephasingStep> dephasing_steps(const ModelSpec& m, const ProtocolSchedule& s) {
  if (!m.dephasing)
    throw std::invalid_argument("dephasing_steps: model has no dephasing parameters");
  s.validate();
  const auto& dp = *m.dephasing;
  const Matrix h_up = dp.a_1 * dp.v_1 + dp.a_z * dp.v_z;
  const Matrix h_down = dp.a_1 * dp.v_1 - dp.a_z * dp.v_z;
  const Matrix up = (Matrix(2, 2) << 1, 0, 0, 0).finished();
  const Matrix down = (Matrix(2, 2) << 0, 0, 0, 1).finished();

  std::vector<DephasingStep> steps;
  steps.reserve(s.n_steps());
  for (int k = 0; k < s.n_steps(); ++k) {
    const double tau = s.duration(k);
    DephasingStep st;
    st.duration = tau;
    if (s.kinds[k] == SegmentKind::composite) {
      st.u_up = detail::hermitian_exp(h_up, tau);
      st.u_down = detail::hermitian_exp(h_down, tau);
    } else {
      st.u_up = detail::hermitian_exp(m.env_h, tau);
      st.u_down = st.u_up;
    }
    if (!is_unitary(st.u_up) || !is_unitary(st.u_down))
      throw std::runtime_error("dephasing_steps: branch propagator failed the unitarity check");
    const Matrix rebuilt = tensor(up, st.u_up) + tensor(down, st.u_down);
    if ((rebuilt - evolution_unitary(m, tau, s.kinds[k])).norm() > tol::algebraic * m.dims.total())
      throw std::runtime_error("dephasing_steps: branch form does not match the full evolution");
    steps.push_back(std::move(st));
  }
  return steps;
}

// K_{m,p} = (U_up + p*m*U_down)/2: the environment-side effect of evolving a
// qubit prepared in (1 + p sigma_x)/2 and then finding outcome m.
inline Matrix kraus_K(int m_out, int prep, const DephasingStep& step) {
  if ((m_out != +1 && m_out != -1) || (prep != +1 && prep != -1))
    throw std::invalid_argument("kraus_K: outcome and preparation signs must be +1/-1");
  return 0.5 * (step.u_up + double(prep * m_out) * step.u_down);
}

// P(m_n,...,m_1 | p_n,...,p_1) = tr{ K_n ... K_1 rho_B K_1^dag ... K_n^dag }.
inline double conditioned_probability(const Matrix& rho_env0, const std::vector<DephasingStep>& steps,
                                      const std::vector<int>& outcomes,
                                      const std::vector<int>& preparations) {
  if (outcomes.size() != steps.size() || preparations.size() != steps.size())
    throw std::invalid_argument("conditioned_probability: sequence lengths must match the steps");
  Matrix rho = rho_env0;
  for (size_t k = 0; k < steps.size(); ++k) {
    const Matrix kr = kraus_K(outcomes[k], preparations[k], steps[k]);
    rho = kr * rho * kr.adjoint();
  }
  const double p = real_checked(rho.trace(), tol::realness, "conditioned probability");
  if (p < -tol::algebraic || p > 1.0 + tol::algebraic)
    throw std::runtime_error("conditioned_probability: value outside [0, 1]");
  return p;
}

// Full-space probability of an outcome sequence when the qubit is re-prepared
// in (1 + p_k sigma_x)/2 before every evolution step. p_k = m_{k-1} (with
// p_1 = +1) reproduces the plain measurement protocol; all p_k = +1 is the
// re-preparation protocol.
inline double prepared_probability_fullspace(const ModelSpec& m, const ProtocolSchedule& s,
                                             const std::vector<int>& outcomes,
                                             const std::vector<int>& preparations) {
  if (int(outcomes.size()) != s.n_steps() || int(preparations.size()) != s.n_steps())
    throw std::invalid_argument("prepared_probability_fullspace: length mismatch");
  const auto us = segment_unitaries(m, s);
  Matrix rho = tensor(projector(Axis::x, preparations[0]), m.env_initial);
  for (int k = 0; k < s.n_steps(); ++k) {
    if (k > 0) rho = tensor(projector(Axis::x, preparations[k]), partial_trace_sys(rho, m.dims));
    rho = detail::conj_apply(us[k], rho);
    const Matrix p = detail::full_projector(Axis::x, outcomes[k], m.dims);
    rho = p * rho * p;
  }
  return real_checked(rho.trace(), tol::realness, "prepared probability");
}

// All 2^n probabilities of the protocol with re-preparation in |+> after each
// intermediate measurement, computed on the full space with the channel
// R[rho] = P_+ (x) tr_Q{rho} inserted. Works for any model; the relabeling
// equivalences below are only guaranteed for pure dephasing, and the table is
// flagged accordingly.
inline SignalTable repreparation_probabilities(const ModelSpec& m, const StateOperator& rho0,
                                               const ProtocolSchedule& s) {
  if (!(rho0.dims == m.dims))
    throw std::invalid_argument("repreparation_probabilities: dims mismatch");
  const auto us = segment_unitaries(m, s);
  const int n = s.n_steps();
  const Matrix pp = detail::full_projector(Axis::x, +1, m.dims);
  const Matrix pm = detail::full_projector(Axis::x, -1, m.dims);
  const Matrix plus = projector(Axis::x, +1);
  SignalTable table;
  table.provenance = m.is_pure_dephasing() ? "repreparation" : "repreparation no-equivalence-guarantee";
  const std::uint64_t h = s.hash();

  std::vector<int> signs(n);
  auto recurse = [&](auto&& self, const Matrix& rho, int k) -> void {
    if (k == n) {
      table.set({SignalKind::P_R, h, OutcomeSequence::x_signs(signs).str()},
                real_checked(rho.trace(), tol::realness, "re-preparation probability"));
      return;
    }
    const Matrix evolved = detail::conj_apply(us[k], rho);
    for (int sign : {+1, -1}) {
      signs[k] = sign;
      Matrix branch = sign > 0 ? Matrix(pp * evolved * pp) : Matrix(pm * evolved * pm);
      if (k + 1 < n) branch = tensor(plus, partial_trace_sys(branch, m.dims));
      self(self, branch, k + 1);
    }
  };
  recurse(recurse, rho0.rho, 0);
  table.validate_probabilities(SignalKind::P_R, h);
  return table;
}

// Relabeling bijection between the two protocols. The Kraus kernel of step k
// depends only on the sign product m_k * p_k, so the chains match when the
// plain protocol's outcomes mu and the re-preparation outcomes m' satisfy
// m'_k = mu_k * mu_{k-1}: P(mu) = P_R(relabel(mu)). relabel takes plain
// outcomes to re-preparation outcomes via neighbor products (entry k is
// mu_k * mu_{k-1}, with mu_0 = +1); its inverse is the cumulative product.
// Defined on the +1/-1 alphabet only.
inline OutcomeSequence relabel(const OutcomeSequence& plain_outcomes) {
  const auto signs = plain_outcomes.signs();  // rejects non-X alphabets
  std::vector<int> out(signs.size());
  int prev = +1;
  for (size_t k = 0; k < signs.size(); ++k) {
    out[k] = signs[k] * prev;
    prev = signs[k];
  }
  return OutcomeSequence::x_signs(out);
}

// Re-preparation outcomes back to plain-protocol outcomes.
inline OutcomeSequence relabel_inverse(const OutcomeSequence& reprep_outcomes) {
  const auto signs = reprep_outcomes.signs();
  std::vector<int> out(signs.size());
  int acc = +1;
  for (size_t k = 0; k < signs.size(); ++k) {
    acc *= signs[k];
    out[k] = acc;
  }
  return OutcomeSequence::x_signs(out);
}

// Correlation of all results in the re-preparation protocol,
// <prod_k m'_k>_R. For pure dephasing this equals O_n.
inline double correlation_R(const ModelSpec& m, const StateOperator& rho0,
                            const ProtocolSchedule& s) {
  if (!m.dephasing)
    throw std::invalid_argument("correlation_R: requires a pure-dephasing model");
  require_plus_product_state(rho0);
  const SignalTable table = repreparation_probabilities(m, rho0, s);
  const std::uint64_t h = s.hash();
  const int n = s.n_steps();
  double acc = 0.0;
  for (unsigned idx = 0; idx < (1u << n); ++idx) {
    const auto signs = signs_from_index(idx, n);
    int prod = 1;
    for (int v : signs) prod *= v;
    acc += prod * table.real_at({SignalKind::P_R, h, OutcomeSequence::x_signs(signs).str()});
  }
  return acc;
}

}  // namespace ddmeas
