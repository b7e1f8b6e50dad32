#pragma once

// The two protocol families and their duality:
//   * coherent sequences  U_n o A_{s_{n-1}} o ... o A_{s_1} o U_1,
//   * measurement chains  P_{m_n} o U_n o ... o P_{m_1} o U_1,
// together with the signals W (coherence after a pulse pattern) and O
// (expectation of the last of n measurements), and verifiers for the
// operator-level and signal-level identities connecting them.

#include "ddmeas/schedule.hpp"
#include "ddmeas/superop.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace ddmeas {

// Per-segment evolution unitaries U_1 ... U_n on the full space.
inline std::vector<Matrix> segment_unitaries(const ModelSpec& m, const ProtocolSchedule& s) {
  s.validate();
  std::map<int, Propagator> generators;  // one eigendecomposition per kind
  std::vector<Matrix> us;
  us.reserve(s.n_steps());
  for (int k = 0; k < s.n_steps(); ++k) {
    const int kind = int(s.kinds[k]);
    auto it = generators.find(kind);
    if (it == generators.end())
      it = generators.emplace(kind, Propagator::make(m, s.kinds[k])).first;
    us.push_back(it->second.unitary(s.duration(k)));
  }
  return us;
}

namespace detail {

// State-level primitives used by the signal routines (d x d arithmetic; the
// d^2 x d^2 map machinery is reserved for operator-level identities).
inline Matrix conj_apply(const Matrix& u, const Matrix& rho) { return u * rho * u.adjoint(); }

inline Matrix full_projector(Axis axis, int sign, const HilbertDims& dims) {
  return tensor(projector(axis, sign), Matrix::Identity(dims.env_dim, dims.env_dim));
}

inline Matrix nonselective_x(const Matrix& rho, const Matrix& p_plus, const Matrix& p_minus) {
  return p_plus * rho * p_plus + p_minus * rho * p_minus;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Protocol maps

inline LinearMap dd_map(const ModelSpec& m, const ProtocolSchedule& s, const PulsePattern& pattern) {
  if (int(pattern.slots.size()) != s.n_steps() - 1)
    throw std::invalid_argument("dd_map: pattern must have n-1 slots");
  const auto us = segment_unitaries(m, s);
  LinearMap acc = conjugation_map(us[0]);
  for (int k = 1; k < s.n_steps(); ++k) {
    switch (pattern.slots[k - 1]) {
      case PulseOp::idle: break;
      case PulseOp::x_pulse: acc = compose(pulse_map(Axis::x, m.dims), acc); break;
      case PulseOp::y_pulse: acc = compose(pulse_map(Axis::y, m.dims), acc); break;
    }
    acc = compose(conjugation_map(us[k]), acc);
  }
  return acc;
}

// CP, trace-decreasing branch map; the trace of its output is the probability
// of the outcome sequence.
inline LinearMap measurement_branch_map(const ModelSpec& m, const ProtocolSchedule& s,
                                        const OutcomeSequence& outcomes) {
  if (int(outcomes.outcomes.size()) != s.n_steps())
    throw std::invalid_argument("measurement_branch_map: one outcome per time step required");
  const auto us = segment_unitaries(m, s);
  LinearMap acc = LinearMap::identity(m.dims.total());
  for (int k = 0; k < s.n_steps(); ++k) {
    acc = compose(conjugation_map(us[k]), acc);
    const cx mk = outcomes.outcomes[k];
    acc = compose(projection_map(axis_of_outcome(mk), mk, m.dims), acc);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Signals

// All 2^n X-basis branch probabilities, by explicit branch enumeration.
inline SignalTable outcome_probabilities(const ModelSpec& m, const StateOperator& rho0,
                                         const ProtocolSchedule& s) {
  if (!(rho0.dims == m.dims)) throw std::invalid_argument("outcome_probabilities: dims mismatch");
  if (rho0.policy != StateOperator::Policy::normalized)
    throw std::invalid_argument("outcome_probabilities: input state must be normalized");
  const auto us = segment_unitaries(m, s);
  const int n = s.n_steps();
  const Matrix pp = detail::full_projector(Axis::x, +1, m.dims);
  const Matrix pm = detail::full_projector(Axis::x, -1, m.dims);
  SignalTable table;
  table.provenance = "outcome_probabilities seed=" + std::to_string(m.seed);
  const std::uint64_t h = s.hash();

  std::vector<int> signs(n);
  auto recurse = [&](auto&& self, const Matrix& rho, int k) -> void {
    if (k == n) {
      table.set({SignalKind::P, h, OutcomeSequence::x_signs(signs).str()},
                real_checked(rho.trace(), tol::realness, "branch probability"));
      return;
    }
    const Matrix evolved = detail::conj_apply(us[k], rho);
    signs[k] = +1;
    self(self, Matrix(pp * evolved * pp), k + 1);
    signs[k] = -1;
    self(self, Matrix(pm * evolved * pm), k + 1);
  };
  recurse(recurse, rho0.rho, 0);
  table.validate_probabilities(SignalKind::P, h);
  return table;
}

// Sum of m_n * P(m_n, ..., m_1) over a probability table.
inline double last_outcome_expectation(const SignalTable& table, const ProtocolSchedule& s,
                                       SignalKind kind = SignalKind::P) {
  const std::uint64_t h = s.hash();
  const int n = s.n_steps();
  double acc = 0.0;
  for (unsigned idx = 0; idx < (1u << n); ++idx) {
    const auto signs = signs_from_index(idx, n);
    acc += signs.back() * table.real_at({kind, h, OutcomeSequence::x_signs(signs).str()});
  }
  return acc;
}

// Expectation of the n-th measurement with the earlier n-1 made non-selective.
// Equals sum_m m_n P(m_n,...,m_1); the two routes are unit-tested against
// each other.
inline double O_signal(const ModelSpec& m, const StateOperator& rho0, const ProtocolSchedule& s) {
  const auto us = segment_unitaries(m, s);
  const Matrix pp = detail::full_projector(Axis::x, +1, m.dims);
  const Matrix pm = detail::full_projector(Axis::x, -1, m.dims);
  const Matrix sx = tensor(pauli(Axis::x), Matrix::Identity(m.dims.env_dim, m.dims.env_dim));
  Matrix rho = rho0.rho;
  for (int k = 0; k < s.n_steps(); ++k) {
    rho = detail::conj_apply(us[k], rho);
    if (k + 1 < s.n_steps()) rho = detail::nonselective_x(rho, pp, pm);
  }
  return real_checked((sx * rho).trace(), tol::realness, "O signal");
}

// sigma_x expectation at t_n after the pulse pattern: the coherence signal.
inline double W_signal(const ModelSpec& m, const StateOperator& rho0, const ProtocolSchedule& s,
                       const PulsePattern& pattern) {
  if (int(pattern.slots.size()) != s.n_steps() - 1)
    throw std::invalid_argument("W_signal: pattern must have n-1 slots");
  const auto us = segment_unitaries(m, s);
  const Matrix id_e = Matrix::Identity(m.dims.env_dim, m.dims.env_dim);
  const Matrix sx = tensor(pauli(Axis::x), id_e);
  Matrix rho = rho0.rho;
  for (int k = 0; k < s.n_steps(); ++k) {
    rho = detail::conj_apply(us[k], rho);
    if (k + 1 < s.n_steps() && pattern.slots[k] != PulseOp::idle) {
      const Axis a = pattern.slots[k] == PulseOp::x_pulse ? Axis::x : Axis::y;
      rho = detail::conj_apply(tensor(pauli(a), id_e), rho);
    }
  }
  return real_checked((sx * rho).trace(), tol::realness, "W signal");
}

// O_{k+1}[t_n + subset]: non-selective measurements only at the given slot
// indices (0-based, < n-1), final expectation at t_n. Evolution segments are
// composed as scheduled, never re-exponentiated across merged intervals.
inline double O_signal_subset(const ModelSpec& m, const StateOperator& rho0,
                              const ProtocolSchedule& s, const std::vector<int>& subset_slots) {
  const auto us = segment_unitaries(m, s);
  const Matrix pp = detail::full_projector(Axis::x, +1, m.dims);
  const Matrix pm = detail::full_projector(Axis::x, -1, m.dims);
  const Matrix sx = tensor(pauli(Axis::x), Matrix::Identity(m.dims.env_dim, m.dims.env_dim));
  auto measured = [&](int slot) {
    return std::find(subset_slots.begin(), subset_slots.end(), slot) != subset_slots.end();
  };
  Matrix rho = rho0.rho;
  for (int k = 0; k < s.n_steps(); ++k) {
    rho = detail::conj_apply(us[k], rho);
    if (k + 1 < s.n_steps() && measured(k)) rho = detail::nonselective_x(rho, pp, pm);
  }
  return real_checked((sx * rho).trace(), tol::realness, "O subset signal");
}

// ---------------------------------------------------------------------------
// Operator-level identities

// Both constructions of the non-selective operation O_n(m_n): the brute-force
// sum over all 2^{n-1} outcome prefixes, and the average over all 2^{n-1}
// idle/x pulse patterns followed by the final projection.
struct NonselectivePair {
  LinearMap summed_branches;  // sum over outcome prefixes
  LinearMap averaged_dd;      // (1/2^{n-1}) P_{m_n} o sum over patterns
};

inline std::map<int, NonselectivePair> nonselective_map(const ModelSpec& m,
                                                        const ProtocolSchedule& s) {
  const auto us = segment_unitaries(m, s);
  const int n = s.n_steps();
  const int d = m.dims.total();
  const LinearMap proj[2] = {projection_map(Axis::x, cx{1, 0}, m.dims),
                             projection_map(Axis::x, cx{-1, 0}, m.dims)};
  const LinearMap xop = pulse_map(Axis::x, m.dims);

  // Measurement side: branch on every intermediate outcome, sharing prefixes.
  std::vector<LinearMap> frontier{compose(conjugation_map(us[0]), LinearMap::identity(d))};
  for (int k = 1; k < n; ++k) {
    std::vector<LinearMap> next;
    next.reserve(frontier.size() * 2);
    const LinearMap uk = conjugation_map(us[k]);
    for (const LinearMap& f : frontier)
      for (const LinearMap& p : proj) next.push_back(compose(uk, compose(p, f)));
    frontier = std::move(next);
  }
  LinearMap branch_sum = LinearMap::zero(d);
  for (const LinearMap& f : frontier) branch_sum.mat += f.mat;

  // Coherent side: every idle/x pattern, sharing prefixes.
  std::vector<LinearMap> patterns{conjugation_map(us[0])};
  for (int k = 1; k < n; ++k) {
    std::vector<LinearMap> next;
    next.reserve(patterns.size() * 2);
    const LinearMap uk = conjugation_map(us[k]);
    for (const LinearMap& f : patterns) {
      next.push_back(compose(uk, f));
      next.push_back(compose(uk, compose(xop, f)));
    }
    patterns = std::move(next);
  }
  LinearMap pattern_sum = LinearMap::zero(d);
  for (const LinearMap& f : patterns) pattern_sum.mat += f.mat;
  pattern_sum.mat /= double(std::size_t(1) << (n - 1));

  std::map<int, NonselectivePair> out;
  for (int i = 0; i < 2; ++i) {
    const int mn = i == 0 ? +1 : -1;
    out.emplace(mn, NonselectivePair{compose(proj[i], branch_sum), compose(proj[i], pattern_sum)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Signed expansion of the all-x pulse sequence into measurement terms.
//
// Generated by distributing X = 2(P_+ + P_-) - I at each pulse slot: each slot
// contributes either -I (no measurement there) or +2 P_{m}, and evolutions
// across unmeasured slots simply compose. Coefficients are therefore
// (-1)^{#unmeasured} 2^{#measured}.

struct ExpansionTerm {
  double coefficient;
  std::vector<int> measured_slots;   // 0-based slot indices; slot k sits at times[k]
  std::vector<double> measured_times;
  std::vector<int> outcomes;         // +1/-1 per measured slot
};

inline std::vector<ExpansionTerm> dd_expansion(const ProtocolSchedule& s) {
  s.validate();
  const int slots = s.n_steps() - 1;
  std::vector<ExpansionTerm> terms;
  ExpansionTerm current{1.0, {}, {}, {}};
  auto recurse = [&](auto&& self, int k) -> void {
    if (k == slots) {
      terms.push_back(current);
      return;
    }
    current.coefficient *= -1.0;  // slot skipped
    self(self, k + 1);
    current.coefficient *= -1.0;
    for (int sign : {+1, -1}) {
      current.coefficient *= 2.0;
      current.measured_slots.push_back(k);
      current.measured_times.push_back(s.times[k]);
      current.outcomes.push_back(sign);
      self(self, k + 1);
      current.coefficient /= 2.0;
      current.measured_slots.pop_back();
      current.measured_times.pop_back();
      current.outcomes.pop_back();
    }
  };
  recurse(recurse, 0);
  // Display order: fewest measurements first, then by slot positions, then
  // with + outcomes before -.
  std::sort(terms.begin(), terms.end(), [](const ExpansionTerm& a, const ExpansionTerm& b) {
    if (a.measured_slots.size() != b.measured_slots.size())
      return a.measured_slots.size() < b.measured_slots.size();
    if (a.measured_slots != b.measured_slots) return a.measured_slots < b.measured_slots;
    return a.outcomes > b.outcomes;  // +1 sorts before -1
  });
  return terms;
}

// Evaluates exactly the given symbolic terms (shared-prefix recursion keyed by
// the term descriptors); throws if the term list does not tile the expansion.
inline LinearMap evaluate_dd_expansion(const ModelSpec& m, const ProtocolSchedule& s,
                                       const std::vector<ExpansionTerm>& terms) {
  const auto us = segment_unitaries(m, s);
  const int slots = s.n_steps() - 1;
  const int d = m.dims.total();

  std::map<std::pair<std::vector<int>, std::vector<int>>, double> coeff_of;
  for (const auto& t : terms) {
    auto key = std::make_pair(t.measured_slots, t.outcomes);
    if (coeff_of.count(key)) throw std::invalid_argument("evaluate_dd_expansion: duplicate term");
    coeff_of[key] = t.coefficient;
  }
  if (coeff_of.size() != terms.size() || terms.empty())
    throw std::invalid_argument("evaluate_dd_expansion: malformed term list");

  const LinearMap proj[2] = {projection_map(Axis::x, cx{1, 0}, m.dims),
                             projection_map(Axis::x, cx{-1, 0}, m.dims)};
  LinearMap acc = LinearMap::zero(d);
  std::size_t leaves = 0;
  std::vector<int> mslots, mouts;
  auto recurse = [&](auto&& self, const LinearMap& map, int k) -> void {
    const LinearMap after_u = compose(conjugation_map(us[k]), map);
    if (k == slots) {
      auto it = coeff_of.find(std::make_pair(mslots, mouts));
      if (it == coeff_of.end())
        throw std::invalid_argument("evaluate_dd_expansion: missing term in the list");
      acc.mat += it->second * after_u.mat;
      ++leaves;
      return;
    }
    self(self, after_u, k + 1);  // slot k skipped
    for (int i = 0; i < 2; ++i) {
      mslots.push_back(k);
      mouts.push_back(i == 0 ? +1 : -1);
      self(self, compose(proj[i], after_u), k + 1);
      mslots.pop_back();
      mouts.pop_back();
    }
  };
  recurse(recurse, LinearMap::identity(d), 0);
  if (leaves != terms.size())
    throw std::invalid_argument("evaluate_dd_expansion: term count mismatch");
  return acc;
}

// ---------------------------------------------------------------------------
// Signal-level identity reports

struct IdentityReport {
  double max_abs_error = 0.0;
  double threshold = tol::chained;
  bool pass = false;
};

inline void require_plus_product_state(const StateOperator& rho0) {
  // For a product P_+ (x) rho_E the state equals P_+ tensored with its own
  // environment marginal.
  const Matrix qubit_marginal = partial_trace_env(rho0.rho, rho0.dims);
  const Matrix env_marginal = partial_trace_sys(rho0.rho, rho0.dims);
  const Matrix expected = tensor(projector(Axis::x, +1), env_marginal);
  if ((qubit_marginal - projector(Axis::x, +1)).norm() > tol::algebraic ||
      (rho0.rho - expected).norm() > tol::algebraic)
    throw std::invalid_argument("input state must be P_+ (x) rho_E");
}

// O_n = 2^{-(n-1)} sum over patterns of W, with O_n from the enumerated
// probability table (the two sides share no code path).
inline IdentityReport verify_on_in_wn(const ModelSpec& m, const StateOperator& rho0,
                                      const ProtocolSchedule& s) {
  require_plus_product_state(rho0);
  const SignalTable table = outcome_probabilities(m, rho0, s);
  const double o = last_outcome_expectation(table, s);
  double mean = 0.0;
  const auto patterns = all_xi_patterns(s.n_steps() - 1);
  for (const auto& p : patterns) mean += W_signal(m, rho0, s, p);
  mean /= double(patterns.size());
  IdentityReport r;
  r.max_abs_error = std::abs(o - mean);
  r.pass = r.max_abs_error <= r.threshold;
  return r;
}

// W_{x,...,x} = sum over subsets S of {t_1..t_{n-1}} of
// (-1)^{n-1-|S|} 2^{|S|} O_{|S|+1}[t_n + S].
inline IdentityReport verify_wn_in_ok(const ModelSpec& m, const StateOperator& rho0,
                                      const ProtocolSchedule& s) {
  require_plus_product_state(rho0);
  const int n = s.n_steps();
  const double w = W_signal(m, rho0, s, PulsePattern::all_x(n - 1));
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
    std::vector<int> subset;
    for (int k = 0; k < n - 1; ++k)
      if ((mask >> k) & 1u) subset.push_back(k);
    const int size = int(subset.size());
    const double sign = (n - 1 - size) % 2 == 0 ? 1.0 : -1.0;
    sum += sign * double(std::size_t(1) << size) * O_signal_subset(m, rho0, s, subset);
  }
  IdentityReport r;
  r.max_abs_error = std::abs(w - sum);
  r.pass = r.max_abs_error <= r.threshold;
  return r;
}

}  // namespace ddmeas
