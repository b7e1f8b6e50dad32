#pragma once

// The verification suite: every identity the library implements, run over a
// documented parameter sweep with deterministic per-cell seeds, producing a
// canonical list of check records. Records are sorted by check id, so the
// output is independent of evaluation order.

#include "ddmeas/dephasing.hpp"
#include "ddmeas/extensions.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

namespace ddmeas {

struct CheckRecord {
  std::string check_id;
  std::string equation;  // identity label, e.g. "X = 2(P+ + P-) - I"
  std::string params;
  double max_abs_error = 0.0;
  double threshold = 0.0;
  bool expect_exceeds = false;  // negative controls must break the bound
  bool pass = false;
};

inline CheckRecord make_check(std::string id, std::string equation, std::string params,
                              double err, double threshold, bool expect_exceeds = false) {
  CheckRecord r{std::move(id), std::move(equation), std::move(params),
                err, threshold, expect_exceeds, false};
  r.pass = expect_exceeds ? err > threshold : err <= threshold;
  return r;
}

struct VerificationReport {
  std::string scope;
  std::uint64_t seed = 0;
  std::vector<CheckRecord> checks;
  double wall_time_s = 0.0;
  std::string generated_at;

  int num_passed() const {
    int n = 0;
    for (const auto& c : checks) n += c.pass;
    return n;
  }
  int num_failed() const { return int(checks.size()) - num_passed(); }
  bool all_ok() const { return num_failed() == 0; }
};

// ---------------------------------------------------------------------------
// Sweep plumbing

namespace detail {

// splitmix64 of (base, salt): independent per-cell streams from one seed.
inline std::uint64_t cell_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline ProtocolSchedule sweep_schedule(int n, bool alternating, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> times;
  double t = 0.0;
  for (int k = 0; k < n; ++k) {
    t += rng.uniform(0.3, 0.9);
    times.push_back(t);
  }
  std::vector<SegmentKind> kinds(n, SegmentKind::composite);
  if (alternating)
    for (int k = 1; k < n; k += 2) kinds[k] = SegmentKind::env_only;
  ProtocolSchedule s{std::move(times), std::move(kinds)};
  s.validate();
  return s;
}

inline const char* seg_name(bool alternating) { return alternating ? "alternating" : "all-composite"; }

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Check groups

// X and Y pillar identities and their converses, plus the m-weighted sum rule,
// for total dimensions 2, 4, 8 and 16.
inline void check_pillars(std::vector<CheckRecord>& out) {
  for (int env : {1, 2, 4, 8}) {
    const HilbertDims dims{2, env};
    const int d = dims.total();
    const std::string dim_tag = "dim=" + std::to_string(d);
    const LinearMap id = LinearMap::identity(d);

    const LinearMap px[2] = {projection_map(Axis::x, cx{1, 0}, dims),
                             projection_map(Axis::x, cx{-1, 0}, dims)};
    const LinearMap xop = pulse_map(Axis::x, dims);
    const LinearMap dx = anticommutator_map(Axis::x, dims);
    out.push_back(make_check(
        "pillar/x/" + dim_tag, "X = 2(P+ + P-) - I", dim_tag,
        map_max_abs_diff(lincomb({{2.0, px[0]}, {2.0, px[1]}, {-1.0, id}}), xop),
        tol::algebraic));
    for (int i = 0; i < 2; ++i) {
      const double m = i == 0 ? 1.0 : -1.0;
      out.push_back(make_check(
          "pillar/x-converse/" + dim_tag + "/m=" + (i == 0 ? "+1" : "-1"),
          "P_m = (I + X + m D_X)/4", dim_tag,
          map_max_abs_diff(lincomb({{0.25, id}, {0.25, xop}, {0.25 * m, dx}}), px[i]),
          tol::algebraic));
    }

    const LinearMap py[2] = {projection_map(Axis::y, cx{0, 1}, dims),
                             projection_map(Axis::y, cx{0, -1}, dims)};
    const LinearMap yop = pulse_map(Axis::y, dims);
    const LinearMap dy = anticommutator_map(Axis::y, dims);
    out.push_back(make_check(
        "pillar/y/" + dim_tag, "Y = 2(P+Y + P-Y) - I", dim_tag,
        map_max_abs_diff(lincomb({{2.0, py[0]}, {2.0, py[1]}, {-1.0, id}}), yop),
        tol::algebraic));
    for (int i = 0; i < 2; ++i) {
      const cx my = i == 0 ? cx{0, 1} : cx{0, -1};
      out.push_back(make_check(
          "pillar/y-converse/" + dim_tag + "/m=" + (i == 0 ? "+i" : "-i"),
          "P_mY = (I + Y - i mY D_Y)/4", dim_tag,
          map_max_abs_diff(lincomb({{0.25, id}, {0.25, yop}, {-0.25 * iu * my, dy}}), py[i]),
          tol::algebraic));
    }

    // sum_m m C = 0 for outcome-independent C, both branches built explicitly.
    Rng rng(0xddu + env);
    const LinearMap c = conjugation_map(random_unitary(d, rng));
    out.push_back(make_check("pillar/outcome-sum/axis=x/" + dim_tag, "sum_m m C = 0", dim_tag,
                             lincomb({{cx{1, 0}, c}, {cx{-1, 0}, c}}).mat.cwiseAbs().maxCoeff(),
                             tol::algebraic));
    out.push_back(make_check("pillar/outcome-sum/axis=y/" + dim_tag, "sum_m m C = 0", dim_tag,
                             lincomb({{cx{0, 1}, c}, {cx{0, -1}, c}}).mat.cwiseAbs().maxCoeff(),
                             tol::algebraic));
  }
}

// Non-selective measurement operation vs averaged pulse sequences, brute
// force over both enumerations, general models, both final outcomes.
inline void check_eq3(std::vector<CheckRecord>& out, std::uint64_t seed) {
  std::uint64_t salt = 1000;
  for (int n : {1, 2, 3, 4})
    for (int env : {1, 2, 4, 8})
      for (int si : {0, 1, 2}) {
        for (bool alternating : {false, true}) {
          ++salt;
          // n = 1 has no intermediate slots on either side; keep two samples.
          if (n == 1 && (si > 0 || alternating || env > 2)) continue;
          const auto model =
              random_model({2, env}, ModelKind::general, detail::cell_seed(seed, salt));
          const auto sched = detail::sweep_schedule(n, alternating, detail::cell_seed(seed, salt + 7777));
          const auto pairs = nonselective_map(model, sched);
          for (const auto& [mn, pair] : pairs) {
            const std::string id = "eq3/n=" + std::to_string(n) + "/env=" + std::to_string(env) +
                                   "/seed=" + std::to_string(si) + "/segs=" +
                                   detail::seg_name(alternating) + "/m=" + (mn > 0 ? "+1" : "-1");
            out.push_back(make_check(
                id, "O_n(m_n) = 2^{1-n} P_{m_n} o sum_s U^A_s",
                "n=" + std::to_string(n) + " env=" + std::to_string(env) + " m_n=" + std::to_string(mn),
                map_max_abs_diff(pair.summed_branches, pair.averaged_dd), tol::chained));
          }
        }
      }
}

// The all-x pulse sequence vs its signed measurement expansion, plus the
// symbolic structure of the expansion itself.
inline void check_eq4(std::vector<CheckRecord>& out, std::uint64_t seed) {
  std::uint64_t salt = 2000;
  for (int n : {2, 3, 4})
    for (int env : {1, 2, 4, 8})
      for (int si : {0, 1, 2})
        for (bool alternating : {false, true}) {
          ++salt;
          const auto model =
              random_model({2, env}, ModelKind::general, detail::cell_seed(seed, salt));
          const auto sched = detail::sweep_schedule(n, alternating, detail::cell_seed(seed, salt + 7777));
          const auto terms = dd_expansion(sched);
          const LinearMap lhs = dd_map(model, sched, PulsePattern::all_x(n - 1));
          const LinearMap rhs = evaluate_dd_expansion(model, sched, terms);
          out.push_back(make_check(
              "eq4/n=" + std::to_string(n) + "/env=" + std::to_string(env) + "/seed=" +
                  std::to_string(si) + "/segs=" + detail::seg_name(alternating),
              "U^A_{x..x} = signed sum of measurement terms",
              "n=" + std::to_string(n) + " env=" + std::to_string(env),
              map_max_abs_diff(lhs, rhs), tol::chained));
        }

  // Term multisets of the two worked displays: spin echo and the two-pulse
  // sequence.
  using Term = std::tuple<double, std::vector<int>, std::vector<int>>;
  auto multiset_of = [](const std::vector<ExpansionTerm>& terms) {
    std::multiset<Term> s;
    for (const auto& t : terms) s.insert({t.coefficient, t.measured_slots, t.outcomes});
    return s;
  };
  {
    const auto sched = uniform_schedule({1.0, 2.0}, SegmentKind::composite);
    const std::multiset<Term> expected = {{-1.0, {}, {}}, {2.0, {0}, {+1}}, {2.0, {0}, {-1}}};
    out.push_back(make_check("eq4/structure/n=2", "spin-echo expansion term multiset", "n=2",
                             multiset_of(dd_expansion(sched)) == expected ? 0.0 : 1.0, 0.5));
  }
  {
    const auto sched = uniform_schedule({1.0, 2.0, 3.0}, SegmentKind::composite);
    const std::multiset<Term> expected = {
        {1.0, {}, {}},
        {-2.0, {0}, {+1}}, {-2.0, {0}, {-1}}, {-2.0, {1}, {+1}}, {-2.0, {1}, {-1}},
        {4.0, {0, 1}, {+1, +1}}, {4.0, {0, 1}, {+1, -1}},
        {4.0, {0, 1}, {-1, +1}}, {4.0, {0, 1}, {-1, -1}}};
    out.push_back(make_check("eq4/structure/n=3", "two-pulse expansion term multiset", "n=3",
                             multiset_of(dd_expansion(sched)) == expected ? 0.0 : 1.0, 0.5));
  }
  // Bookkeeping: sum_k C(n-1,k) 2^k terms, and the coefficients weighted by
  // 2^{-#measured} summing to +1 (both sides traced against H = 0 and the
  // maximally mixed state).
  for (int n = 2; n <= 6; ++n) {
    std::vector<double> times;
    for (int k = 1; k <= n; ++k) times.push_back(double(k));
    const auto terms = dd_expansion(uniform_schedule(times, SegmentKind::composite));
    double expected_count = 0.0;
    for (int k = 0; k <= n - 1; ++k)
      expected_count += detail::binomial(n - 1, k) * double(std::size_t(1) << k);
    double weighted = 0.0;
    for (const auto& t : terms)
      weighted += t.coefficient / double(std::size_t(1) << t.measured_slots.size());
    const double err = std::max(std::abs(double(terms.size()) - expected_count),
                                std::abs(weighted - 1.0));
    out.push_back(make_check("eq4/structure/count/n=" + std::to_string(n),
                             "term count and weighted coefficient sum", "n=" + std::to_string(n),
                             err, tol::algebraic));
  }
}

// O_n as the average of W over all pulse patterns.
inline void check_eq5(std::vector<CheckRecord>& out, std::uint64_t seed) {
  std::uint64_t salt = 3000;
  for (int n : {2, 3, 4})
    for (int env : {1, 2, 4, 8})
      for (int si : {0, 1, 2})
        for (bool alternating : {false, true}) {
          ++salt;
          const auto model =
              random_model({2, env}, ModelKind::general, detail::cell_seed(seed, salt));
          const auto sched = detail::sweep_schedule(n, alternating, detail::cell_seed(seed, salt + 7777));
          const auto report = verify_on_in_wn(model, plus_state(model), sched);
          out.push_back(make_check(
              "eq5/n=" + std::to_string(n) + "/env=" + std::to_string(env) + "/seed=" +
                  std::to_string(si) + "/segs=" + detail::seg_name(alternating),
              "O_n = 2^{1-n} sum_s W_s", "n=" + std::to_string(n) + " env=" + std::to_string(env),
              report.max_abs_error, report.threshold));
        }
}

// W of the all-x sequence as the signed sum of subset O signals.
inline void check_eq6(std::vector<CheckRecord>& out, std::uint64_t seed) {
  std::uint64_t salt = 4000;
  for (int n : {2, 3, 4})
    for (int env : {1, 2, 4, 8})
      for (int si : {0, 1, 2})
        for (bool alternating : {false, true}) {
          ++salt;
          const auto model =
              random_model({2, env}, ModelKind::general, detail::cell_seed(seed, salt));
          const auto sched = detail::sweep_schedule(n, alternating, detail::cell_seed(seed, salt + 7777));
          const auto report = verify_wn_in_ok(model, plus_state(model), sched);
          out.push_back(make_check(
              "eq6/n=" + std::to_string(n) + "/env=" + std::to_string(env) + "/seed=" +
                  std::to_string(si) + "/segs=" + detail::seg_name(alternating),
              "W_{x..x} = sum_S (-1)^{n-1-|S|} 2^{|S|} O[t_n + S]",
              "n=" + std::to_string(n) + " env=" + std::to_string(env),
              report.max_abs_error, report.threshold));
        }
}

// The four worked signal identities and the closed-form scalar oracle.
inline void check_worked(std::vector<CheckRecord>& out, std::uint64_t seed) {
  std::uint64_t salt = 5000;
  for (int env : {1, 2, 4})
    for (int si : {0, 1, 2}) {
      ++salt;
      const auto model = random_model({2, env}, ModelKind::general, detail::cell_seed(seed, salt));
      const auto rho0 = plus_state(model);
      const std::string tag = "/env=" + std::to_string(env) + "/seed=" + std::to_string(si);
      {
        const auto sched = detail::sweep_schedule(2, false, detail::cell_seed(seed, salt + 7777));
        const double w_x = W_signal(model, rho0, sched, PulsePattern::parse("x"));
        const double w_i = W_signal(model, rho0, sched, PulsePattern::parse("i"));
        const double o2 = last_outcome_expectation(outcome_probabilities(model, rho0, sched), sched);
        const double o1 = O_signal_subset(model, rho0, sched, {});
        out.push_back(make_check("worked/eq7" + tag, "W_x(t2,t1) = 2 O_2(t2,t1) - O_1(t2)", tag,
                                 std::abs(w_x - (2.0 * o2 - o1)), tol::chained));
        out.push_back(make_check("worked/eq8" + tag, "O_2 = (W_i + W_x)/2", tag,
                                 std::abs(o2 - 0.5 * (w_i + w_x)), tol::chained));
      }
      {
        const auto sched = detail::sweep_schedule(3, false, detail::cell_seed(seed, salt + 8888));
        const double o3 = last_outcome_expectation(outcome_probabilities(model, rho0, sched), sched);
        double mean = 0.0;
        for (const char* p : {"ii", "xi", "ix", "xx"})
          mean += W_signal(model, rho0, sched, PulsePattern::parse(p));
        mean /= 4.0;
        out.push_back(make_check("worked/three-measurement" + tag, "O_3 = mean of four W signals",
                                 tag, std::abs(o3 - mean), tol::chained));
      }
      {
        const double tau = 0.3 + 0.4 * si;
        const auto sched = uniform_schedule({tau, 3 * tau, 4 * tau}, SegmentKind::composite);
        const double w = W_signal(model, rho0, sched, PulsePattern::parse("xx"));
        const double rhs = O_signal_subset(model, rho0, sched, {}) -
                           2.0 * (O_signal_subset(model, rho0, sched, {0}) +
                                  O_signal_subset(model, rho0, sched, {1})) +
                           4.0 * O_signal_subset(model, rho0, sched, {0, 1});
        out.push_back(make_check("worked/cp2" + tag,
                                 "W_CP2(4t) = O_1 - 2[O_2(t) + O_2(3t)] + 4 O_3", tag,
                                 std::abs(w - rhs), tol::chained));
      }
    }

  // Scalar-environment oracle: half splitting 1/2, arbitrary offset.
  const auto model = scalar_dephasing_model(0.5, 0.37);
  const auto rho0 = plus_state(model);
  double err_fid = 0.0, err_echo = 0.0, err_o2 = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double t = 0.05 + 0.07 * k;
    const auto s1 = uniform_schedule({t}, SegmentKind::composite);
    err_fid = std::max(err_fid,
                       std::abs(W_signal(model, rho0, s1, PulsePattern::all_idle(0)) - std::cos(t)));
    const auto s2 = uniform_schedule({t, 2 * t}, SegmentKind::composite);
    err_echo = std::max(err_echo,
                        std::abs(W_signal(model, rho0, s2, PulsePattern::parse("x")) - 1.0));
  }
  for (int a = 0; a < 10; ++a)
    for (int b = 1; b <= 10; ++b) {
      const double t1 = 0.1 + 0.31 * a, t2 = t1 + 0.23 * b;
      const auto sched = uniform_schedule({t1, t2}, SegmentKind::composite);
      const double o2 = last_outcome_expectation(outcome_probabilities(model, rho0, sched), sched);
      err_o2 = std::max(err_o2, std::abs(o2 - 0.5 * (std::cos(t2) + std::cos(t2 - 2 * t1))));
    }
  out.push_back(make_check("worked/analytic/free-induction", "W_idle(t) = cos t",
                           "100-point grid", err_fid, tol::chained));
  out.push_back(make_check("worked/analytic/echo", "W_x(2t1) = 1", "100-point grid", err_echo,
                           tol::chained));
  out.push_back(make_check("worked/analytic/O2", "O_2 = [cos t2 + cos(t2 - 2 t1)]/2",
                           "10x10 grid", err_o2, tol::chained));
}

// Pure-dephasing reductions: Kraus probabilities, the sign collapse, the
// relabeling bijection, the correlation equivalence, and the negative control
// showing the relabeling breaks for transverse coupling.
inline void check_dephasing(std::vector<CheckRecord>& out, std::uint64_t seed) {
  std::uint64_t salt = 6000;
  for (int n : {2, 3, 4})
    for (int env : {1, 2, 4, 8})
      for (int si : {0, 1, 2})
        for (bool alternating : {false, true}) {
          ++salt;
          const auto model =
              random_model({2, env}, ModelKind::pure_dephasing, detail::cell_seed(seed, salt));
          const auto sched = detail::sweep_schedule(n, alternating, detail::cell_seed(seed, salt + 7777));
          const auto rho0 = plus_state(model);
          const auto steps = dephasing_steps(model, sched);
          const std::string tag = "/n=" + std::to_string(n) + "/env=" + std::to_string(env) +
                                  "/seed=" + std::to_string(si) + "/segs=" +
                                  detail::seg_name(alternating);
          const std::string params = "n=" + std::to_string(n) + " env=" + std::to_string(env);

          // (a) environment-side Kraus vs full space, every outcome and
          // preparation assignment.
          double err_prep = 0.0;
          for (unsigned om = 0; om < (1u << n); ++om)
            for (unsigned pm = 0; pm < (1u << n); ++pm) {
              const auto outs = signs_from_index(om, n);
              const auto preps = signs_from_index(pm, n);
              err_prep = std::max(
                  err_prep, std::abs(prepared_probability_fullspace(model, sched, outs, preps) -
                                     conditioned_probability(model.env_initial, steps, outs, preps)));
            }
          out.push_back(make_check("dephasing/kraus-vs-full" + tag,
                                   "P(m|p) = tr prod K_{m,p} rho_B", params, err_prep,
                                   tol::chained));

          // No-re-preparation convention reproduces the plain protocol.
          const auto table = outcome_probabilities(model, rho0, sched);
          double err_conv = 0.0;
          for (unsigned om = 0; om < (1u << n); ++om) {
            const auto outs = signs_from_index(om, n);
            std::vector<int> preps(n, +1);
            for (int k = 1; k < n; ++k) preps[k] = outs[k - 1];
            err_conv = std::max(
                err_conv,
                std::abs(table.real_at({SignalKind::P, sched.hash(),
                                        OutcomeSequence::x_signs(outs).str()}) -
                         conditioned_probability(model.env_initial, steps, outs, preps)));
          }
          out.push_back(make_check("dephasing/no-reprep-convention" + tag,
                                   "p_k = m_{k-1} reproduces the plain protocol", params,
                                   err_conv, tol::chained));

          // (b) K depends on m*p only.
          double err_k = 0.0;
          for (const auto& st : steps)
            for (int m_out : {+1, -1})
              for (int p : {+1, -1})
                err_k = std::max(err_k,
                                 (kraus_K(m_out, p, st) - kraus_K(m_out * p, +1, st)).norm());
          out.push_back(make_check("dephasing/kraus-sign-collapse" + tag, "K_{m,p} = K_{mp,+}",
                                   params, err_k, tol::algebraic));

          // (c) relabeling bijection between the two protocols' tables,
          // checked in both directions.
          const auto table_r = repreparation_probabilities(model, rho0, sched);
          double err_rel = 0.0;
          for (unsigned om = 0; om < (1u << n); ++om) {
            const auto plain = OutcomeSequence::x_signs(signs_from_index(om, n));
            const auto reprep = relabel(plain);
            err_rel = std::max(
                err_rel,
                std::abs(table.real_at({SignalKind::P, sched.hash(), plain.str()}) -
                         table_r.real_at({SignalKind::P_R, sched.hash(), reprep.str()})));
            err_rel = std::max(
                err_rel,
                std::abs(table_r.real_at({SignalKind::P_R, sched.hash(), plain.str()}) -
                         table.real_at({SignalKind::P, sched.hash(),
                                        relabel_inverse(plain).str()})));
          }
          out.push_back(make_check("dephasing/relabel-bijection" + tag,
                                   "P_R(m') = P(relabel(m'))", params, err_rel, tol::algebraic));

          // Full-space re-preparation channel vs environment-side Kraus chain.
          double err_routes = 0.0;
          for (unsigned om = 0; om < (1u << n); ++om) {
            const auto outs = signs_from_index(om, n);
            err_routes = std::max(
                err_routes,
                std::abs(table_r.real_at({SignalKind::P_R, sched.hash(),
                                          OutcomeSequence::x_signs(outs).str()}) -
                         conditioned_probability(model.env_initial, steps, outs,
                                                 std::vector<int>(n, +1))));
          }
          out.push_back(make_check("dephasing/reprep-two-routes" + tag,
                                   "full-space R channel = env-side Kraus chain", params,
                                   err_routes, tol::chained));

          // (d) correlation of all re-preparation results equals O_n.
          const double corr = correlation_R(model, rho0, sched);
          const double o_n = last_outcome_expectation(table, sched);
          out.push_back(make_check("dephasing/correlation" + tag, "<prod m'_k>_R = O_n", params,
                                   std::abs(corr - o_n), tol::chained));

          // The signal identities survive the correlation substitution.
          if (n == 2) {
            const double w_i = W_signal(model, rho0, sched, PulsePattern::parse("i"));
            const double w_x = W_signal(model, rho0, sched, PulsePattern::parse("x"));
            out.push_back(make_check("dephasing/correlation-eq8" + tag,
                                     "<m'_1 m'_2>_R = (W_i + W_x)/2", params,
                                     std::abs(corr - 0.5 * (w_i + w_x)), tol::chained));
          }
        }

  // Negative control: with a transverse coupling the relabeling equality must
  // break by a visible margin for at least one seeded instance.
  double worst = 0.0;
  for (int si : {0, 1, 2})
    for (int env : {2, 4}) {
      const auto model =
          random_model({2, env}, ModelKind::general, detail::cell_seed(seed, 6900 + si * 10 + env));
      const auto sched = detail::sweep_schedule(2, false, detail::cell_seed(seed, 6950 + si * 10 + env));
      const auto rho0 = plus_state(model);
      const auto table = outcome_probabilities(model, rho0, sched);
      const auto table_r = repreparation_probabilities(model, rho0, sched);
      for (unsigned om = 0; om < 4u; ++om) {
        const auto plain = OutcomeSequence::x_signs(signs_from_index(om, 2));
        worst = std::max(
            worst, std::abs(table.real_at({SignalKind::P, sched.hash(), plain.str()}) -
                            table_r.real_at({SignalKind::P_R, sched.hash(), relabel(plain).str()})));
      }
    }
  out.push_back(make_check("dephasing/negative-control", "relabeling must fail for V_x != 0",
                           "n=2, general models", worst, tol::control_break,
                           /*expect_exceeds=*/true));
}

inline void check_multiqubit(std::vector<CheckRecord>& out, std::uint64_t seed) {
  for (int nq : {1, 2, 3})
    for (int env : {1, 2}) {
      const MultiQubitRegister reg{nq, env};
      const auto report = multiqubit_identity_check(reg);
      const std::string tag = "/nq=" + std::to_string(nq) + "/env=" + std::to_string(env);
      const std::string params = "n_qubits=" + std::to_string(nq) + " env=" + std::to_string(env);
      out.push_back(make_check("multiqubit/product-identity" + tag,
                               "prod_j (I + X_j) = 2^n prod_j (P+_j + P-_j)", params,
                               report.product_identity.max_abs_error, tol::chained));
      out.push_back(make_check("multiqubit/commutation" + tag,
                               "operations on distinct qubits commute", params,
                               report.pairwise_commutation.max_abs_error, tol::algebraic));
      if (report.two_qubit_expansion)
        out.push_back(make_check("multiqubit/two-qubit-expansion" + tag,
                                 "I + X1 + X2 + X1X2 = 4 sum P_s1 P_s2", params,
                                 report.two_qubit_expansion->max_abs_error, tol::chained));
    }
  for (int env : {1, 2})
    for (int si : {0, 1, 2}) {
      const auto report =
          multiqubit_interlaced_check({2, env}, detail::cell_seed(seed, 7000 + env * 10 + si));
      out.push_back(make_check("multiqubit/interlaced/env=" + std::to_string(env) + "/seed=" +
                                   std::to_string(si),
                               "single-slot identity interlaced with evolutions",
                               "n_qubits=2 env=" + std::to_string(env),
                               report.max_abs_error, tol::chained));
    }
}

inline void check_qudit(std::vector<CheckRecord>& out, std::uint64_t seed) {
  for (int d = 2; d <= 8; ++d) {
    const auto alg = QuditShiftAlgebra::make(d);
    const std::string tag = "/d=" + std::to_string(d);
    out.push_back(make_check("qudit/structure" + tag,
                             "g^d = 1, spectral decomposition, projector algebra, root sums",
                             "d=" + std::to_string(d), alg.max_structure_error(),
                             tol::algebraic * d * d));
    const auto expansion = qudit_expansion(alg);
    out.push_back(make_check("qudit/shift-decomposition" + tag,
                             "I + sum S_k = d sum P_i + sum c_ij Q_ij",
                             "d=" + std::to_string(d), expansion.decomposition_error,
                             tol::algebraic));
    double max_c = 0.0;
    for (const auto& r : expansion.residuals) max_c = std::max(max_c, std::abs(r.coefficient));
    // Residual coefficients are full-cycle root-of-unity sums; measured, then
    // cross-checked against the assembled residual map.
    LinearMap residual_map = LinearMap::zero(d);
    for (const auto& r : expansion.residuals)
      residual_map.mat +=
          r.coefficient * sandwich_map(alg.projections[r.i], alg.projections[r.j]).mat;
    LinearMap diff = expansion.lhs;
    diff.mat -= expansion.measurement_part.mat;
    out.push_back(make_check("qudit/residual-consistency" + tag,
                             "(I + sum S_k) - d sum P_i equals the residual map",
                             "d=" + std::to_string(d) + " max|c_ij|=" + detail::fmt_double(max_c),
                             map_max_abs_diff(diff, residual_map), tol::algebraic));
  }
  for (int d : {2, 3, 4, 5, 6, 7, 8})
    for (int env : {1, 2}) {
      const auto alg = QuditShiftAlgebra::make(d);
      const auto report =
          qudit_prime_identity_check(alg, env, detail::cell_seed(seed, 8000 + d * 10 + env));
      out.push_back(make_check(
          "qudit/measurement-identity/d=" + std::to_string(d) + "/env=" + std::to_string(env),
          "I + sum S_k = d sum P_i", "d=" + std::to_string(d) + " env=" + std::to_string(env) +
              (report.residuals_vanish ? " (residuals vanish)" : " (residuals nonzero)"),
          report.residual_norm, report.threshold));
    }
  // Prime-d closure: powers of any nontrivial root sweep the full outcome set.
  for (int d : {2, 3, 5, 7}) {
    const auto alg = QuditShiftAlgebra::make(d);
    double err = 0.0;
    for (int j = 1; j < d; ++j) {
      std::vector<cx> powers;
      cx z = 1;
      for (int k = 0; k < d; ++k) {
        powers.push_back(z);
        z *= alg.outcomes[j];
      }
      for (cx target : alg.outcomes) {
        double best = 2.0;
        for (cx p : powers) best = std::min(best, std::abs(p - target));
        err = std::max(err, best);
      }
    }
    out.push_back(make_check("qudit/prime-closure/d=" + std::to_string(d),
                             "{m_j^k} covers all outcomes for j != 0", "d=" + std::to_string(d),
                             err, tol::algebraic * d));
  }
  {
    // d = 2 reduction to the qubit pillar.
    const auto alg = QuditShiftAlgebra::make(2);
    const HilbertDims dims{2, 1};
    LinearMap lhs = LinearMap::identity(2);
    lhs.mat += conjugation_map(alg.shift(1)).mat;
    const LinearMap id = LinearMap::identity(2);
    const LinearMap rhs = lincomb({{1.0, id},
                                   {1.0, pulse_map(Axis::x, dims)}});
    out.push_back(make_check("qudit/d2-reduction", "d=2 shift algebra is the qubit X algebra",
                             "d=2", map_max_abs_diff(lhs, rhs), tol::algebraic));
  }
  {
    const double residual = qudit_span_residual(QuditShiftAlgebra::make(3), 1);
    out.push_back(make_check("qudit/span/d=3",
                             "S_1 lies outside span{I, P_0, P_1, P_2}", "d=3", residual,
                             tol::control_break, /*expect_exceeds=*/true));
  }
}

inline void check_twoaxis(std::vector<CheckRecord>& out, std::uint64_t seed) {
  std::uint64_t salt = 9000;
  const std::vector<std::vector<Axis>> patterns = {
      {Axis::x}, {Axis::y}, {Axis::x, Axis::y}, {Axis::y, Axis::x}};
  for (const auto& axes : patterns)
    for (int env : {1, 2, 4})
      for (int si : {0, 1, 2}) {
        ++salt;
        const int n = int(axes.size()) + 1;
        const auto model = random_model({2, env}, ModelKind::general, detail::cell_seed(seed, salt));
        const auto sched = detail::sweep_schedule(n, si == 2, detail::cell_seed(seed, salt + 7777));
        const auto report = two_axis_duality_check(model, sched, axes);
        std::string ptag;
        for (Axis a : axes) ptag += axis_char(a);
        const std::string tag = "/pattern=" + ptag + "/env=" + std::to_string(env) + "/seed=" +
                                std::to_string(si);
        out.push_back(make_check("twoaxis/meas-in-dd" + tag,
                                 "mixed-axis non-selective chain = averaged patterns",
                                 "pattern=" + ptag, report.meas_in_dd.max_abs_error,
                                 report.meas_in_dd.threshold));
        out.push_back(make_check("twoaxis/dd-in-meas" + tag,
                                 "mixed-axis pulse sequence = signed measurement expansion",
                                 "pattern=" + ptag, report.dd_in_meas.max_abs_error,
                                 report.dd_in_meas.threshold));
      }
}

// ---------------------------------------------------------------------------

inline std::string iso_timestamp_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline const std::vector<std::string>& verification_scopes() {
  static const std::vector<std::string> scopes = {"all",      "eq3",        "eq4",   "eq5",
                                                  "eq6",      "worked",     "dephasing",
                                                  "multiqubit", "qudit",    "twoaxis"};
  return scopes;
}

inline VerificationReport run_verification(const std::string& scope, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  VerificationReport report;
  report.scope = scope;
  report.seed = seed;
  report.generated_at = iso_timestamp_utc();

  auto run = [&](const std::string& name) { return scope == "all" || scope == name; };
  bool known = scope == "all";
  for (const auto& s : verification_scopes()) known = known || scope == s;
  if (!known) throw std::invalid_argument("run_verification: unknown scope '" + scope + "'");

  if (scope == "all") check_pillars(report.checks);
  if (run("eq3")) check_eq3(report.checks, seed);
  if (run("eq4")) check_eq4(report.checks, seed);
  if (run("eq5")) check_eq5(report.checks, seed);
  if (run("eq6")) check_eq6(report.checks, seed);
  if (run("worked")) check_worked(report.checks, seed);
  if (run("dephasing")) check_dephasing(report.checks, seed);
  if (run("multiqubit")) check_multiqubit(report.checks, seed);
  if (run("qudit")) check_qudit(report.checks, seed);
  if (run("twoaxis")) check_twoaxis(report.checks, seed);

  std::sort(report.checks.begin(), report.checks.end(),
            [](const CheckRecord& a, const CheckRecord& b) { return a.check_id < b.check_id; });
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace ddmeas
