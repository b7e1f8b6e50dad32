#pragma once

// Protocol bookkeeping: intervention times, pulse patterns, outcome sequences
// and the keyed signal table. Chronological order (first intervention first)
// is used for all stored sequences.

#include "ddmeas/model.hpp"

#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <vector>

namespace ddmeas {

struct ProtocolSchedule {
  std::vector<double> times;        // t_1 < ... < t_n, with t_0 = 0 implicit
  std::vector<SegmentKind> kinds;   // generator kind of U_k on (t_{k-1}, t_k]

  int n_steps() const { return int(times.size()); }

  double duration(int k) const {  // 0-based segment index
    return k == 0 ? times[0] : times[k] - times[k - 1];
  }

  void validate() const {
    if (times.empty()) throw std::invalid_argument("ProtocolSchedule: empty schedule");
    if (kinds.size() != times.size())
      throw std::invalid_argument("ProtocolSchedule: one segment kind per time step required");
    if (times[0] < 0) throw std::invalid_argument("ProtocolSchedule: times must be >= 0");
    for (size_t k = 1; k < times.size(); ++k)
      if (times[k] <= times[k - 1])
        throw std::invalid_argument("ProtocolSchedule: times must be strictly increasing");
  }

  // Covers the exact time bit patterns and the segment kinds: equal times with
  // different kinds are physically different experiments and must not collide.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_byte = [&h](unsigned char b) {
      h ^= b;
      h *= 1099511628211ULL;
    };
    for (double t : times) {
      std::uint64_t bits;
      std::memcpy(&bits, &t, sizeof bits);
      for (int i = 0; i < 8; ++i) mix_byte((bits >> (8 * i)) & 0xff);
    }
    for (SegmentKind k : kinds) mix_byte(k == SegmentKind::env_only ? 1 : 0);
    return h;
  }
};

inline ProtocolSchedule uniform_schedule(const std::vector<double>& times, SegmentKind kind) {
  ProtocolSchedule s{times, std::vector<SegmentKind>(times.size(), kind)};
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------

enum class PulseOp { idle, x_pulse, y_pulse };

struct PulsePattern {
  std::vector<PulseOp> slots;  // s_1 ... s_{n-1}

  static PulsePattern all_idle(int n_slots) {
    return {std::vector<PulseOp>(n_slots, PulseOp::idle)};
  }

  static PulsePattern all_x(int n_slots) {
    return {std::vector<PulseOp>(n_slots, PulseOp::x_pulse)};
  }

  static PulsePattern parse(const std::string& text) {
    PulsePattern p;
    for (char c : text) {
      switch (c) {
        case 'i': p.slots.push_back(PulseOp::idle); break;
        case 'x': p.slots.push_back(PulseOp::x_pulse); break;
        case 'y': p.slots.push_back(PulseOp::y_pulse); break;
        default: throw std::invalid_argument("PulsePattern: slots are 'i', 'x' or 'y'");
      }
    }
    return p;
  }

  std::string str() const {
    std::string out;
    for (PulseOp s : slots)
      out += s == PulseOp::idle ? 'i' : (s == PulseOp::x_pulse ? 'x' : 'y');
    return out;
  }
};

// All 2^k patterns over {idle, x}, lexicographic with idle before x.
inline std::vector<PulsePattern> all_xi_patterns(int n_slots) {
  std::vector<PulsePattern> out;
  out.reserve(std::size_t(1) << n_slots);
  for (unsigned mask = 0; mask < (1u << n_slots); ++mask) {
    PulsePattern p;
    p.slots.resize(n_slots);
    for (int k = 0; k < n_slots; ++k)
      p.slots[k] = (mask >> (n_slots - 1 - k)) & 1u ? PulseOp::x_pulse : PulseOp::idle;
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------

// Checks closure under multiplication and complex conjugation, the structural
// requirement every outcome alphabet in use must satisfy.
inline bool alphabet_closed(const std::vector<cx>& values, double tol = tol::algebraic) {
  auto member = [&](cx v) {
    for (cx w : values)
      if (std::abs(v - w) <= tol) return true;
    return false;
  };
  for (cx a : values) {
    if (!member(std::conj(a))) return false;
    for (cx b : values)
      if (!member(a * b)) return false;
  }
  return true;
}

struct OutcomeSequence {
  std::vector<cx> outcomes;  // m_1 ... m_n, chronological

  static OutcomeSequence x_signs(const std::vector<int>& signs) {
    OutcomeSequence o;
    for (int s : signs) {
      if (s != +1 && s != -1) throw std::invalid_argument("OutcomeSequence: signs must be +1/-1");
      o.outcomes.push_back(cx(double(s), 0.0));
    }
    return o;
  }

  // Extracts +1/-1 entries; errors out on a non-X alphabet.
  std::vector<int> signs() const {
    std::vector<int> s;
    for (cx m : outcomes) {
      if (m == cx{1, 0}) s.push_back(+1);
      else if (m == cx{-1, 0}) s.push_back(-1);
      else throw std::invalid_argument("OutcomeSequence: entry outside the +1/-1 alphabet");
    }
    return s;
  }

  std::string str() const {
    std::string out;
    for (cx m : outcomes) {
      if (m == cx{1, 0}) out += '+';
      else if (m == cx{-1, 0}) out += '-';
      else if (m == cx{0, 1}) out += "+i";
      else if (m == cx{0, -1}) out += "-i";
      else out += '?';
    }
    return out;
  }

  void validate() const {
    std::vector<cx> distinct;
    for (cx m : outcomes) {
      bool seen = false;
      for (cx d : distinct) seen = seen || d == m;
      if (!seen) distinct.push_back(m);
    }
    if (!alphabet_closed(distinct))
      throw std::invalid_argument("OutcomeSequence: alphabet not closed under multiplication/conjugation");
  }
};

// Bit k of idx (counting from the most significant used bit) selects the sign
// of chronological slot k; 0 -> +1, so enumeration is lexicographic, + first.
inline std::vector<int> signs_from_index(unsigned idx, int n) {
  std::vector<int> s(n);
  for (int k = 0; k < n; ++k) s[k] = (idx >> (n - 1 - k)) & 1u ? -1 : +1;
  return s;
}

// ---------------------------------------------------------------------------

enum class SignalKind { W, O, P, P_R };

inline const char* signal_kind_name(SignalKind k) {
  switch (k) {
    case SignalKind::W: return "W";
    case SignalKind::O: return "O";
    case SignalKind::P: return "P";
    case SignalKind::P_R: return "P_R";
  }
  return "?";
}

struct SignalKey {
  SignalKind kind;
  std::uint64_t schedule_hash;
  std::string label;  // pattern string, outcome string, or subset descriptor

  auto operator<=>(const SignalKey&) const = default;
};

// Keyed scalar signals with provenance. Values are stored complex; realness is
// asserted on typed access.
struct SignalTable {
  std::map<SignalKey, cx> entries;
  std::string provenance;

  void set(const SignalKey& key, cx value) { entries[key] = value; }

  cx at(const SignalKey& key) const {
    auto it = entries.find(key);
    if (it == entries.end())
      throw std::out_of_range(std::string("SignalTable: missing entry ") +
                              signal_kind_name(key.kind) + "/" + key.label);
    return it->second;
  }

  double real_at(const SignalKey& key) const {
    return real_checked(at(key), tol::realness, "SignalTable entry");
  }

  // Every probability in [0,1] and the whole table summing to one, within the
  // chained tolerance.
  void validate_probabilities(SignalKind kind, std::uint64_t schedule_hash) const {
    cx sum = 0;
    bool any = false;
    for (const auto& [key, value] : entries) {
      if (key.kind != kind || key.schedule_hash != schedule_hash) continue;
      any = true;
      const double p = real_checked(value, tol::realness, "probability");
      if (p < -tol::chained || p > 1.0 + tol::chained)
        throw std::runtime_error("SignalTable: probability outside [0, 1]");
      sum += value;
    }
    if (!any) throw std::runtime_error("SignalTable: no probabilities for this schedule");
    if (std::abs(sum - cx{1, 0}) > tol::chained)
      throw std::runtime_error("SignalTable: probabilities do not sum to 1");
  }
};

}  // namespace ddmeas
