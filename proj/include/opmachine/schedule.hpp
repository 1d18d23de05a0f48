#pragma once

// Exact schedule of block constants m_k, T_k, eps_k.
//
//   m_1 = 1, T_0 = 1, m_k = T_{k-1} - m_{k-1}
//   PAPER:   T_k = (5^(d n) + 1) T_{k-1},  n = stage(k)
//   TOY(f):  T_k = f T_{k-1}
//   eps_k = n / m_k^((p+1)/p)  (p = 1, 2),   n / m_k  (p = inf)
//
// eps_k is irrational for p = 2, so it is stored as the pair (n, m_k) and
// only ever used through its exact p-th power.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "opmachine/numeric.hpp"

namespace opm::schedule {

struct Variant {
  enum class Kind { Paper, Toy };
  Kind kind = Kind::Toy;
  unsigned factor = 5;  // TOY only

  static Variant paper() { return {Kind::Paper, 0}; }
  static Variant toy(unsigned factor) { return {Kind::Toy, factor}; }
  std::string str() const;
};

struct Entry {
  std::uint64_t k = 0;
  int stage = 0;
  BigInt m;
  BigInt T;

  /// eps_k^p for p = 1, 2 and eps_k itself for p = inf.
  Rational eps_pth(NormKind p) const;
  double eps_value(NormKind p) const;
};

struct Schedule {
  std::size_t d = 2;
  NormKind norm = NormKind::Two;
  Variant variant;
  std::vector<Entry> entries;  // entries[k-1]

  const Entry& at(std::uint64_t k) const { return entries.at(k - 1); }
  std::uint64_t size() const { return entries.size(); }
  /// T_0 = 1.
  BigInt period(std::uint64_t k) const { return k == 0 ? BigInt(1) : at(k).T; }
};

/// stage_of[k-1] = stage of feed k; must be non-decreasing and cover 1..k_max.
Schedule build_schedule(std::size_t d, NormKind p, std::span<const int> stage_of, std::uint64_t k_max,
                        Variant variant);

/// PAPER entries while T_k < 2^bits (at least one entry).
Schedule build_paper_schedule_below(std::size_t d, NormKind p, std::span<const int> stage_of, unsigned bits);

enum class CheckStatus { Pass, Fail, NotApplicable };
const char* to_string(CheckStatus s);

struct InvariantCheck {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  /// Human-readable witness of the first failure, e.g. "(l,r)=(2,3)".
  std::string witness;
  std::uint64_t witness_k = 0;
  std::uint64_t witness_l = 0;
};

struct InvariantReport {
  std::vector<InvariantCheck> checks;
  bool passed() const;
  const InvariantCheck& get(const std::string& name) const;
};

/// Verifies m_1 = 1, the m and T recurrences, 4 m_k <= T_k, divisibility
/// T_l | T_r for l <= r (via consecutive pairs), the 5^(dn) growth of m for
/// PAPER, and the eps identities eps^p m^(p+1) = n^p (eps m = n for inf).
InvariantReport check_invariants(const Schedule& s);

}  // namespace opm::schedule
