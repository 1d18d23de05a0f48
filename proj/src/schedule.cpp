#include "opmachine/schedule.hpp"

#include <algorithm>

namespace opm::schedule {

std::string Variant::str() const {
  return kind == Kind::Paper ? std::string("paper") : "toy(" + std::to_string(factor) + ")";
}

Rational Entry::eps_pth(NormKind p) const {
  const BigInt n(stage);
  switch (p) {
    case NormKind::One: return Rational(n, m * m);
    case NormKind::Two: return Rational(n * n, m * m * m);
    case NormKind::Inf: return Rational(n, m);
  }
  return 0;
}

double Entry::eps_value(NormKind p) const {
  const double v = to_double(eps_pth(p));
  return p == NormKind::Two ? std::sqrt(v) : v;
}

namespace {

BigInt growth_factor(std::size_t d, int stage, const Variant& v) {
  if (v.kind == Variant::Kind::Toy) return BigInt(v.factor);
  return pow_int(BigInt(5), static_cast<unsigned>(d) * static_cast<unsigned>(stage)) + 1;
}

void validate_inputs(std::size_t d, std::span<const int> stage_of, std::uint64_t k_max, const Variant& variant) {
  if (d < 2) throw Error("schedule: d must be at least 2");
  if (variant.kind == Variant::Kind::Toy && variant.factor < 5) {
    throw Error("schedule: TOY factor must be at least 5 (got " + std::to_string(variant.factor) + ")");
  }
  if (stage_of.size() < k_max) throw Error("schedule: stage map shorter than k_max");
  for (std::size_t i = 0; i < k_max; ++i) {
    if (stage_of[i] < 1) throw Error("schedule: stages are positive");
    if (i > 0 && stage_of[i] < stage_of[i - 1]) throw Error("schedule: stage map must be non-decreasing");
  }
}

Entry next_entry(const Schedule& s, std::uint64_t k, int stage) {
  Entry e;
  e.k = k;
  e.stage = stage;
  const BigInt prev_T = s.period(k - 1);
  e.m = k == 1 ? BigInt(1) : BigInt(prev_T - s.at(k - 1).m);
  e.T = growth_factor(s.d, stage, s.variant) * prev_T;
  if (4 * e.m > e.T) throw Error("schedule: 4 m_k <= T_k fails at k = " + std::to_string(k));
  return e;
}

}  // namespace

Schedule build_schedule(std::size_t d, NormKind p, std::span<const int> stage_of, std::uint64_t k_max,
                        Variant variant) {
  validate_inputs(d, stage_of, k_max, variant);
  Schedule s{d, p, variant, {}};
  s.entries.reserve(k_max);
  for (std::uint64_t k = 1; k <= k_max; ++k) s.entries.push_back(next_entry(s, k, stage_of[k - 1]));
  return s;
}

Schedule build_paper_schedule_below(std::size_t d, NormKind p, std::span<const int> stage_of, unsigned bits) {
  const Variant variant = Variant::paper();
  validate_inputs(d, stage_of, stage_of.size(), variant);
  const BigInt limit = pow_int(BigInt(2), bits);
  Schedule s{d, p, variant, {}};
  for (std::uint64_t k = 1; k <= stage_of.size(); ++k) {
    Entry e = next_entry(s, k, stage_of[k - 1]);
    if (e.T >= limit && k > 1) return s;
    s.entries.push_back(std::move(e));
  }
  throw Error("schedule: stage map exhausted before T_k reached 2^" + std::to_string(bits));
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::NotApplicable: return "NOT-APPLICABLE";
  }
  return "?";
}

bool InvariantReport::passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::Fail; });
}

const InvariantCheck& InvariantReport::get(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw Error("no invariant named '" + name + "'");
}

namespace {

struct Checker {
  InvariantCheck check;

  explicit Checker(std::string name) { check.name = std::move(name); }

  void fail(std::uint64_t k, std::string witness, std::uint64_t l = 0) {
    if (check.status == CheckStatus::Fail) return;
    check.status = CheckStatus::Fail;
    check.witness = std::move(witness);
    check.witness_k = k;
    check.witness_l = l;
  }
};

std::string at_k(std::uint64_t k) { return "k=" + std::to_string(k); }

}  // namespace

InvariantReport check_invariants(const Schedule& s) {
  Checker m_first("m_1 = 1");
  Checker m_rec("m_k = T_{k-1} - m_{k-1}");
  Checker t_rec("T_k recurrence");
  Checker width("4 m_k <= T_k");
  Checker divides("T_l | T_r for l <= r");
  Checker growth("m_{k+1} >= 5^(dn) m_k");
  Checker stages("stage map non-decreasing");
  Checker eps("eps_k^p m_k^(p+1) = n^p");

  if (!s.entries.empty() && s.at(1).m != 1) m_first.fail(1, at_k(1));
  for (std::uint64_t k = 1; k <= s.size(); ++k) {
    const Entry& e = s.at(k);
    if (k >= 2 && e.m != s.period(k - 1) - s.at(k - 1).m) m_rec.fail(k, at_k(k));
    if (e.T != growth_factor(s.d, e.stage, s.variant) * s.period(k - 1)) t_rec.fail(k, at_k(k));
    if (4 * e.m > e.T) width.fail(k, at_k(k));
    // Divisibility is transitive, so consecutive pairs (k-1, k) cover all l <= r.
    if (k >= 2 && e.T % s.at(k - 1).T != 0) {
      divides.fail(k, "(l,r)=(" + std::to_string(k - 1) + "," + std::to_string(k) + ")", k - 1);
    }
    if (k >= 2 && e.stage < s.at(k - 1).stage) stages.fail(k, at_k(k));
    if (s.variant.kind == Variant::Kind::Paper && k < s.size()) {
      const BigInt factor = pow_int(BigInt(5), static_cast<unsigned>(s.d) * static_cast<unsigned>(e.stage));
      if (s.at(k + 1).m < factor * e.m) growth.fail(k, at_k(k));
    }
    const BigInt n(e.stage);
    bool eps_ok = true;
    switch (s.norm) {
      case NormKind::One: eps_ok = e.eps_pth(s.norm) * Rational(e.m * e.m) == Rational(n); break;
      case NormKind::Two: eps_ok = e.eps_pth(s.norm) * Rational(e.m * e.m * e.m) == Rational(n * n); break;
      case NormKind::Inf: eps_ok = e.eps_pth(s.norm) * Rational(e.m) == Rational(n); break;
    }
    if (!eps_ok) eps.fail(k, at_k(k));
  }
  if (s.variant.kind == Variant::Kind::Toy) growth.check.status = CheckStatus::NotApplicable;

  InvariantReport report;
  for (Checker* c : {&m_first, &m_rec, &t_rec, &width, &divides, &growth, &stages, &eps}) {
    report.checks.push_back(std::move(c->check));
  }
  return report;
}

}  // namespace opm::schedule
