#include <gtest/gtest.h>

#include "opmachine/schedule.hpp"
#include "opmachine/sphere.hpp"
#include "unit/oracles.hpp"

using namespace opm;
using namespace opm::schedule;

namespace {

std::vector<int> stages_of(std::size_t d, int N) { return sphere::stage_map(sphere::default_K(d, N), d, N); }

}  // namespace

TEST(Schedule, PaperFirstEntries) {
  const auto st = stages_of(2, 3);
  const auto s = build_schedule(2, NormKind::Inf, st, 6, Variant::paper());
  EXPECT_EQ(s.at(1).T, 26);
  EXPECT_EQ(s.at(1).m, 1);
  EXPECT_EQ(s.at(2).m, 25);
  EXPECT_EQ(s.at(1).eps_pth(NormKind::Inf), 1);
  EXPECT_TRUE(check_invariants(s).passed());
}

TEST(Schedule, ToyMatchesRecurrence) {
  const auto st = stages_of(2, 3);
  const auto s = build_schedule(2, NormKind::Two, st, 10, Variant::toy(5));
  const auto ref = oracle::toy_schedule(5, 10);
  for (std::uint64_t k = 1; k <= 10; ++k) {
    EXPECT_EQ(s.at(k).T, ref.T[k - 1]);
    EXPECT_EQ(s.at(k).m, ref.m[k - 1]);
  }
  EXPECT_EQ(s.at(4).m, 104);
  const auto rep = check_invariants(s);
  EXPECT_TRUE(rep.passed());
  EXPECT_EQ(rep.get("m_{k+1} >= 5^(dn) m_k").status, CheckStatus::NotApplicable);
  EXPECT_EQ(rep.get("4 m_k <= T_k").status, CheckStatus::Pass);
}

TEST(Schedule, EpsIdentities) {
  const auto st = stages_of(2, 3);
  for (NormKind p : {NormKind::One, NormKind::Two, NormKind::Inf}) {
    const auto s = build_schedule(2, p, st, 12, Variant::toy(5));
    for (const auto& e : s.entries) {
      const Rational n(e.stage);
      const Rational m(e.m);
      switch (p) {
        case NormKind::One: EXPECT_EQ(e.eps_pth(p) * m * m, n); break;
        case NormKind::Two: EXPECT_EQ(e.eps_pth(p) * m * m * m, n * n); break;
        case NormKind::Inf: EXPECT_EQ(e.eps_pth(p) * m, n); break;
      }
    }
  }
}

TEST(Schedule, CorruptedPeriodIsReported) {
  const auto st = stages_of(2, 3);
  auto s = build_schedule(2, NormKind::Two, st, 6, Variant::toy(5));
  s.entries[2].T += 1;
  const auto rep = check_invariants(s);
  EXPECT_FALSE(rep.passed());
  const auto& div = rep.get("T_l | T_r for l <= r");
  EXPECT_EQ(div.status, CheckStatus::Fail);
  EXPECT_EQ(div.witness, "(l,r)=(2,3)");
  EXPECT_THROW(rep.get("no such check"), Error);
}

TEST(Schedule, Validation) {
  const auto st = stages_of(2, 2);
  EXPECT_THROW(build_schedule(2, NormKind::Two, st, st.size() + 1, Variant::toy(5)), Error);
  EXPECT_THROW(build_schedule(2, NormKind::Two, st, 3, Variant::toy(3)), Error);
  const std::vector<int> bad{1, 2, 1};
  EXPECT_THROW(build_schedule(2, NormKind::Two, bad, 3, Variant::toy(5)), Error);
}

// Property: every pair l <= r divides, checked exhaustively against the
// stored values for random TOY factors and the PAPER variant.
TEST(Schedule, PropertyDivisibilityAllPairs) {
  const auto st = stages_of(2, 4);
  for (unsigned f : {5u, 6u, 9u}) {
    const auto s = build_schedule(2, NormKind::One, st, 14, Variant::toy(f));
    for (std::uint64_t l = 1; l <= s.size(); ++l) {
      for (std::uint64_t r = l; r <= s.size(); ++r) ASSERT_EQ(s.at(r).T % s.at(l).T, 0);
      ASSERT_LE(4 * s.at(l).m, s.at(l).T);
    }
  }
  const auto p = build_paper_schedule_below(2, NormKind::Two, st, 128);
  EXPECT_GE(p.size(), 2u);
  EXPECT_LT(p.at(p.size() - 1).T, pow_int(BigInt(2), 128) * pow_int(BigInt(5), 40));
  EXPECT_TRUE(check_invariants(p).passed());
}
