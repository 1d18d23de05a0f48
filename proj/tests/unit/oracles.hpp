#pragma once

// Reference implementations used only by tests. They follow the definitions
// directly (dense iteration, plain recurrences) and share no code paths with
// the closed forms under test beyond the number types.

#include <cstdint>
#include <map>
#include <vector>

#include "opmachine/machine.hpp"
#include "opmachine/numeric.hpp"

namespace oracle {

using opm::BigInt;
using opm::NormKind;
using opm::Rational;
using opm::SurdSum;

/// Integer pattern after t applications of y -> S(y) + F, F = +1 on
/// positions 1..m and -1 on m+1..2m, starting from zero. Index 0 is position 1.
inline std::vector<std::int64_t> carousel_pattern(std::int64_t T, std::int64_t m, std::int64_t t) {
  std::vector<std::int64_t> y(static_cast<std::size_t>(T), 0);
  std::vector<std::int64_t> next(y.size());
  for (std::int64_t s = 0; s < t; ++s) {
    for (std::int64_t i = 0; i < T; ++i) next[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>((i + T - 1) % T)];
    for (std::int64_t i = 0; i < m; ++i) next[static_cast<std::size_t>(i)] += 1;
    for (std::int64_t i = m; i < 2 * m; ++i) next[static_cast<std::size_t>(i)] -= 1;
    y.swap(next);
  }
  return y;
}

/// Stepper that advances one period at a time; cheaper than restarting.
class CarouselStepper {
 public:
  CarouselStepper(std::int64_t T, std::int64_t m) : T_(T), m_(m), y_(static_cast<std::size_t>(T), 0), next_(y_.size()) {}
  void step() {
    for (std::int64_t i = 0; i < T_; ++i) next_[static_cast<std::size_t>(i)] = y_[static_cast<std::size_t>((i + T_ - 1) % T_)];
    for (std::int64_t i = 0; i < m_; ++i) next_[static_cast<std::size_t>(i)] += 1;
    for (std::int64_t i = m_; i < 2 * m_; ++i) next_[static_cast<std::size_t>(i)] -= 1;
    y_.swap(next_);
  }
  const std::vector<std::int64_t>& pattern() const { return y_; }

 private:
  std::int64_t T_, m_;
  std::vector<std::int64_t> y_, next_;
};

/// sum |c|^p (p = 1, 2) or max |c| (p = inf).
inline std::int64_t power_sum(const std::vector<std::int64_t>& c, NormKind p) {
  std::int64_t s = 0;
  for (std::int64_t v : c) {
    const std::int64_t a = v < 0 ? -v : v;
    switch (p) {
      case NormKind::One: s += a; break;
      case NormKind::Two: s += a * a; break;
      case NormKind::Inf: s = std::max(s, a); break;
    }
  }
  return s;
}

struct ScheduleRef {
  std::vector<BigInt> m, T;  // index k-1
};

/// TOY(f) recurrences: T_k = f T_{k-1}, m_1 = 1, m_k = T_{k-1} - m_{k-1}.
inline ScheduleRef toy_schedule(unsigned f, std::size_t k_max) {
  ScheduleRef s;
  BigInt T = 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const BigInt m = k == 1 ? BigInt(1) : BigInt(s.T.back() - s.m.back());
    T *= f;
    s.m.push_back(m);
    s.T.push_back(T);
  }
  return s;
}

/// Dense evaluation of the truncated machine by its definition: every block
/// coordinate is r + q sqrt(m_k) with rational r, q (q = 0 unless p = 2).
class DenseMachine {
 public:
  explicit DenseMachine(const opm::machine::PointState& state) : state_(state) {
    const auto& mach = state.machine();
    const NormKind p = mach.p();
    for (std::uint64_t k = 1; k <= mach.k_max(); ++k) {
      const auto& e = mach.schedule().at(k);
      Block b;
      b.T = opm::to_int64(e.T, "T");
      b.m = opm::to_int64(e.m, "m");
      b.root = opm::squarefree_decompose(e.m);
      const Rational n(e.stage);
      // eps = n / m^2 * sqrt(m) for p = 2, n / m^2 for p = 1, n / m for inf.
      switch (p) {
        case NormKind::Two: b.eps = n / Rational(e.m * e.m); break;
        case NormKind::One: b.eps = n / Rational(e.m * e.m); break;
        case NormKind::Inf: b.eps = n / Rational(e.m); break;
      }
      blocks_.push_back(std::move(b));
    }
    const std::size_t copies = mach.copies();
    r_.assign(copies, {});
    q_.assign(copies, {});
    for (std::size_t j = 0; j < copies; ++j) {
      for (const auto& b : blocks_) {
        r_[j].emplace_back(static_cast<std::size_t>(b.T), Rational(0));
        q_[j].emplace_back(static_cast<std::size_t>(b.T), Rational(0));
      }
      if (j < state.x().size()) {
        for (const auto& [slot, v] : state.x()[j]) {
          const std::uint64_t k = mach.block_of_slot(slot);
          const std::int64_t local = slot - mach.block_start(k);
          r_[j][k - 1][static_cast<std::size_t>(local)] += v;
        }
      }
    }
  }

  void step() {
    const auto& mach = state_.machine();
    const bool surd = mach.p() == NormKind::Two;
    for (std::size_t j = 0; j < r_.size(); ++j) {
      for (std::size_t k = 0; k < blocks_.size(); ++k) {
        const Block& b = blocks_[k];
        rotate(r_[j][k]);
        rotate(q_[j][k]);
        const Rational dep = b.eps * state_.amplitude(k + 1, j);
        auto& target = surd ? q_[j][k] : r_[j][k];
        for (std::int64_t i = 0; i < b.m; ++i) target[static_cast<std::size_t>(i)] += dep;
        for (std::int64_t i = b.m; i < 2 * b.m; ++i) target[static_cast<std::size_t>(i)] -= dep;
      }
    }
  }

  /// ||(u, y)||^2 with the l^2 sum over u and the copies.
  SurdSum total_sq() const {
    SurdSum total(state_.u_norm_sq());
    const NormKind p = state_.machine().p();
    for (std::size_t j = 0; j < r_.size(); ++j) {
      if (p == NormKind::Two) {
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
          const Block& b = blocks_[k];
          const Rational mq(BigInt(b.m));
          for (std::size_t i = 0; i < r_[j][k].size(); ++i) {
            const Rational& r = r_[j][k][i];
            const Rational& q = q_[j][k][i];
            total.add_rational(r * r + q * q * mq);
            if (r != 0 && q != 0) total.add_root(2 * r * q, b.root);
          }
        }
      } else {
        Rational norm = 0;
        for (const auto& block : r_[j]) {
          for (const Rational& v : block) {
            const Rational a = opm::abs(v);
            if (p == NormKind::One) {
              norm += a;
            } else if (a > norm) {
              norm = a;
            }
          }
        }
        total.add_rational(norm * norm);
      }
    }
    return total;
  }

  /// Coordinate of copy j at a 1-based truncated slot.
  SurdSum coordinate(std::size_t j, std::int64_t slot) const {
    const auto& mach = state_.machine();
    const std::uint64_t k = mach.block_of_slot(slot);
    const auto local = static_cast<std::size_t>(slot - mach.block_start(k));
    SurdSum v(r_[j][k - 1][local]);
    if (q_[j][k - 1][local] != 0) v.add_root(q_[j][k - 1][local], blocks_[k - 1].root);
    return v;
  }

 private:
  struct Block {
    std::int64_t T = 0, m = 0;
    Rational eps;
    opm::SquarefreeRoot root;
  };
  static void rotate(std::vector<Rational>& v) {
    if (v.empty()) return;
    Rational last = v.back();
    for (std::size_t i = v.size() - 1; i > 0; --i) v[i] = v[i - 1];
    v[0] = last;
  }

  const opm::machine::PointState& state_;
  std::vector<Block> blocks_;
  std::vector<std::vector<std::vector<Rational>>> r_, q_;
};

}  // namespace oracle
