#include "opmachine/carousel.hpp"

#include <algorithm>
#include <cmath>

namespace opm::carousel {

namespace {

// Explicit (coordinate-level) evaluation keeps T in 64 bits.
std::int64_t small_period(const CarouselParams& params) {
  return to_int64(params.period, "carousel period");
}

BigInt floor_mod(const BigInt& a, const BigInt& n) {
  BigInt r = a % n;
  if (r < 0) r += n;
  return r;
}

// Tent of height m on 0..2m-2 (0-based): value and slope of the affine piece
// containing y.
std::pair<BigInt, int> tent_piece(const BigInt& y, const BigInt& m) {
  if (y < m) return {y + 1, 1};
  if (y < 2 * m - 1) return {2 * m - 1 - y, -1};
  return {BigInt(0), 0};
}

std::int64_t tent(std::int64_t y, std::int64_t m) {
  if (y < m) return y + 1;
  if (y < 2 * m - 1) return 2 * m - 1 - y;
  return 0;
}

// sum_{i=0}^{len-1} |c0 + s*i|^p for p in {1, 2}.
BigInt affine_power_sum(BigInt c0, int s, const BigInt& len, NormKind p) {
  if (len <= 0) return 0;
  const BigInt s1 = len * (len - 1) / 2;
  if (p == NormKind::Two) {
    const BigInt s2 = (len - 1) * len * (2 * len - 1) / 6;
    return len * c0 * c0 + 2 * c0 * s * s1 + BigInt(s) * s * s2;
  }
  if (s == 0) return len * abs(c0);
  if (s < 0) {
    c0 = -c0;
    s = -s;
  }
  // First index with c0 + s*i >= 0.
  BigInt first = c0 >= 0 ? BigInt(0) : BigInt((-c0 + s - 1) / s);
  if (first > len) first = len;
  const BigInt neg = -(first * c0 + BigInt(s) * (first * (first - 1) / 2));
  const BigInt pos = (len - first) * c0 + BigInt(s) * (s1 - first * (first - 1) / 2);
  return neg + pos;
}

}  // namespace

CarouselParams CarouselParams::make(BigInt period, BigInt width, Rational eps, NormKind norm) {
  if (width < 1) throw Error("carousel: m must be a positive integer");
  if (4 * width > period) {
    throw Error("carousel: requires 4m <= T (m = " + width.str() + ", T = " + period.str() + ")");
  }
  if (eps <= 0) throw Error("carousel: eps must be positive");
  return CarouselParams{std::move(period), std::move(width), std::move(eps), norm};
}

Rational CarouselProfile::value(std::int64_t position) const {
  auto it = std::lower_bound(values.begin(), values.end(), position,
                             [](const auto& entry, std::int64_t pos) { return entry.first < pos; });
  if (it != values.end() && it->first == position) return it->second;
  return 0;
}

std::vector<Rational> CarouselProfile::dense_values() const {
  std::vector<Rational> dense(static_cast<std::size_t>(small_period(params)));
  for (const auto& [pos, v] : values) dense[static_cast<std::size_t>(pos - 1)] = v;
  return dense;
}

double PNorm::value() const {
  switch (norm) {
    case NormKind::One:
    case NormKind::Inf: return to_double(pth_power);
    case NormKind::Two: return std::sqrt(to_double(pth_power));
  }
  return 0.0;
}

CarouselProfile feed_vector(const CarouselParams& params, const Rational& amplitude) {
  return state_at(params, amplitude, BigInt(1));
}

CarouselProfile step(const CarouselProfile& state) {
  const std::int64_t period = small_period(state.params);
  const std::int64_t m = to_int64(state.params.width, "carousel width");
  const std::vector<Rational> dense = state.dense_values();
  std::vector<Rational> next = shift_apply(std::span<const Rational>(dense));
  const Rational deposit = state.params.eps * state.amplitude;
  for (std::int64_t i = 0; i < m; ++i) next[static_cast<std::size_t>(i)] += deposit;
  for (std::int64_t i = m; i < 2 * m; ++i) next[static_cast<std::size_t>(i)] -= deposit;

  CarouselProfile out{state.params, state.amplitude, state.time + 1, {}};
  for (std::int64_t i = 0; i < period; ++i) {
    if (next[static_cast<std::size_t>(i)] != 0) {
      out.values.emplace_back(i + 1, std::move(next[static_cast<std::size_t>(i)]));
    }
  }
  return out;
}

std::vector<std::pair<std::int64_t, std::int64_t>> bump_counts(const CarouselParams& params,
                                                               const BigInt& time) {
  if (time < 0) throw Error("carousel: time must be non-negative");
  const std::int64_t period = small_period(params);
  const std::int64_t m = to_int64(params.width, "carousel width");
  const std::int64_t shift = floor_mod(time, params.period).convert_to<std::int64_t>();

  // Standing tent on [0, 2m-1) and the moving tent on [shift, shift+2m-1) mod T.
  std::vector<std::int64_t> positions;
  positions.reserve(static_cast<std::size_t>(4 * m));
  for (std::int64_t y = 0; y < 2 * m - 1; ++y) {
    positions.push_back(y);
    positions.push_back((shift + y) % period);
  }
  std::sort(positions.begin(), positions.end());
  positions.erase(std::unique(positions.begin(), positions.end()), positions.end());

  std::vector<std::pair<std::int64_t, std::int64_t>> counts;
  counts.reserve(positions.size());
  for (std::int64_t x : positions) {
    const std::int64_t c = tent(x, m) - tent(((x - shift) % period + period) % period, m);
    if (c != 0) counts.emplace_back(x + 1, c);
  }
  return counts;
}

CarouselProfile state_at(const CarouselParams& params, const Rational& amplitude,
                         const BigInt& time) {
  CarouselProfile out{params, amplitude, time, {}};
  if (amplitude == 0) return out;
  const Rational scale = params.eps * amplitude;
  for (const auto& [pos, c] : bump_counts(params, time)) out.values.emplace_back(pos, scale * c);
  return out;
}

PNorm profile_norm(const CarouselProfile& profile, NormKind p) {
  PNorm out{p, Rational(0)};
  for (const auto& [pos, v] : profile.values) {
    const Rational a = abs(v);
    switch (p) {
      case NormKind::One: out.pth_power += a; break;
      case NormKind::Two: out.pth_power += a * a; break;
      case NormKind::Inf:
        if (a > out.pth_power) out.pth_power = a;
        break;
    }
  }
  return out;
}

BigInt bump_power_sum(const BigInt& period, const BigInt& width, const BigInt& time, NormKind p) {
  if (width < 1 || 4 * width > period) throw Error("bump_power_sum: requires 1 <= m and 4m <= T");
  if (time < 0) throw Error("bump_power_sum: time must be non-negative");
  const BigInt& m = width;
  const BigInt r = floor_mod(time, period);

  std::vector<BigInt> cuts{0, m, 2 * m - 1, r, floor_mod(r + m, period), floor_mod(r + 2 * m - 1, period),
                           period};
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  BigInt total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const BigInt& a = cuts[i];
    const BigInt len = cuts[i + 1] - a;
    auto [v1, s1] = tent_piece(a, m);
    auto [v2, s2] = tent_piece(floor_mod(a - r, period), m);
    const BigInt c0 = v1 - v2;
    const int s = s1 - s2;
    if (p == NormKind::Inf) {
      const BigInt last = abs(BigInt(c0 + BigInt(s) * (len - 1)));
      total = std::max({total, BigInt(abs(c0)), last});
    } else {
      total += affine_power_sum(c0, s, len, p);
    }
  }
  return total;
}

PNorm estimate_constant_L(NormKind p) {
  switch (p) {
    case NormKind::One: return {p, Rational(16, 2)};
    case NormKind::Two: return {p, Rational(32, 3)};
    case NormKind::Inf: return {p, Rational(1)};
  }
  return {p, Rational(1)};
}

const char* to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::Lower: return "lower";
    case BoundKind::Uniform: return "uniform";
    case BoundKind::SmallTime: return "small_time";
  }
  return "?";
}

bool EstimateReport::all_satisfied() const {
  return std::all_of(records.begin(), records.end(), [](const EstimateRecord& r) { return r.satisfied; });
}

std::optional<EstimateRecord> EstimateReport::first_violation() const {
  for (const auto& r : records) {
    if (!r.satisfied) return r;
  }
  return std::nullopt;
}

EstimateReport verify_estimates(const CarouselParams& params, const Rational& amplitude) {
  if (amplitude == 0) throw Error("verify_estimates: amplitude must be nonzero");
  const NormKind p = params.norm;
  const std::int64_t period = small_period(params);
  const std::int64_t m = to_int64(params.width, "carousel width");
  const Rational abs_a = abs(amplitude);
  const Rational scale = params.eps * abs_a;
  const PNorm L = estimate_constant_L(p);

  // Time-independent pieces of the three bounds, already raised to p.
  Rational lower, uniform, small_factor;
  unsigned pe = 0;
  if (p == NormKind::Inf) {
    lower = scale * m;
    uniform = L.pth_power * scale * m;
    small_factor = L.pth_power * scale;
  } else {
    pe = static_cast<unsigned>(norm_exponent(p));
    const Rational scale_p = pow_int(scale, pe);
    const Rational m_pow = Rational(pow_int(BigInt(m), pe + 1));
    lower = Rational(2, pe + 1) * scale_p * m_pow;
    uniform = L.pth_power * scale_p * m_pow;
    small_factor = L.pth_power * scale_p * m;
  }

  EstimateReport report{params, amplitude, L, {}};
  report.records.reserve(static_cast<std::size_t>(period) * 2);
  for (std::int64_t t = 1; t <= period; ++t) {
    const PNorm norm = profile_norm(state_at(params, amplitude, BigInt(t)), p);
    if (m <= t && t <= period - m) {
      report.records.push_back({t, norm, BoundKind::Lower, lower, norm.pth_power >= lower});
    }
    report.records.push_back({t, norm, BoundKind::Uniform, uniform, norm.pth_power <= uniform});
    if (t <= m) {
      const Rational bound = p == NormKind::Inf
                                 ? Rational(small_factor * t)
                                 : Rational(small_factor * Rational(pow_int(BigInt(t), pe)));
      report.records.push_back({t, norm, BoundKind::SmallTime, bound, norm.pth_power <= bound});
    }
  }
  return report;
}

}  // namespace opm::carousel
