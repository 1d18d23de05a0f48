#include "opmachine/numeric.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

namespace opm {

namespace mp = boost::multiprecision;

NormKind parse_norm(std::string_view text) {
  if (text == "1") return NormKind::One;
  if (text == "2") return NormKind::Two;
  if (text == "inf" || text == "INF" || text == "Inf") return NormKind::Inf;
  throw Error("unknown norm '" + std::string(text) + "' (expected 1, 2 or inf)");
}

std::string to_string(NormKind p) {
  switch (p) {
    case NormKind::One: return "1";
    case NormKind::Two: return "2";
    case NormKind::Inf: return "inf";
  }
  return "?";
}

int norm_exponent(NormKind p) {
  switch (p) {
    case NormKind::One: return 1;
    case NormKind::Two: return 2;
    case NormKind::Inf: break;
  }
  throw Error("norm_exponent: p = inf has no finite exponent");
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

// Decimal only: a leading zero would otherwise select octal.
BigInt decimal_digits(std::string_view s) {
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  return BigInt(std::string(s));
}

BigInt parse_signed_integer(std::string_view s, std::string_view whole) {
  bool neg = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw Error("malformed number '" + std::string(whole) + "'");
  BigInt z = decimal_digits(s);
  return neg ? BigInt(-z) : z;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (s.empty()) throw Error("empty number");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    BigInt num = parse_signed_integer(s.substr(0, slash), text);
    std::string_view den_text = s.substr(slash + 1);
    if (!all_digits(den_text)) throw Error("malformed number '" + std::string(text) + "'");
    BigInt den = decimal_digits(den_text);
    if (den == 0) throw Error("zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  bool neg = false;
  if (s.front() == '-' || s.front() == '+') {
    neg = s.front() == '-';
    s.remove_prefix(1);
  }
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    BigInt ex = parse_signed_integer(s.substr(e + 1), text);
    if (abs(ex) > 10000) throw Error("exponent out of range in '" + std::string(text) + "'");
    exponent = ex.convert_to<long>();
    s = s.substr(0, e);
  }
  std::string digits;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view ip = s.substr(0, dot), fp = s.substr(dot + 1);
    if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp)) ||
        (ip.empty() && fp.empty())) {
      throw Error("malformed number '" + std::string(text) + "'");
    }
    digits = std::string(ip) + std::string(fp);
    exponent -= static_cast<long>(fp.size());
  } else {
    if (!all_digits(s)) throw Error("malformed number '" + std::string(text) + "'");
    digits = std::string(s);
  }
  Rational q{decimal_digits(digits)};
  if (exponent > 0) q *= Rational(pow_int(BigInt(10), static_cast<unsigned>(exponent)));
  if (exponent < 0) q /= Rational(pow_int(BigInt(10), static_cast<unsigned>(-exponent)));
  return neg ? Rational(-q) : q;
}

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw Error("non-finite value cannot be made exact");
  return Rational(x);
}

std::string exact_string(const Rational& q) {
  if (mp::denominator(q) == 1) return mp::numerator(q).str();
  return mp::numerator(q).str() + "/" + mp::denominator(q).str();
}

std::string decimal_string(const Rational& q, int digits) {
  if (q == 0) return "0";
  mp::mpf_float_100 f(q);
  return f.str(digits, std::ios_base::fmtflags(0));
}

std::string decimal_string(const BigInt& z, int digits) {
  return decimal_string(Rational(z), digits);
}

std::string decimal_string(double x, int digits) {
  if (x == 0.0) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double to_double(const Rational& q) { return q.convert_to<double>(); }
double to_double(const BigInt& z) { return z.convert_to<double>(); }

Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

BigInt pow_int(const BigInt& base, unsigned exponent) { return mp::pow(base, exponent); }

Rational pow_int(const Rational& base, unsigned exponent) {
  return Rational(mp::pow(mp::numerator(base), exponent), mp::pow(mp::denominator(base), exponent));
}

std::int64_t to_int64(const BigInt& z, std::string_view what) {
  if (z > std::numeric_limits<std::int64_t>::max() || z < std::numeric_limits<std::int64_t>::min()) {
    throw Error(std::string(what) + " exceeds the 64-bit range");
  }
  return z.convert_to<std::int64_t>();
}

namespace {

constexpr std::uint32_t kTrialLimit = 1'000'000;

const std::vector<std::uint32_t>& small_primes() {
  static const std::vector<std::uint32_t> primes = [] {
    std::vector<bool> composite(kTrialLimit + 1, false);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 2; i <= kTrialLimit; ++i) {
      if (composite[i]) continue;
      out.push_back(i);
      for (std::uint64_t j = std::uint64_t{i} * i; j <= kTrialLimit; j += i) composite[j] = true;
    }
    return out;
  }();
  return primes;
}

}  // namespace

SquarefreeRoot squarefree_decompose(const BigInt& radicand) {
  if (radicand <= 0) throw Error("squarefree_decompose: radicand must be positive");
  SquarefreeRoot out;
  BigInt rest = radicand;
  for (std::uint32_t p : small_primes()) {
    BigInt pp = BigInt(p) * p;
    if (pp > rest) break;
    unsigned count = 0;
    while (rest % p == 0) {
      rest /= p;
      ++count;
    }
    if (count / 2 > 0) out.factor *= pow_int(BigInt(p), count / 2);
    if (count % 2 == 1) out.squarefree *= p;
  }
  if (rest > 1) {
    BigInt r = mp::sqrt(rest);
    if (r * r == rest) {
      out.factor *= r;
    } else {
      out.squarefree *= rest;
      // rest has no prime factor below the trial limit; below 10^18 it is a
      // prime or a product of two distinct primes, hence squarefree.
      BigInt limit = pow_int(BigInt(10), 18);
      out.certain = rest < limit;
    }
  }
  return out;
}

void SurdSum::add_root(const Rational& coef, const SquarefreeRoot& root) {
  if (coef == 0) return;
  Rational c = coef * Rational(root.factor);
  if (root.squarefree == 1) {
    rational_ += c;
    return;
  }
  auto [it, inserted] = surds_.try_emplace(root.squarefree, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) surds_.erase(it);
  }
}

SurdSum& SurdSum::operator+=(const SurdSum& other) {
  rational_ += other.rational_;
  for (const auto& [s, c] : other.surds_) {
    auto [it, inserted] = surds_.try_emplace(s, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) surds_.erase(it);
    }
  }
  return *this;
}

SurdSum& SurdSum::operator*=(const Rational& factor) {
  if (factor == 0) {
    rational_ = 0;
    surds_.clear();
    return *this;
  }
  rational_ *= factor;
  for (auto& [s, c] : surds_) c *= factor;
  return *this;
}

SurdSum& SurdSum::operator-=(const SurdSum& other) {
  SurdSum neg = other;
  neg *= Rational(-1);
  return *this += neg;
}

long double SurdSum::to_long_double() const {
  long double v = rational_.convert_to<long double>();
  for (const auto& [s, c] : surds_) {
    v += c.convert_to<long double>() * std::sqrt(s.convert_to<long double>());
  }
  return v;
}

std::string SurdSum::str() const {
  std::ostringstream os;
  os << exact_string(rational_);
  for (const auto& [s, c] : surds_) os << " + (" << exact_string(c) << ")*sqrt(" << s.str() << ")";
  return os.str();
}

}  // namespace opm
