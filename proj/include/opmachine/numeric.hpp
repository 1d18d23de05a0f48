#pragma once

// Exact scalar types shared by every module: GMP-backed integers and
// rationals, the norm selector, and sums of square roots with rational
// coefficients (the field elements produced by p = 2 orbit norms).

#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>

namespace opm {

using BigInt = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

/// Base class for every error the library raises on invalid input.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Selector for the l^p norm on the block coordinates.
enum class NormKind { One, Two, Inf };

NormKind parse_norm(std::string_view text);
std::string to_string(NormKind p);

/// Exponent as a plain number; Inf has no finite exponent and throws.
int norm_exponent(NormKind p);

/// Parses "7", "-3/4", "0.125", "1e-3" exactly.
Rational parse_rational(std::string_view text);

/// Every finite double is a dyadic rational; this returns it exactly.
Rational exact_rational(double x);

/// "num/den" (or "num" when the denominator is 1).
std::string exact_string(const Rational& q);

/// Decimal with `digits` significant digits, valid far outside double range.
std::string decimal_string(const Rational& q, int digits = 15);
std::string decimal_string(const BigInt& z, int digits = 15);
std::string decimal_string(double x, int digits = 15);

double to_double(const Rational& q);
double to_double(const BigInt& z);

Rational abs(const Rational& q);
BigInt pow_int(const BigInt& base, unsigned exponent);
Rational pow_int(const Rational& base, unsigned exponent);

/// Fits-in-int64 conversion; throws Error otherwise.
std::int64_t to_int64(const BigInt& z, std::string_view what);

/// sqrt(radicand) = factor * sqrt(squarefree).
struct SquarefreeRoot {
  BigInt factor{1};
  BigInt squarefree{1};
  /// True when the decomposition is proven canonical. Trial division runs
  /// to 10^6, which settles every radicand below 10^18.
  bool certain = true;
};

SquarefreeRoot squarefree_decompose(const BigInt& radicand);

/// Element  r + sum_i c_i sqrt(s_i)  with distinct squarefree s_i > 1.
/// Canonical, so equality is exact field equality whenever every radicand
/// that went in was decomposed with certain = true.
class SurdSum {
 public:
  SurdSum() = default;
  explicit SurdSum(Rational r) : rational_(std::move(r)) {}

  void add_rational(const Rational& r) { rational_ += r; }
  /// Adds coef * sqrt(root.factor^2 * root.squarefree).
  void add_root(const Rational& coef, const SquarefreeRoot& root);
  SurdSum& operator+=(const SurdSum& other);
  SurdSum& operator-=(const SurdSum& other);
  SurdSum& operator*=(const Rational& factor);

  const Rational& rational_part() const { return rational_; }
  const std::map<BigInt, Rational>& surds() const { return surds_; }
  bool is_rational() const { return surds_.empty(); }
  bool is_zero() const { return surds_.empty() && rational_ == 0; }

  long double to_long_double() const;
  double to_double() const { return static_cast<double>(to_long_double()); }

  friend bool operator==(const SurdSum& a, const SurdSum& b) {
    return a.rational_ == b.rational_ && a.surds_ == b.surds_;
  }

  std::string str() const;

 private:
  Rational rational_{0};
  std::map<BigInt, Rational> surds_;
};

}  // namespace opm
