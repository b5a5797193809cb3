#pragma once
// Exponent bookkeeping: Lebesgue exponents as exact rationals (with an
// explicit infinity), conjugates, the alpha/beta/theta functionals, the
// critical operator order for a full exponent profile, and the smoothness
// window checks. Everything here is exact until smoothness parameters
// (plain doubles) enter.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlpo/util.hpp"

namespace mlpo {

// Exact rational with normalized sign and gcd-reduced terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n, std::int64_t d);
  static Rational integer(std::int64_t n) { return Rational(n, 1); }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;
  Rational operator-() const { return Rational(-num, den); }
  Rational operator*(const Rational& o) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const { return *this < o || *this == o; }

  std::string str() const;
};

Rational rat_min(const Rational& a, const Rational& b);
Rational rat_max(const Rational& a, const Rational& b);

// A Lebesgue exponent p in (0, infinity]. Stored exactly.
class LebesgueExponent {
 public:
  LebesgueExponent() : inf_(true) {}  // default: infinity
  explicit LebesgueExponent(Rational v);
  static LebesgueExponent infinity() { return LebesgueExponent(); }
  static LebesgueExponent from_int(std::int64_t p) {
    return LebesgueExponent(Rational::integer(p));
  }
  // Accepts "inf", integers ("2"), fractions ("4/3"), and short decimals ("0.5").
  static LebesgueExponent parse(const std::string& text);

  bool is_infinity() const { return inf_; }
  // Finite value; throws for infinity.
  Rational value() const;
  // 1/p, with 1/inf = 0. Always finite.
  Rational reciprocal() const;
  double to_double() const;
  std::string str() const;

  bool operator==(const LebesgueExponent& o) const;
  bool operator<(const LebesgueExponent& o) const;
  bool operator<=(const LebesgueExponent& o) const { return *this < o || *this == o; }

 private:
  bool inf_ = false;
  Rational v_{1, 1};
};

// Conjugate exponent: 1/p + 1/p' = 1 for 1 < p <= inf; p' = inf for 0 < p <= 1.
LebesgueExponent conjugate(const LebesgueExponent& p);

// alpha(p) = n/2 - min(n/2, n/p)   (so alpha(inf) = n/2)
// beta(p)  = n/2 - max(n/2, n/p)
// theta(p) = n/2 - beta(p) = max(n/p, n/2)
struct ExponentFunctionals {
  Rational alpha;
  Rational beta;
  Rational theta;
};
ExponentFunctionals exponent_functionals(const LebesgueExponent& p, int n);

// Full exponent profile for an N-linear problem in dimension n.
struct ExponentProfile {
  int N = 2;
  int n = 1;
  LebesgueExponent p;                 // target Lebesgue exponent
  LebesgueExponent q;                 // target fine index
  std::vector<LebesgueExponent> p_j;  // size N
  std::vector<LebesgueExponent> q_j;  // size N
  double s = 0.0;                     // target smoothness
  std::vector<double> s_j;            // size N

  void validate() const;  // throws config_error on malformed profiles
  static ExponentProfile parse_json(const std::string& json_text);
};

// Critical operator order:
//   m = min(n/p, n/2) - sum_j max(n/p_j, n/2) + sum_j s_j - s.
// The exponent part is exact; the smoothness part is plain double arithmetic.
struct CriticalOrder {
  Rational exponent_part;  // min(n/p, n/2) - sum_j max(n/p_j, n/2)
  double smoothness_part;  // sum_j s_j - s
  double value() const { return exponent_part.value() + smoothness_part; }
};
CriticalOrder critical_order(const ExponentProfile& profile);

// Smoothness window:
//   sufficient (strict):   s_j < max(n/p_j, n/2) and s > -max(n/p', n/2)
//   necessary (non-strict): same with <= / >=.
struct SmoothnessCheck {
  bool sufficient = false;
  bool necessary = false;
  std::vector<double> source_margins;  // max(n/p_j, n/2) - s_j, per slot
  double target_margin = 0.0;          // s + max(n/p', n/2)
};
SmoothnessCheck check_smoothness_conditions(const ExponentProfile& profile);

}  // namespace mlpo
