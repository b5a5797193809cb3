#include "mlpo/exponents.hpp"

#include <nlohmann/json.hpp>
#include <numeric>

namespace mlpo {

Rational::Rational(std::int64_t n, std::int64_t d) {
  if (d == 0) throw config_error("Rational: zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g == 0) g = 1;
  num = n / g;
  den = d / g;
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(num * o.den + o.num * den, den * o.den);
}

Rational Rational::operator-(const Rational& o) const {
  return Rational(num * o.den - o.num * den, den * o.den);
}

Rational Rational::operator*(const Rational& o) const {
  return Rational(num * o.num, den * o.den);
}

bool Rational::operator<(const Rational& o) const {
  return num * o.den < o.num * den;
}

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational rat_min(const Rational& a, const Rational& b) { return a < b ? a : b; }
Rational rat_max(const Rational& a, const Rational& b) { return a < b ? b : a; }

LebesgueExponent::LebesgueExponent(Rational v) : inf_(false), v_(v) {
  if (v.num <= 0) throw config_error("LebesgueExponent: must be positive, got " + v.str());
}

LebesgueExponent LebesgueExponent::parse(const std::string& text) {
  if (text == "inf" || text == "Inf" || text == "INF" || text == "infinity") {
    return infinity();
  }
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      std::int64_t a = std::stoll(text.substr(0, slash));
      std::int64_t b = std::stoll(text.substr(slash + 1));
      return LebesgueExponent(Rational(a, b));
    }
    auto dot = text.find('.');
    if (dot != std::string::npos) {
      std::string digits = text.substr(0, dot) + text.substr(dot + 1);
      std::int64_t scale = 1;
      for (std::size_t i = dot + 1; i < text.size(); ++i) scale *= 10;
      return LebesgueExponent(Rational(std::stoll(digits), scale));
    }
    return LebesgueExponent(Rational::integer(std::stoll(text)));
  } catch (const std::logic_error&) {
    throw config_error("LebesgueExponent: cannot parse '" + text + "'");
  }
}

Rational LebesgueExponent::value() const {
  if (inf_) throw config_error("LebesgueExponent: infinite exponent has no finite value");
  return v_;
}

Rational LebesgueExponent::reciprocal() const {
  if (inf_) return Rational::integer(0);
  return Rational(v_.den, v_.num);
}

double LebesgueExponent::to_double() const {
  return inf_ ? std::numeric_limits<double>::infinity() : v_.value();
}

std::string LebesgueExponent::str() const { return inf_ ? "inf" : v_.str(); }

bool LebesgueExponent::operator==(const LebesgueExponent& o) const {
  if (inf_ || o.inf_) return inf_ == o.inf_;
  return v_ == o.v_;
}

bool LebesgueExponent::operator<(const LebesgueExponent& o) const {
  if (inf_) return false;
  if (o.inf_) return true;
  return v_ < o.v_;
}

LebesgueExponent conjugate(const LebesgueExponent& p) {
  Rational one = Rational::integer(1);
  if (!p.is_infinity() && p.value() <= one) return LebesgueExponent::infinity();
  if (p.is_infinity()) return LebesgueExponent(one);
  // p' = p / (p - 1)
  Rational v = p.value();
  return LebesgueExponent(Rational(v.num, v.num - v.den));
}

ExponentFunctionals exponent_functionals(const LebesgueExponent& p, int n) {
  if (n <= 0) throw config_error("exponent_functionals: dimension must be positive");
  Rational half_n(n, 2);
  Rational n_over_p = Rational::integer(n) * p.reciprocal();
  ExponentFunctionals out;
  out.alpha = half_n - rat_min(half_n, n_over_p);
  out.beta = half_n - rat_max(half_n, n_over_p);
  out.theta = half_n - out.beta;
  return out;
}

void ExponentProfile::validate() const {
  if (N < 1) throw config_error("ExponentProfile: N must be >= 1");
  if (n < 1) throw config_error("ExponentProfile: n must be >= 1");
  if (p_j.size() != static_cast<std::size_t>(N))
    throw config_error("ExponentProfile: p_j must have N entries");
  if (!q_j.empty() && q_j.size() != static_cast<std::size_t>(N))
    throw config_error("ExponentProfile: q_j must be empty or have N entries");
  if (s_j.size() != static_cast<std::size_t>(N))
    throw config_error("ExponentProfile: s_j must have N entries");
}

ExponentProfile ExponentProfile::parse_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("profile: invalid JSON: ") + e.what());
  }
  ExponentProfile out;
  try {
    out.N = j.at("N").get<int>();
    out.n = j.at("n").get<int>();
    auto exp_of = [](const nlohmann::json& v) {
      if (v.is_string()) return LebesgueExponent::parse(v.get<std::string>());
      if (v.is_number_integer()) return LebesgueExponent::from_int(v.get<std::int64_t>());
      throw config_error("profile: exponents must be rational strings or integers");
    };
    out.p = exp_of(j.at("p"));
    out.q = j.contains("q") ? exp_of(j.at("q")) : out.p;
    for (const auto& v : j.at("p_j")) out.p_j.push_back(exp_of(v));
    if (j.contains("q_j"))
      for (const auto& v : j.at("q_j")) out.q_j.push_back(exp_of(v));
    out.s = j.value("s", 0.0);
    if (j.contains("s_j"))
      for (const auto& v : j.at("s_j")) out.s_j.push_back(v.get<double>());
    else
      out.s_j.assign(out.N, 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("profile: ") + e.what());
  }
  out.validate();
  return out;
}

CriticalOrder critical_order(const ExponentProfile& profile) {
  profile.validate();
  int n = profile.n;
  Rational half_n(n, 2);
  Rational n_over_p = Rational::integer(n) * profile.p.reciprocal();
  Rational acc = rat_min(n_over_p, half_n);
  for (const auto& pj : profile.p_j) {
    Rational n_over_pj = Rational::integer(n) * pj.reciprocal();
    acc = acc - rat_max(n_over_pj, half_n);
  }
  double smooth = -profile.s;
  for (double sj : profile.s_j) smooth += sj;
  return CriticalOrder{acc, smooth};
}

SmoothnessCheck check_smoothness_conditions(const ExponentProfile& profile) {
  profile.validate();
  SmoothnessCheck out;
  out.sufficient = true;
  out.necessary = true;
  for (int j = 0; j < profile.N; ++j) {
    double theta_j = exponent_functionals(profile.p_j[j], profile.n).theta.value();
    double margin = theta_j - profile.s_j[j];
    out.source_margins.push_back(margin);
    if (!(margin > 0)) out.sufficient = false;
    if (margin < 0) out.necessary = false;
  }
  double theta_conj = exponent_functionals(conjugate(profile.p), profile.n).theta.value();
  out.target_margin = profile.s + theta_conj;
  if (!(out.target_margin > 0)) out.sufficient = false;
  if (out.target_margin < 0) out.necessary = false;
  return out;
}

}  // namespace mlpo
