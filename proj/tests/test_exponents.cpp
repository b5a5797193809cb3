#include <doctest.h>

#include "mlpo/exponents.hpp"

using namespace mlpo;

namespace {

ExponentProfile all_two_profile(int n, int N) {
  ExponentProfile profile;
  profile.N = N;
  profile.n = n;
  profile.p = LebesgueExponent::from_int(2);
  profile.q = LebesgueExponent::from_int(2);
  profile.p_j.assign(N, LebesgueExponent::from_int(2));
  profile.q_j.assign(N, LebesgueExponent::from_int(2));
  profile.s = 0.0;
  profile.s_j.assign(N, 0.0);
  return profile;
}

}  // namespace

TEST_SUITE("exponents") {

TEST_CASE("rational arithmetic is exact and reduced") {
  Rational half{1, 2}, third{1, 3};
  CHECK((half + third) == Rational(5, 6));
  CHECK((half - third) == Rational(1, 6));
  CHECK((half * third) == Rational(1, 6));
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(third < half);
  CHECK(rat_min(half, third) == third);
  CHECK(rat_max(half, third) == half);
  CHECK(half.value() == 0.5);
  CHECK(Rational(5, 6).str() == "5/6");
  CHECK(Rational::integer(7).str() == "7");
  CHECK_THROWS_AS(Rational(1, 0), config_error);
}

TEST_CASE("exponent parsing accepts integers, fractions, decimals, and inf") {
  CHECK(LebesgueExponent::parse("inf").is_infinity());
  CHECK(LebesgueExponent::parse("infinity").is_infinity());
  CHECK(LebesgueExponent::parse("2") == LebesgueExponent::from_int(2));
  CHECK(LebesgueExponent::parse("4/3") == LebesgueExponent(Rational(4, 3)));
  CHECK(LebesgueExponent::parse("0.5") == LebesgueExponent(Rational(1, 2)));
  CHECK(LebesgueExponent::parse("1.25") == LebesgueExponent(Rational(5, 4)));
  CHECK_THROWS_AS(LebesgueExponent::parse("zero"), config_error);
  CHECK_THROWS_AS(LebesgueExponent::parse("0"), config_error);
  CHECK_THROWS_AS(LebesgueExponent::parse("-2"), config_error);
  CHECK_THROWS_AS(LebesgueExponent::parse("1/0"), config_error);
}

TEST_CASE("exponent accessors") {
  LebesgueExponent inf;
  CHECK(inf.is_infinity());
  CHECK(inf.reciprocal() == Rational(0, 1));
  CHECK_THROWS_AS(inf.value(), config_error);
  CHECK(inf.str() == "inf");

  LebesgueExponent p = LebesgueExponent::parse("4/3");
  CHECK(p.reciprocal() == Rational(3, 4));
  CHECK(p.to_double() == doctest::Approx(4.0 / 3.0));
  CHECK(p.str() == "4/3");
  CHECK(LebesgueExponent::from_int(1) < p);
  CHECK(p < inf);
}

TEST_CASE("conjugate exponent covers the quasi-Banach range") {
  CHECK(conjugate(LebesgueExponent::from_int(2)) == LebesgueExponent::from_int(2));
  CHECK(conjugate(LebesgueExponent::from_int(1)).is_infinity());
  CHECK(conjugate(LebesgueExponent::parse("1/2")).is_infinity());
  CHECK(conjugate(LebesgueExponent::infinity()) == LebesgueExponent::from_int(1));
  CHECK(conjugate(LebesgueExponent::parse("4/3")) == LebesgueExponent::from_int(4));
  CHECK(conjugate(LebesgueExponent::from_int(4)) == LebesgueExponent::parse("4/3"));
}

TEST_CASE("alpha, beta, theta at the standard corners") {
  auto f = [](const char* p, int n) {
    return exponent_functionals(LebesgueExponent::parse(p), n);
  };
  // n = 1
  CHECK(f("inf", 1).alpha == Rational(1, 2));
  CHECK(f("1", 1).alpha == Rational(0, 1));
  CHECK(f("2", 1).alpha == Rational(0, 1));
  CHECK(f("4", 1).alpha == Rational(1, 4));
  CHECK(f("1", 1).beta == Rational(-1, 2));
  CHECK(f("2", 1).beta == Rational(0, 1));
  CHECK(f("4", 1).beta == Rational(0, 1));
  CHECK(f("inf", 1).beta == Rational(0, 1));
  CHECK(f("1", 1).theta == Rational(1, 1));
  CHECK(f("inf", 1).theta == Rational(1, 2));
  // theta = n/2 - beta always
  for (const char* p : {"1", "4/3", "2", "3", "inf"}) {
    ExponentFunctionals v = f(p, 1);
    CHECK(v.theta == Rational(1, 2) - v.beta);
  }
  // n = 2
  CHECK(f("inf", 2).alpha == Rational(1, 1));
  CHECK(f("1", 2).beta == Rational(-1, 1));
  CHECK(f("1/2", 2).beta == Rational(-3, 1));
}

TEST_CASE("critical order of the all-2 profile is -n/2") {
  for (int n : {1, 2, 3}) {
    CriticalOrder order = critical_order(all_two_profile(n, 2));
    CHECK(order.exponent_part == Rational(-n, 2));
    CHECK(order.smoothness_part == 0.0);
    CHECK(order.value() == -0.5 * n);
  }
}

TEST_CASE("critical order splits exponent and smoothness parts") {
  // p = 1 target, two p_j = 4 sources, n = 1:
  //   min(1, 1/2) - 2 * max(1/4, 1/2) = 1/2 - 1 = -1/2.
  ExponentProfile profile = all_two_profile(1, 2);
  profile.p = LebesgueExponent::from_int(1);
  profile.p_j = {LebesgueExponent::from_int(4), LebesgueExponent::from_int(4)};
  profile.s = 1.0;
  profile.s_j = {0.3, 0.4};
  CriticalOrder order = critical_order(profile);
  CHECK(order.exponent_part == Rational(-1, 2));
  CHECK(order.smoothness_part == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(order.value() == doctest::Approx(-0.8).epsilon(1e-15));
}

TEST_CASE("smoothness window margins") {
  ExponentProfile profile = all_two_profile(1, 2);
  SmoothnessCheck check = check_smoothness_conditions(profile);
  CHECK(check.sufficient);
  CHECK(check.necessary);
  REQUIRE(check.source_margins.size() == 2);
  CHECK(check.source_margins[0] == doctest::Approx(0.5));
  CHECK(check.target_margin == doctest::Approx(0.5));

  // At the boundary the strict version fails while the weak one holds.
  profile.s_j = {0.5, 0.0};
  check = check_smoothness_conditions(profile);
  CHECK_FALSE(check.sufficient);
  CHECK(check.necessary);

  profile.s_j = {0.6, 0.0};
  check = check_smoothness_conditions(profile);
  CHECK_FALSE(check.sufficient);
  CHECK_FALSE(check.necessary);
}

TEST_CASE("profile JSON parsing round-trips and validates") {
  const char* text = R"({
    "N": 2, "n": 1,
    "p": "2", "q": "2",
    "p_j": ["2", "4/3"], "q_j": [2, "inf"],
    "s": 0.25, "s_j": [0.1, -0.2]
  })";
  ExponentProfile profile = ExponentProfile::parse_json(text);
  CHECK(profile.N == 2);
  CHECK(profile.p_j[1] == LebesgueExponent::parse("4/3"));
  CHECK(profile.q_j[1].is_infinity());
  CHECK(profile.s == doctest::Approx(0.25));
  CHECK(profile.s_j[1] == doctest::Approx(-0.2));

  CHECK_THROWS_AS(ExponentProfile::parse_json("{\"N\": 2, \"p_j\": [\"2\"]}"),
                  config_error);
  CHECK_THROWS_AS(ExponentProfile::parse_json("not json"), config_error);
}

TEST_CASE("profile validation rejects malformed shapes") {
  ExponentProfile profile = all_two_profile(1, 2);
  profile.p_j.pop_back();
  CHECK_THROWS_AS(profile.validate(), config_error);

  profile = all_two_profile(1, 2);
  profile.s_j.push_back(0.0);
  CHECK_THROWS_AS(profile.validate(), config_error);

  profile = all_two_profile(1, 2);
  profile.q_j.pop_back();
  CHECK_THROWS_AS(profile.validate(), config_error);

  // q_j may be left empty entirely.
  profile = all_two_profile(1, 2);
  profile.q_j.clear();
  CHECK_NOTHROW(profile.validate());
}

}  // TEST_SUITE
