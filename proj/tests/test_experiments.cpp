#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "mlpo/experiments.hpp"
#include "mlpo/util.hpp"

using namespace mlpo;

TEST_SUITE("experiments") {

TEST_CASE("slope fitting recovers exact dyadic laws") {
  std::vector<std::pair<double, double>> pairs;
  for (int l = 3; l <= 8; ++l)
    pairs.emplace_back(l, std::exp2(0.5 * l + 1.0));
  SlopeFit fit = fit_slope(pairs);
  CHECK(fit.slope == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.max_abs_residual < 1e-12);

  std::vector<std::pair<double, double>> flat{{1.0, 3.0}, {2.0, 3.0}, {5.0, 3.0}};
  SlopeFit zero = fit_slope(flat);
  CHECK(zero.slope == doctest::Approx(0.0));
  CHECK(zero.intercept == doctest::Approx(std::log2(3.0)));

  // Residual reports the worst log2 deviation from the fitted line.
  std::vector<std::pair<double, double>> bent{{1.0, 2.0}, {2.0, 4.0}, {3.0, 16.0}};
  CHECK(fit_slope(bent).max_abs_residual > 0.3);
}

TEST_CASE("slope fitting rejects degenerate inputs") {
  std::vector<std::pair<double, double>> two{{1.0, 2.0}, {2.0, 4.0}};
  CHECK_THROWS_AS(fit_slope(two), config_error);
  std::vector<std::pair<double, double>> same{{2.0, 1.0}, {2.0, 2.0}, {2.0, 4.0}};
  CHECK_THROWS_AS(fit_slope(same), config_error);
  std::vector<std::pair<double, double>> zero{{1.0, 2.0}, {2.0, 0.0}, {3.0, 4.0}};
  CHECK_THROWS_AS(fit_slope(zero), compute_error);
}

TEST_CASE("the all-two profile has the expected shape and critical order") {
  ExponentProfile profile = l2_profile(2, 3);
  CHECK(profile.N == 3);
  CHECK(profile.n == 2);
  REQUIRE(profile.p_j.size() == 3);
  for (const LebesgueExponent& e : profile.p_j) CHECK(e.to_double() == 2.0);
  CHECK(profile.s == 0.0);
  for (double sj : profile.s_j) CHECK(sj == 0.0);
  profile.validate();
  // min(n/p, n/2) - sum_j max(n/p_j, n/2) collapses to -(N-1) n/2 here.
  CHECK(critical_order(profile).value() == -2.0);
}

TEST_CASE("reports serialize rows and fits to stable text") {
  ExperimentReport report;
  report.name = "demo";
  report.theory_slope = 1.0;
  report.rows = {{1.0, 2.0, 0.0}, {2.0, 4.0, 0.0}, {3.0, 8.0, 0.0}};
  report.fit_rows();
  report.finish();
  CHECK(report.fitted_slope == 1.0);
  CHECK(report.residual == 0.0);
  CHECK(report.verdict);
  CHECK(report.csv() ==
        "level,measured,theory,log2_measured\n"
        "1,2,2,1\n"
        "2,4,4,2\n"
        "3,8,8,3\n");
  std::string meta = report.metadata_json();
  CHECK(meta.find("\"name\"") != std::string::npos);
  CHECK(meta.find("\"verdict\"") != std::string::npos);
  CHECK(meta.find("pass") != std::string::npos);

  // A failed slope test flips the verdict...
  ExperimentReport off = report;
  off.theory_slope = 2.0;
  off.tolerance = 0.1;
  off.fit_rows();
  off.finish();
  CHECK(!off.verdict);
  // ...and so does any failed named check, even with a good slope.
  ExperimentReport checked = report;
  checked.add_check("sanity", 0.0, false);
  checked.fit_rows();
  checked.finish();
  CHECK(!checked.verdict);
}

TEST_CASE("unit-weight lattice counting grows at the predicted rate") {
  SharpnessSConfig config;
  config.profile = l2_profile(1, 2);
  config.m = 0.0;
  config.b = {0.0, 0.0};
  config.ell_lo = 5;
  config.ell_hi = 9;
  ExperimentReport report = run_sharpness_s(config, SharpnessMode::combinatorial);
  REQUIRE(report.rows.size() == 5);
  CHECK(report.theory_slope == 1.0);  // m - sum b + (N-1) n
  CHECK(std::abs(report.fitted_slope - 1.0) < 0.15);
  CHECK(report.verdict);
  CHECK(!report.parameters.empty());
  // Identical configurations serialize byte-identically.
  ExperimentReport again = run_sharpness_s(config, SharpnessMode::combinatorial);
  CHECK(report.csv() == again.csv());
  CHECK(report.metadata_json() == again.metadata_json());
}

TEST_CASE("per-frequency coefficient sizes grow at the predicted rate") {
  SharpnessSjConfig config;
  config.profile = l2_profile(1, 2);
  config.m = 0.0;
  config.b = {0.0};
  config.ell_lo = 6;
  config.ell_hi = 9;
  ExperimentReport report = run_sharpness_sj(config);
  REQUIRE(report.rows.size() == 4);
  CHECK(report.theory_slope == 0.5);  // m - sum b + (N-2) n + n/2
  CHECK(std::abs(report.fitted_slope - 0.5) < 0.15);
  CHECK(report.verdict);
  ExperimentReport again = run_sharpness_sj(config);
  CHECK(report.metadata_json() == again.metadata_json());
}

}  // TEST_SUITE
