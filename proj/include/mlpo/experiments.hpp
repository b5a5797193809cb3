#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlpo/exponents.hpp"
#include "mlpo/extremal.hpp"
#include "mlpo/norms.hpp"
#include "mlpo/op.hpp"
#include "mlpo/symbol.hpp"
#include "mlpo/windows.hpp"

// Measurement harness.  Each experiment measures a dyadic growth or decay
// rate (or a uniform-boundedness ratio) and compares it against the rate
// predicted by the exponent formulas.  Results are packaged as
// ExperimentReports: per-level rows, a least-squares slope fit, the predicted
// slope, and a verdict.  Reports are deterministic functions of their
// configuration (one master seed, named substreams) and serialize to CSV
// (data) and JSON (metadata + verdicts) byte-identically across reruns.
namespace mlpo {

// --- slope fitting -----------------------------------------------------------

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;  // in log2 units
};

// Least squares of log2(value) against level.  Requires >= 3 pairs, at least
// two distinct levels, and strictly positive values (a nonpositive value
// throws compute_error naming the offending level).
SlopeFit fit_slope(std::span<const std::pair<double, double>> pairs);

// --- reports -----------------------------------------------------------------

struct ReportRow {
  double level = 0.0;     // shell level, band index, or log2 of a radius
  double measured = 0.0;
  double theory = 0.0;    // model value at this level (0 when not applicable)
};

struct ReportCheck {
  std::string name;
  double value = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  std::string name;
  // Echo of the resolved configuration, in insertion order.
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<ReportRow> rows;

  double fitted_slope = 0.0;
  double theory_slope = 0.0;
  double residual = 0.0;       // max |log2 residual| of the measured fit
  double tolerance = 0.0;      // |fitted - theory| budget
  double residual_cap = 1.0;   // residual budget
  // Ratio/stability reports carry their conclusions in `checks` only.
  bool slope_test = true;
  std::vector<ReportCheck> checks;
  bool verdict = false;

  void add_param(const std::string& key, const std::string& value);
  void add_param(const std::string& key, double value);
  void add_param(const std::string& key, int value);
  void add_param(const std::string& key, std::uint64_t value);
  void add_check(const std::string& name, double value, bool pass);

  // Fits rows, fills the theory column with the theory-slope model anchored
  // at the first row, and sets fitted_slope/residual.
  void fit_rows();
  // verdict := (slope test, when enabled) AND every named check.
  void finish();

  std::string csv() const;            // level,measured,theory,log2_measured
  std::string metadata_json() const;  // mirrors this struct
};

// Convenience: the all-2 profile (p = q = p_j = q_j = 2, s = s_j = 0).
ExponentProfile l2_profile(int n, int N);

// Appends the profile fields to a report's parameter echo.
void echo_profile(ExperimentReport& report, const ExponentProfile& profile);

// --- sharpness of the target smoothness s ------------------------------------
//
// Combinatorial mode: totals of the constrained lattice sums
//   S_ell = sum_{D_ell} <MU>^m prod_j |mu_j|^{-b_j}
// over the sum-zero tuple sets, whose growth exponent is
//   m - sum_j b_j + (N-1) n.
// Full-pipeline mode (n = 1, N = 2): the same construction driven end to end
// through the operator: a lattice symbol with unimodular chirp coefficients,
// band-filtered oscillatory inputs, and the Besov-norm ratio
//   ||T(f_1,f_2)||_{B^s_{p,q}} / prod_j ||f_j||_{B^{s_j}_{p_j,q_j}},
// whose slope must match the coefficient-sum slope measured at the same
// damping.

enum class SharpnessMode { combinatorial, full_pipeline };

struct SharpnessSConfig {
  ExponentProfile profile;          // validated; needs 1 < p_j < infinity
  std::optional<double> m;          // symbol order; default: critical order
  std::vector<double> a;            // chirp exponents, default 0.5 per slot
  std::vector<double> b;            // coefficient decay, default threshold + margin
  double b_margin = 0.01;

  int ell_lo = 6;
  int ell_hi = 12;
  double delta = 0.5;
  int gap = -1;                     // low-shell offset; -1 selects the default
  std::vector<double> epsilon_ladder;  // default 2^-6 .. 2^-10 (monotonicity check)
  double tolerance = 0.15;
  double residual_cap = 1.0;

  // Full-pipeline mode.
  int pipeline_ell_lo = 5;
  int pipeline_ell_hi = 8;
  double pipeline_delta = 0.05;
  int pipeline_points = 1 << 14;
  double pipeline_scale = 16.0;     // grid period 2 pi T
  double pipeline_epsilon = 0x1p-14;
  double pipeline_tolerance = 0.3;

  std::uint64_t seed = 20260819;
  int jobs = 1;
};

ExperimentReport run_sharpness_s(const SharpnessSConfig& config, SharpnessMode mode);

// --- sharpness of the source smoothness s_j -----------------------------------
//
// Free-sum tuple sets: per-sum-frequency coefficients d_nu and their l2 size,
// whose growth exponent is m - sum_{j>=2} b_j + (N-2) n + n/2.  The optional
// Monte-Carlo mode cross-checks the l2 size against the average L^p norm of
// the randomized trigonometric sum sum_nu r_nu d_nu e^{i nu x} on [-1, 1].

struct SharpnessSjConfig {
  ExponentProfile profile;          // validated; needs p <= 2 (the l2 branch)
  std::optional<double> m;
  std::vector<double> a;            // size N-1 (stored slots), default 0.5
  std::vector<double> b;            // size N-1, default threshold + margin
  double b_margin = 0.01;

  int ell_lo = 6;
  int ell_hi = 12;
  double delta = 0.5;
  int gap = -1;
  double tolerance = 0.15;
  double residual_cap = 1.0;

  bool khintchine = false;          // Monte-Carlo cross-check (n = 1 only)
  int khintchine_ell = 7;
  int khintchine_samples = 200;
  std::vector<LebesgueExponent> khintchine_p;  // default {1, 2, 4}
  int khintchine_points = 2048;     // quadrature points on [-1, 1]
  double khintchine_lo = 0.3;       // accepted ratio bracket
  double khintchine_hi = 3.0;

  std::uint64_t seed = 20260819;
  int jobs = 1;
};

ExperimentReport run_sharpness_sj(const SharpnessSjConfig& config);

// --- lattice-product ratio study ----------------------------------------------
//
// For shell systems Lambda_j = {R_j/2 <= |nu| <= R_j} and random band-limited
// f_j, compares
//   LHS = || || sum_{nu_1+...+nu_N = tau} prod_j |Box_{nu_j} f_j| ||_{l^r_tau} ||_{L^{p0}}
// against the product bound
//   RHS = min{R_2^{n/2}, R^{n/2}} prod_{j>=3} R_j^{n/2}
//         prod_j R_j^{-beta(p_j)} ||f_j||_{h^{p_j}}        (r = 2)
// with an extra R^{n/2} on the RHS in l1 mode (r = 1), where R = N max_j R_j
// bounds the output lattice.  The max ratio per R must stay level: |slope|
// below tolerance.  Returns one report per mode: {l2, l1}.

struct KeypropConfig {
  int n = 1;                        // current implementation: n = 1
  int N = 2;
  std::vector<LebesgueExponent> p;  // per-slot exponents; 1/p0 = sum 1/p_j
  std::vector<double> r_scale;      // per-slot multipliers: R_j = r_scale[j] * R
  std::vector<int> R_values = {4, 8, 16, 32};
  int trials = 3;
  int points_per_dim = 1 << 12;
  double scale_T = 4.0;
  double tolerance = 0.15;
  double residual_cap = 1.0;
  std::uint64_t seed = 20260819;
  int jobs = 1;
};

std::vector<ExperimentReport> run_keyprop_ratio(const KeypropConfig& config);

// --- coefficient band decay -----------------------------------------------------
//
// First report: x-band decay of the localized-symbol coefficient Q for one
// (Nu, Mu) pair (slope held against -L).  Second report (optional): h^p decay
// in the x-band index ell0 of the band-restricted remainder
//   R(x) = sum_{Nu : sum nu_j in Lambda_{k,ell0}} [psi_{ell0}(D) Q_{Nu,Mu}](x)
//          prod_j Box_{nu_j}[psi_{ell_j}(D) f_j](x + mu_j),
// where Lambda_{k,ell0} keeps the box sums whose spectral reach touches the
// output band k.  Its slope must be steeper than the configured bound.

struct BandDecayConfig {
  TestSymbolKind symbol_kind = TestSymbolKind::oscillatory_x;
  // Default: N = 2, n = 1, cosine-series x factor (band sums decay like the
  // series tail, slope -(cosine_power - 1)).
  TestSymbolParams symbol{
      .space_factor = TestSymbolParams::SpaceFactor::cosine_series};
  std::vector<LatticePoint> nu;     // probed box; default {(3,0), (-1,0)}
  std::vector<LatticePoint> mu;     // probed mode; default {(1,0), (2,0)}
  int order = 2;                    // integration-by-parts order M
  int quad_points = 64;
  int level_lo = 2;
  int level_hi = 6;
  std::vector<double> reference_orders = {3.0};  // -L targets for the Q slope
  int x_points = 1 << 10;
  double x_scale = 4.0;
  double q_tolerance = 0.2;
  double residual_cap = 1.0;

  bool with_remainder = true;
  std::vector<int> input_bands = {4, 4};  // ell_j
  int output_band = 5;                    // k
  LebesgueExponent remainder_p = LebesgueExponent::from_int(2);
  double remainder_slope_max = -2.0;      // require slope < this

  std::uint64_t seed = 20260819;
  int jobs = 1;
};

std::vector<ExperimentReport> run_band_decay(const BandDecayConfig& config);

// --- embedding battery -----------------------------------------------------------
//
// Sequence-space monotonicity (exact, counted violations) plus one report per
// function-space embedding: the max (to-norm)/(from-norm) ratio over random
// single-band functions at band levels band_lo..band_hi.  Verdict per report:
// the per-band constants stay within a factor `stability_factor` of each
// other (and zero violations for the exact sequence inequality).

struct EmbeddingConfig {
  int n = 1;                        // current implementation: n = 1
  int band_lo = 2;
  int band_hi = 8;
  int trials_per_band = 4;
  int sequence_cases = 1000;
  int sequence_length = 12;
  int points_per_dim = 1 << 13;
  double scale_T = 4.0;
  double stability_factor = 5.0;
  std::uint64_t seed = 20260819;
  int jobs = 1;
};

std::vector<ExperimentReport> run_embedding_suite(const EmbeddingConfig& config);

// --- oscillatory-sum norm growth ---------------------------------------------
//
// L^p norms of the damped oscillatory sums along a dyadic damping ladder.
// Above the threshold decay exponent the norms must be nearly flat per
// halving; below it they must keep growing.  One report per (p, regime).

// Growth per halving is the mean rate across the ladder,
// (last/first)^(1/rungs) - 1: sup-type norms fill in new peaks unevenly
// between rungs, so single-rung ratios are noisy while the mean is stable.
struct WaingerContrastConfig {
  int n = 1;
  double a = 0.75;
  std::vector<LebesgueExponent> p_values;  // default {4, 64}
  double above_margin = 0.25;              // b = threshold + margin
  double below_margin = 0.3;               // b = threshold - margin
  std::vector<double> epsilon_ladder;      // default 2^-6 .. 2^-10, halving
  int V_max = 6000;
  int points_per_dim = 1 << 15;
  double scale_T = 1.0;
  double flat_growth_max = 0.05;   // above threshold: mean growth per halving below this
  double rising_growth_min = 0.20; // below threshold: mean growth per halving above this
  std::uint64_t seed = 20260819;
  int jobs = 1;
};

std::vector<ExperimentReport> run_wainger_contrast(const WaingerContrastConfig& config);

}  // namespace mlpo
