#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mlpo/grid.hpp"
#include "mlpo/symbol.hpp"
#include "mlpo/windows.hpp"

// Operator application T_sigma(f_1, ..., f_N) on the discrete torus, and the
// box-decomposition expansion of the operator: localized symbol pieces, their
// Fourier coefficient tables P/Q, the translated-projection form of T_sigma,
// and the x-band decay measurements for those coefficients.
namespace mlpo {

struct ApplyOptions {
  // Bins with |hat f| <= bin_threshold * max|hat f| count as inactive
  // (0 keeps exactly the nonzero bins).
  double bin_threshold = 0.0;
  // Output spectral mass falling outside the representable band, relative to
  // the in-band peak, above which application refuses (aliasing).
  double alias_tolerance = 1e-9;
  // Budget on symbol evaluations (the active-bin tuple count, times the
  // x-grid size on the non-factorized path).
  std::uint64_t cost_budget = 400'000'000ull;
};

// Quadrature of the defining frequency sum on the shared grid of the inputs:
//   T(f_1..f_N)(x) = (2 pi T)^{-Nn} sum_{nu_1..nu_N} e^{i x . (nu_1+...+nu_N)}
//                    sigma(x, nu_1..nu_N) prod_j hat f_j(nu_j),
// restricted to the inputs' active bins. Symbols with a frequency core run in
// grouped multiplier form (one inverse FFT), with identical values; a space
// factor multiplies the result pointwise. Returns a space-domain function.
GridFunction apply_direct(const Symbol& sigma, std::span<const GridFunction> inputs,
                          const ApplyOptions& options = {});

struct DecompositionPlan {
  std::vector<std::vector<LatticePoint>> active;  // box centers, one list per slot
  UniformWindow phi;        // unit box window whose integer translates sum to 1
  UniformWindow phi_tilde;  // flat companion, == 1 on supp phi
  int mode_radius = 8;      // Fourier modes kept per slot axis: |mu_j|_inf <= R
  int order = 2;            // integration-by-parts order M
  int quad_points = 64;     // coefficient-quadrature points per axis (power of 2)
  std::uint64_t cost_budget = 400'000'000ull;

  void validate(int n, int N) const;
};

// Plan whose active sets cover the inputs' occupied frequency bins, padded so
// the box partition sums to 1 on every occupied bin.
DecompositionPlan make_plan(const Symbol& sigma, std::span<const GridFunction> inputs,
                            int mode_radius = 8, int order = 2);

// Localized pieces sigma * prod_j phi(xi_j - nu_j), one Symbol per active box
// tuple in lexicographic order, each carrying its piece_center.
std::vector<Symbol> decompose_symbol(const Symbol& sigma, const DecompositionPlan& plan);

struct CoefficientTable {
  std::vector<LatticePoint> nu;  // box center, one entry per slot
  std::vector<LatticePoint> mu;  // Fourier mode, one entry per slot
  int order = 0;                 // M
  cd P{0.0, 0.0};  // (2 pi)^{-Nn} int e^{-i Mu.Y} piece(Y) dY over the box
  cd Q{0.0, 0.0};  // <Mu>^{2 order} * P, exactly
};

// Fourier coefficients of one decomposition piece over its box, for all modes
// |mu_j|_inf <= plan.mode_radius, in lexicographic order. The piece must carry
// piece_center and a frequency core; a space factor, if any, scales every
// entry uniformly and is not folded in.
std::vector<CoefficientTable> symbol_fourier_coefficients(const Symbol& piece,
                                                          const DecompositionPlan& plan);

// The translated-projection expansion
//   T(f..)(x) = sum_Mu <Mu>^{-2M} sum_Nu Q_{Nu,Mu}(x)
//               prod_j (phi_tilde(D - nu_j) f_j)(x + mu_j)
// truncated to the plan's mode radius; kept in the exact form
// sum_{Nu,Mu} P_{Nu,Mu} prod_j ... so no reweighting error enters. Requires a
// symbol with a frequency core (a space factor is applied at the end).
GridFunction apply_via_expansion(const Symbol& sigma, std::span<const GridFunction> inputs,
                                 const DecompositionPlan& plan);

struct BandDecayRow {
  int level = 0;         // x-band index
  double value = 0.0;    // sup over the x-grid of the band-projected |Q|
  bool skipped = false;  // all-zero band
};

struct BandDecayReport {
  std::vector<BandDecayRow> rows;
  double slope = 0.0;  // least-squares slope of log2 value vs level
  bool slope_valid = false;
  std::vector<double> reference_orders;  // the -L values the slope is held against
};

// Band decay in x of the coefficient Q_{Nu,Mu}(x) for one (Nu, Mu) pair,
// measured on the given x-grid with the given dyadic family. Factorized
// symbols evaluate the x-profile exactly; a general symbol falls back to
// per-x quadrature under the plan's cost budget.
BandDecayReport coefficient_band_decay(const Symbol& sigma,
                                       std::span<const LatticePoint> nu,
                                       std::span<const LatticePoint> mu,
                                       const DecompositionPlan& plan,
                                       const WindowFamily& family, const GridSpec& x_spec,
                                       int level_lo, int level_hi,
                                       std::span<const double> reference_orders);

// Margin exponent d such that a level-ell0 x-band times N unit-box
// projections has spectrum inside sum nu_j + [-2^{ell0+d}, 2^{ell0+d}]^n.
// Computed from N and checked at runtime against the convolution supports.
int support_margin_exponent(int N);

struct JointSupportCheck {
  double radius = 0.0;       // 2^{level+d}
  double max_inside = 0.0;   // spectral peak within the box around sum nu_j
  double max_outside = 0.0;  // spectral peak beyond it
  bool pass = false;
};

// Bin-by-bin containment of the spectrum of q_band * prod_j projected_j.
JointSupportCheck joint_support_check(const GridFunction& q_band,
                                      std::span<const GridFunction> projected,
                                      std::span<const LatticePoint> nu, int level,
                                      double tolerance);

}  // namespace mlpo
