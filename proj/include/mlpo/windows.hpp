#pragma once
// Window construction: dyadic (Littlewood-Paley) families and uniform
// lattice windows, all built from one C-infinity compactly supported
// transition profile, plus the verification battery (partition sums,
// support/plateau exactness, derivative bounds, kernel L1 stability).
//
// Families:
//   generic_lp     : supp w_0 in {|xi|<=2}, supp w_k in {2^{k-1}<=|xi|<=2^{k+1}},
//                    sum_k w_k == 1 (telescoping, exact), w_k(xi)=w_1(2^{-(k-1)}xi).
//   sharp_lp       : supp w_l in {2^{l-3/4}<=|xi|<=2^{l+3/4}}, == 1 on
//                    {2^{l-1/4}<=|xi|<=2^{l+1/4}} (l>=1); w_0 supported in
//                    {|xi|<=2^{3/4}}, == 1 on {|xi|<=2^{1/4}}; partition of unity.
//   sharp_lp_tilde : fattened plateau indicators, supp in the sharp_lp plateau,
//                    == 1 on {2^{l-1/8}<=|xi|<=2^{l+1/8}}; NOT a partition.
//
// Uniform windows (tensor products of a 1-D profile):
//   phi / s3        : supp in [-1,1]^n, integer translates sum to 1 exactly.
//   phi_tilde / s3  : supp in [-3,3]^n, == 1 on [-1,1]^n, values in [0,1].
//   phi / s4        : supp in [-1/4,1/4]^n, scaled so |F^{-1} phi| >= 1 on [-1,1]^n.
//   phi_tilde / s4  : supp in [-1/2,1/2]^n, == 1 on [-1/4,1/4]^n.
//   kappa_wiener    : supp in [-1,1]^n, == 1 on [-1/2,1/2]^n, so the lattice
//                     translate sum is >= 1 everywhere.

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "mlpo/grid.hpp"
#include "mlpo/util.hpp"

namespace mlpo {

// C-infinity step: 0 for t<=0, 1 for t>=1, strictly increasing between.
double smooth_step(double t);

enum class FamilyKind { generic_lp, sharp_lp, sharp_lp_tilde };

struct DyadicWindow {
  int k = 0;
  std::function<double(double)> radial;  // evaluates the profile at r = |xi|
  double support_inner = 0.0;            // exact zero outside [inner, outer]
  double support_outer = 0.0;
  double plateau_inner = -1.0;  // exact one inside [inner, outer]; <0 if none
  double plateau_outer = -1.0;

  double eval(const double* xi, int n) const;
  SpectrumSampler sampler(int n) const;
};

struct WindowFamily {
  FamilyKind kind = FamilyKind::generic_lp;
  int K = 0;
  std::vector<DyadicWindow> windows;  // indices 0..K

  // Radius inside which the family provably sums to 1 (partition kinds only).
  double coverage_radius() const;
};

// Build a family with levels 0..K. If `spec` is given, K must keep the level-K
// window inside the representable band (configuration error otherwise).
WindowFamily make_lp_family(FamilyKind kind, int K, const GridSpec* spec = nullptr);

enum class UniformKind { phi, phi_tilde, kappa_wiener };
enum class UniformVariant { s3, s4 };

struct UniformWindow {
  UniformKind kind = UniformKind::phi;
  UniformVariant variant = UniformVariant::s3;
  std::function<double(double)> axis_profile;  // per-axis factor
  double half_width = 1.0;                     // exact per-axis support radius
  double plateau_half_width = -1.0;            // per-axis ==1 radius; <0 if none

  double eval_centered(const double* xi, int n) const;          // window(xi)
  double eval_shifted(const double* xi, const int* mu, int n) const;  // window(xi-mu)
  // Sampler of window(. - mu) for multiplier use.
  SpectrumSampler sampler(int n, const int* mu = nullptr) const;
};

UniformWindow make_uniform_window(UniformKind kind, UniformVariant variant);

// ---------------------------------------------------------------------------
// Projection operators.

// Dyadic band projection: multiplier action of the level-k window.
GridFunction band_project(int k, const WindowFamily& family, const GridFunction& f);

// Uniform box projection: multiplier action of kappa(. - mu) for an integer
// lattice point mu (unused axes zero).  kappa must have a finite support
// radius so the projection stays local in frequency.
GridFunction box_project(const std::array<int, 2>& mu, const SpectrumSampler& kappa,
                         const GridFunction& f);

// ---------------------------------------------------------------------------
// Verification battery.

struct VerificationCheck {
  std::string name;
  double value = 0.0;      // measured deviation / ratio / bound
  double threshold = 0.0;  // pass iff value <= threshold (or >= for lower_bound)
  bool lower_bound = false;
  bool pass = false;
};

struct VerificationReport {
  std::vector<VerificationCheck> checks;
  bool all_pass = true;
  void add(VerificationCheck c);
  std::string summary() const;
};

// Family verification: partition sums on grid bins and random frequencies,
// bin-exact support/plateau checks, dilation-derivative fits (orders 1 and 2,
// spectral differentiation of the radial profile), and for sharp_lp_tilde the
// product identity against sharp_lp and the inverse-transform L1 stability.
VerificationReport verify_partition(const WindowFamily& family, const GridSpec& spec,
                                    std::uint64_t seed = 1);

// Uniform-window verification: support exactness, translate sums (phi: == 1,
// kappa: >= 1), range checks, and for the s4 phi the |F^{-1} phi| >= 1 bound.
VerificationReport verify_partition(const UniformWindow& window, const GridSpec& spec,
                                    std::uint64_t seed = 1);

}  // namespace mlpo
