#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "mlpo/exponents.hpp"
#include "mlpo/grid.hpp"
#include "mlpo/windows.hpp"

// Extremal inputs used by the sharpness experiments.
//
// 1. Oscillatory lattice sums
//
//      f_{a,b,eps}(x) = sum_{0 < |nu| <= V_max} e^{-eps|nu|} |nu|^{-b}
//                       e^{i|nu|^a} e^{i nu.x} * phi(x),
//
//    with 0 < a < 1 and a smooth spatial factor phi.  The L^p norms stay
//    bounded as eps -> 0 when b > wainger_threshold(a, p, n)
//    = (1-a)(n/2 - n/p) + n/2; for p > 2 they grow when b sits below the
//    threshold.  This dichotomy is what the norm-growth experiment measures.
//
//    Two realizations are provided:
//      - make_wainger: space samples of the display above, phi evaluated
//        pointwise (the window's axis profile applied to each coordinate);
//      - make_wainger_modulated: frequency samples of the variant whose
//        spatial factor is the inverse transform of an envelope window,
//        i.e. hat(xi) = sum_nu c_nu env(xi - nu).  Each lattice coefficient
//        occupies one envelope box exactly, which the operator pipeline
//        relies on for closed-form extraction.
//
// 2. Constrained lattice tuple sets
//
//    Tuples of integer frequencies confined to dyadic shells
//    shell(l, d) = { v : 2^(l-d) <= |v| <= 2^(l+d) }.
//
//    - sum_zero kind: N-tuples (mu_1, ..., mu_N) with mu_2 in shell(ell, d),
//      mu_j in shell(ell-L, d) for j >= 3, and mu_1 = -(mu_2 + ... + mu_N).
//      Every enumerated tuple is checked to satisfy
//      |mu_1| in shell(ell, 2d); violations throw compute_error.
//    - free_sum kind: (N-1)-tuples (mu_2, ..., mu_N) keyed by their sum
//      nu = mu_2 + ... + mu_N, with nu in shell(ell, d) and mu_j in
//      shell(ell-L, d) for j >= 3 (so mu_2 = nu - sum of the others).  Every
//      tuple is checked to satisfy |mu_2| in shell(ell, 2d).
//
//    coefficient_sums attaches the weight
//
//      w = <MU>^m * prod_j e^{-eps|mu_j|} |mu_j|^{-b_j},
//
//    where <MU> = (1 + sum_j |mu_j|^2)^{1/2} runs over the stored entries
//    (N of them for sum_zero, N-1 for free_sum), and reports the total sum,
//    the per-sum-frequency sums d_nu in deterministic key order, and their
//    l2 size.  The growth exponents of these quantities in ell are the
//    quantities of interest; see the experiments module.
namespace mlpo {

// --- oscillatory lattice sums ----------------------------------------------

struct WaingerParams {
  int n = 1;
  double a = 0.5;             // oscillation exponent, in (0,1)
  double b = 1.0;             // coefficient decay exponent
  double epsilon = 1.0 / 64.0;  // damping, >= 0
  int V_max = 6000;           // lattice truncation radius
  LebesgueExponent p = LebesgueExponent::from_int(2);  // target Lebesgue exponent
  void validate() const;
  // Whether b clears the boundedness threshold for (a, p, n).
  bool above_threshold() const;
};

double wainger_threshold(double a, const LebesgueExponent& p, int n);

// Frequency-domain samples of the bare sum (atomic lattice spectrum, no
// spatial factor); requires scale_T to be a positive integer so integer
// frequencies sit on bins.
GridFunction make_wainger_spectrum(const WaingerParams& params, const GridSpec& spec);

// Space-domain samples of the sum multiplied by the spatial factor
// phi(x) = prod_axes window.axis_profile(x_axis).
GridFunction make_wainger(const WaingerParams& params, const UniformWindow& phi,
                          const GridSpec& spec);

// Frequency-domain samples with each lattice coefficient spread over one
// translated envelope box: hat(xi) = sum_nu c_nu envelope(xi - nu).  The
// envelope's support half-width must be <= 1/2 so the boxes stay disjoint.
GridFunction make_wainger_modulated(const WaingerParams& params,
                                    const UniformWindow& envelope, const GridSpec& spec);

// --- constrained lattice tuple sets -----------------------------------------

enum class TupleKind { sum_zero, free_sum };

struct LatticeTupleParams {
  TupleKind kind = TupleKind::sum_zero;
  int n = 1;        // lattice dimension (1 or 2)
  int N = 2;        // operator arity
  int ell = 5;      // primary shell level
  double delta = 0.5;
  int gap = -1;     // low-shell offset L; -1 selects default_gap(N, delta)
  void validate() const;
  int effective_gap() const;
};

// Smallest L >= 3 such that the N-2 low-shell entries cannot move the
// determined entry out of shell(ell, 2*delta).
int default_gap(int N, double delta);

using LatticePoint = std::array<int, 2>;  // unused axes are zero

struct LatticeTuple {
  std::vector<LatticePoint> mu;  // N entries (sum_zero) or N-1 entries (free_sum)
};

// Streams members in deterministic lexicographic order; returns the count.
std::uint64_t for_each_tuple(const LatticeTupleParams& params,
                             const std::function<void(std::span<const LatticePoint>)>& fn);

// Materializes the members (guarded against huge sets).
std::vector<LatticeTuple> enumerate_tuples(const LatticeTupleParams& params);

struct CoefficientSums {
  std::uint64_t count = 0;
  double total = 0.0;                       // sum of weights
  std::map<LatticePoint, double> per_sum;   // free_sum only: d_nu keyed by nu
  double l2_per_sum = 0.0;                  // sqrt(sum |d_nu|^2)
  double l2_weights = 0.0;                  // sqrt(sum w^2) over members
};

// Weighted sums over the tuple set.  b holds one decay exponent per stored
// entry; for free_sum sets a length-N vector is also accepted, in which case
// the leading entry (the slot without a lattice translate) is ignored.
CoefficientSums coefficient_sums(const LatticeTupleParams& params, double m,
                                 const std::vector<double>& b, double epsilon);

// Deterministic counter-based sign in {-1,+1} for a tuple, independent of
// enumeration order.
int rademacher_sign(std::uint64_t seed, std::span<const LatticePoint> mu);

}  // namespace mlpo
