#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mlpo/extremal.hpp"
#include "mlpo/grid.hpp"
#include "mlpo/windows.hpp"

// Multilinear symbols sigma(x, xi_1, ..., xi_N) and their uniform-class
// seminorm estimates.
//
// A Symbol always carries a full evaluator over (x, Xi).  Factorized forms
// additionally expose the pieces the operator module exploits:
//   - frequency_core: sigma = core(Xi), or sigma = space_factor(x) * core(Xi);
//   - slot_multipliers (structure == separable): core(Xi) = prod_j m_j(xi_j);
//   - lattice (structure == lattice_sum): finite window sums
//         sum_{MU in D} c_MU <MU>^m prod_j phi(xi_j - mu_j),
//     optionally with a leading phi(xi_1) factor replacing the j=1 translate
//     (the free_sum variant).  <v> = (1 + |v|^2)^{1/2}.
//
// Seminorm estimation probes sup over sample points of
//   |d^alpha_x d^beta_Xi sigma| / (1 + sum_j |xi_j|)^m
// by tensor-product central differences, one multi-index per variable group
// (x, xi_1, ..., xi_N) up to total order M per group.  The step is 1e-3 for
// low orders and widens for high-order mixed entries so floating-point
// roundoff stays below the truncation error.  The class being probed gains
// nothing from differentiation, so steps are kept at unit scale rather than
// proportional to |xi|.
namespace mlpo {

struct LatticeSymbolData {
  LatticeTupleParams set;  // defines the tuple set D (kind selects the variant)
  double m = 0.0;          // order weight on <MU>
  UniformWindow phi;       // translated box window (and the leading factor)
  std::function<cd(std::span<const LatticePoint>)> coefficient;  // |c| <= 1
};

struct Symbol {
  int n = 1;
  int N = 2;
  enum class Structure { general, separable, lattice_sum };
  Structure structure = Structure::general;
  bool x_independent = false;

  // Always valid.  x points to n coords, Xi to N*n coords (slot-major).
  std::function<cd(const double* x, const double* Xi)> evaluator;
  // Valid when sigma factors as space_factor(x) * core(Xi); space_factor may
  // be empty, meaning sigma = core(Xi) (and then x_independent is true).
  std::function<cd(const double* Xi)> frequency_core;
  std::function<cd(const double* x)> space_factor;
  // structure == separable: core(Xi) = prod_j slot_multipliers[j](xi_j).
  std::vector<SpectrumSampler> slot_multipliers;
  // structure == lattice_sum.
  std::shared_ptr<const LatticeSymbolData> lattice;
  // Nonempty only for box-decomposition pieces: the box center, one lattice
  // vector per slot.
  std::vector<LatticePoint> piece_center;

  cd eval(const double* x, const double* Xi) const { return evaluator(x, Xi); }
};

// --- test symbols ------------------------------------------------------------

enum class TestSymbolKind { constant, separable, oscillatory_x };

struct TestSymbolParams {
  int n = 1;
  int N = 2;
  cd constant = cd{1.0, 0.0};
  // Per-slot Gaussian multiplier widths for separable/oscillatory kinds;
  // empty selects width 8 for every slot.
  std::vector<double> gaussian_widths;
  enum class SpaceFactor { modulation, cosine_series };
  SpaceFactor space_factor = SpaceFactor::modulation;
  double modulation_freq = 1.0;  // a(x) = e^{i f x.e1}
  int cosine_terms = 256;        // a(x) = 1 + sum_k 2 k^{-power} cos(k x_1)
  double cosine_power = 4.0;
};

Symbol make_test_symbol(TestSymbolKind kind, const TestSymbolParams& params);

// --- sharpness symbols --------------------------------------------------------

// Lattice window sum over the tuple set described by `set`:
//   sum_zero: sigma(Xi) = sum_MU c_MU <MU>^m prod_{j=1..N} phi(xi_j - mu_j)
//   free_sum: sigma(Xi) = phi(xi_1) * sum_MU c_MU <MU>^m prod_{j=2..N} phi(xi_j - mu_j)
// with phi the quarter-width box window.  Construction validates the set
// (nonempty, shell implications) by one enumeration pass.
Symbol make_sharpness_symbol(const LatticeTupleParams& set, double m,
                             std::function<cd(std::span<const LatticePoint>)> coefficient);

// The coefficient choices used by the sharpness analyses: oscillation-
// cancelling phases prod_j e^{-i|mu_j|^{a_j}} (one a per stored entry), and
// the same phases times a deterministic random sign r_nu attached to the
// tuple sum nu.
std::function<cd(std::span<const LatticePoint>)> chirp_phase_coefficients(
    std::vector<double> a);
std::function<cd(std::span<const LatticePoint>)> rademacher_chirp_coefficients(
    std::vector<double> a, std::uint64_t seed);

// Coefficient table serialization: one row per tuple with both lattice axes
// per entry plus the coefficient's re/im parts.
void write_lattice_coefficients(const std::string& path, const LatticeSymbolData& data);
std::function<cd(std::span<const LatticePoint>)> read_lattice_coefficients(
    const std::string& path);

// --- seminorm estimation ------------------------------------------------------

struct SeminormReport {
  double m = 0.0;
  int M = 2;
  // Key: concatenated multi-indices (x group then each slot group, n entries
  // each); value: sup over the sample points of the normalized derivative.
  std::map<std::vector<int>, double> values;
  double max_value() const;
};

// Sample points for seminorm estimation: each point holds n x-coords followed
// by N*n frequency coords.
std::vector<std::vector<double>> probe_points_uniform(int n, int N, double x_radius,
                                                      double freq_radius, int count,
                                                      std::uint64_t seed);
// Points jittered around random members of a lattice symbol's tuple set.
std::vector<std::vector<double>> probe_points_near_lattice(const LatticeSymbolData& data,
                                                           int count, std::uint64_t seed);

SeminormReport seminorm_estimate(const Symbol& sigma, double m, int M,
                                 std::span<const std::vector<double>> points);

}  // namespace mlpo
