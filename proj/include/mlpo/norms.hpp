#pragma once

#include <span>
#include <vector>

#include "mlpo/exponents.hpp"
#include "mlpo/grid.hpp"
#include "mlpo/windows.hpp"

// Norms on sampled functions.
//
// All space-side integrals are Riemann sums over the periodic grid
// (cell volume h^n), so every "norm" here is the norm of the trigonometric
// interpolant up to quadrature aliasing.  Inputs that must be in a specific
// domain throw config_error otherwise.
//
//  - lq_norm:             sequence norm, q = inf -> max.
//  - lp_norm:             Lebesgue (quasi-)norm on the torus, 0 < p <= inf.
//  - local_hardy_norm:    max over a fixed decreasing set of mollification
//                         scales t of |phi_t * f|, then lp_norm.  The default
//                         mollifier has spectral profile exp(-|t xi|^2 / 2).
//                         p = inf is rejected.
//  - bmo_norm:            max over torus-dyadic cubes of mean oscillation
//                         (side <= 1) and of mean |f| (side >= 1).
//  - besov_norm:          weighted lq over dyadic blocks, block size measured
//                         in L^p (block_norm lp) or local Hardy h^p
//                         (block_norm hp; grid max when p = inf), using a
//                         window family that partitions unity on the
//                         representable band.  Throws compute_error if f has
//                         spectral mass beyond the top window's support.
//  - wiener_amalgam_norm: pointwise lq over unit-lattice frequency boxes
//                         (translates of a caller-supplied kappa window),
//                         weighted by <mu>^s, then lp in space.
//
// NormRequest bundles one space choice with its indices so norms can be
// selected at runtime (CLI, embedding battery); embedding_ratio reports the
// worst to/from quotient over a family of functions.
namespace mlpo {

std::vector<double> maximal_default_levels();  // 2^0, 2^-1, ..., 2^-10

double lq_norm(const std::vector<double>& values, const LebesgueExponent& q);

double lp_norm(const GridFunction& f, const LebesgueExponent& p);

struct MaximalConfig {
  std::vector<double> t_levels = maximal_default_levels();  // strictly decreasing
  // Spectral profile of the mollifier, evaluated at t*|xi|; value at 0 must be
  // nonzero (nonzero integral of the mollifier itself).
  std::function<double(double)> mollifier_hat;
  void validate() const;
};

double local_hardy_norm(const GridFunction& f, const LebesgueExponent& p,
                        const MaximalConfig& config = {});

double bmo_norm(const GridFunction& f);

enum class BlockNorm { lp, hp };

double besov_norm(const GridFunction& f, const LebesgueExponent& p,
                  const LebesgueExponent& q, double s, const WindowFamily& family,
                  BlockNorm block_norm = BlockNorm::lp);

double wiener_amalgam_norm(const GridFunction& f, const LebesgueExponent& p,
                           const LebesgueExponent& q, double s,
                           const UniformWindow& kappa);

// --- runtime norm selection --------------------------------------------------

enum class SpaceKind { lq, lp, besov, besov_hp_variant, local_hardy, bmo, wiener_amalgam };

struct NormRequest {
  SpaceKind space = SpaceKind::lp;
  LebesgueExponent p = LebesgueExponent::from_int(2);
  LebesgueExponent q = LebesgueExponent::from_int(2);
  double s = 0.0;
  const WindowFamily* family = nullptr;  // besov / besov_hp_variant
  const UniformWindow* kappa = nullptr;  // wiener_amalgam
  MaximalConfig maximal = {};            // local_hardy and hp blocks
  void validate() const;                 // the chosen space's inputs are present
};

// Evaluates the requested quasi-norm of f.  SpaceKind::lq is rejected here
// (it applies to sequences, not grid functions).
double evaluate_norm(const GridFunction& f, const NormRequest& request);

struct EmbeddingRatio {
  double max_ratio = 0.0;
  double min_ratio = 0.0;       // over non-skipped members
  std::size_t arg_max = 0;      // index into the function set
  std::size_t skipped = 0;      // members whose from-norm was ~0
  std::vector<double> ratios;   // per member; skipped entries hold 0
};

// max over the set of (to-norm)/(from-norm); members with from-norm below
// 1e-14 * max-sample are skipped and counted.
EmbeddingRatio embedding_ratio(std::span<const GridFunction> fs, const NormRequest& from,
                               const NormRequest& to);

}  // namespace mlpo
