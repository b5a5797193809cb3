#include "mlpo/norms.hpp"

#include <algorithm>
#include <cmath>

namespace mlpo {

namespace {

GridFunction to_domain(const GridFunction& f, Domain d) {
  return f.domain == d ? f : transform(f, d);
}

double weight_bracket(const int* mu, int n) {
  double s = 1.0;
  for (int a = 0; a < n; ++a) s += static_cast<double>(mu[a]) * mu[a];
  return std::sqrt(s);
}

double gaussian_profile(double r) { return std::exp(-0.5 * r * r); }

}  // namespace

std::vector<double> maximal_default_levels() {
  std::vector<double> t;
  for (int j = 0; j <= 10; ++j) t.push_back(std::ldexp(1.0, -j));
  return t;
}

void MaximalConfig::validate() const {
  if (t_levels.empty())
    throw config_error("MaximalConfig: empty mollification scale set");
  for (std::size_t i = 0; i < t_levels.size(); ++i) {
    if (!(t_levels[i] > 0.0 && t_levels[i] <= 1.0))
      throw config_error("MaximalConfig: scales must lie in (0, 1]");
    if (i > 0 && !(t_levels[i] < t_levels[i - 1]))
      throw config_error("MaximalConfig: scales must be strictly decreasing");
  }
  if (mollifier_hat && mollifier_hat(0.0) == 0.0)
    throw config_error("MaximalConfig: mollifier must have nonzero integral");
}

double lq_norm(const std::vector<double>& values, const LebesgueExponent& q) {
  if (q.is_infinity()) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  double qd = q.to_double();
  double acc = 0.0;
  for (double v : values) acc += std::pow(std::abs(v), qd);
  return std::pow(acc, 1.0 / qd);
}

double lp_norm(const GridFunction& f, const LebesgueExponent& p) {
  if (f.domain != Domain::space)
    throw config_error("lp_norm: input must be sampled in the space domain");
  if (p.is_infinity()) return f.max_abs();
  double pd = p.to_double();
  double cell = std::pow(f.spec.cell_width(), f.spec.n);
  double acc = 0.0;
  for (const cd& v : f.samples) acc += std::pow(std::abs(v), pd);
  return std::pow(acc * cell, 1.0 / pd);
}

double local_hardy_norm(const GridFunction& f, const LebesgueExponent& p,
                        const MaximalConfig& config) {
  if (p.is_infinity())
    throw config_error("local_hardy_norm: p = inf is not supported");
  config.validate();
  auto profile = config.mollifier_hat ? config.mollifier_hat : gaussian_profile;
  GridFunction hat = to_domain(f, Domain::frequency);
  const GridSpec& spec = hat.spec;
  std::vector<double> maximal(hat.samples.size(), 0.0);
  int idx[2] = {0, 0};
  for (double t : config.t_levels) {
    GridFunction mollified = hat;
    for (std::size_t i = 0; i < mollified.samples.size(); ++i) {
      mollified.unflatten(i, idx);
      double r2 = 0.0;
      for (int a = 0; a < spec.n; ++a) {
        double nu = spec.freq(idx[a]);
        r2 += nu * nu;
      }
      mollified.samples[i] *= profile(t * std::sqrt(r2));
    }
    GridFunction g = transform(mollified, Domain::space);
    for (std::size_t i = 0; i < g.samples.size(); ++i)
      maximal[i] = std::max(maximal[i], std::abs(g.samples[i]));
  }
  GridFunction m = GridFunction::zeros(spec, Domain::space);
  for (std::size_t i = 0; i < m.samples.size(); ++i) m.samples[i] = cd{maximal[i], 0.0};
  return lp_norm(m, p);
}

double bmo_norm(const GridFunction& f) {
  GridFunction g = to_domain(f, Domain::space);
  const GridSpec& spec = g.spec;
  const int M = spec.points_per_dim;
  const int n = spec.n;
  int log2_m = 0;
  while ((1 << (log2_m + 1)) <= M) ++log2_m;
  double best = 0.0;
  int idx[2] = {0, 0};
  for (int level = 0; level <= log2_m; ++level) {
    double side = spec.period() / (1 << level);
    int cubes_per_axis = 1 << level;
    int shift = log2_m - level;  // sample index -> cube index
    std::size_t cube_count = 1;
    for (int a = 0; a < n; ++a) cube_count *= cubes_per_axis;
    std::vector<cd> mean(cube_count, cd{0.0, 0.0});
    std::vector<double> mean_abs(cube_count, 0.0);
    double samples_per_cube =
        static_cast<double>(g.samples.size()) / static_cast<double>(cube_count);
    auto cube_of = [&](std::size_t flat) {
      g.unflatten(flat, idx);
      std::size_t c = 0;
      for (int a = 0; a < n; ++a) c = c * cubes_per_axis + (idx[a] >> shift);
      return c;
    };
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
      std::size_t c = cube_of(i);
      mean[c] += g.samples[i];
      mean_abs[c] += std::abs(g.samples[i]);
    }
    for (std::size_t c = 0; c < cube_count; ++c) {
      mean[c] /= samples_per_cube;
      mean_abs[c] /= samples_per_cube;
    }
    if (side >= 1.0)
      for (double v : mean_abs) best = std::max(best, v);
    if (side <= 1.0) {
      std::vector<double> osc(cube_count, 0.0);
      for (std::size_t i = 0; i < g.samples.size(); ++i) {
        std::size_t c = cube_of(i);
        osc[c] += std::abs(g.samples[i] - mean[c]);
      }
      for (double v : osc) best = std::max(best, v / samples_per_cube);
    }
  }
  return best;
}

double besov_norm(const GridFunction& f, const LebesgueExponent& p,
                  const LebesgueExponent& q, double s, const WindowFamily& family,
                  BlockNorm block_norm) {
  if (family.kind == FamilyKind::sharp_lp_tilde)
    throw config_error("besov_norm: the tilde family is not a partition of unity");
  if (family.windows.empty()) throw config_error("besov_norm: empty window family");
  GridFunction hat = to_domain(f, Domain::frequency);
  const GridSpec& spec = hat.spec;
  double hat_max = hat.max_abs();
  if (hat_max == 0.0) return 0.0;
  double coverage = family.windows.back().support_outer;
  int idx[2] = {0, 0};
  std::vector<double> radius(hat.samples.size());
  for (std::size_t i = 0; i < hat.samples.size(); ++i) {
    hat.unflatten(i, idx);
    double r2 = 0.0;
    for (int a = 0; a < spec.n; ++a) {
      double nu = spec.freq(idx[a]);
      r2 += nu * nu;
    }
    radius[i] = std::sqrt(r2);
    if (radius[i] > coverage && std::abs(hat.samples[i]) > 1e-12 * hat_max)
      throw compute_error(
          "besov_norm: spectrum extends beyond the window family's coverage");
  }
  std::vector<double> blocks;
  for (const auto& w : family.windows) {
    GridFunction masked = GridFunction::zeros(spec, Domain::frequency);
    bool any = false;
    for (std::size_t i = 0; i < hat.samples.size(); ++i) {
      if (radius[i] < w.support_inner || radius[i] > w.support_outer) continue;
      cd v = hat.samples[i] * w.radial(radius[i]);
      if (v != cd{0.0, 0.0}) any = true;
      masked.samples[i] = v;
    }
    double block = 0.0;
    if (any) {
      GridFunction piece = transform(masked, Domain::space);
      if (block_norm == BlockNorm::hp && !p.is_infinity())
        block = local_hardy_norm(piece, p);
      else
        block = lp_norm(piece, p);
    }
    blocks.push_back(std::pow(2.0, w.k * s) * block);
  }
  return lq_norm(blocks, q);
}

double wiener_amalgam_norm(const GridFunction& f, const LebesgueExponent& p,
                           const LebesgueExponent& q, double s,
                           const UniformWindow& kappa) {
  GridFunction hat = to_domain(f, Domain::frequency);
  const GridSpec& spec = hat.spec;
  const int n = spec.n;

  // Bounding box (in integer lattice units) of the nonzero spectrum.
  double lo[2] = {0.0, 0.0}, hi[2] = {0.0, 0.0};
  bool any = false;
  int idx[2] = {0, 0};
  for (std::size_t i = 0; i < hat.samples.size(); ++i) {
    if (hat.samples[i] == cd{0.0, 0.0}) continue;
    hat.unflatten(i, idx);
    for (int a = 0; a < n; ++a) {
      double nu = spec.freq(idx[a]);
      if (!any) {
        lo[a] = hi[a] = nu;
      } else {
        lo[a] = std::min(lo[a], nu);
        hi[a] = std::max(hi[a], nu);
      }
    }
    any = true;
  }
  if (!any) return 0.0;

  int mu_lo[2], mu_hi[2];
  for (int a = 0; a < n; ++a) {
    mu_lo[a] = static_cast<int>(std::floor(lo[a] - kappa.half_width));
    mu_hi[a] = static_cast<int>(std::ceil(hi[a] + kappa.half_width));
  }

  const bool q_inf = q.is_infinity();
  const double qd = q_inf ? 0.0 : q.to_double();
  std::vector<double> acc(hat.samples.size(), 0.0);
  GridFunction masked = GridFunction::zeros(spec, Domain::frequency);
  int mu[2] = {0, 0};
  for (mu[0] = mu_lo[0]; mu[0] <= mu_hi[0]; ++mu[0]) {
    int b_lo = (n == 2) ? mu_lo[1] : 0;
    int b_hi = (n == 2) ? mu_hi[1] : 0;
    for (mu[1] = b_lo; mu[1] <= b_hi; ++mu[1]) {
      std::fill(masked.samples.begin(), masked.samples.end(), cd{0.0, 0.0});
      bool nonzero = false;
      for (std::size_t i = 0; i < hat.samples.size(); ++i) {
        if (hat.samples[i] == cd{0.0, 0.0}) continue;
        hat.unflatten(i, idx);
        double wv = 1.0;
        for (int a = 0; a < n; ++a) wv *= kappa.axis_profile(spec.freq(idx[a]) - mu[a]);
        if (wv == 0.0) continue;
        masked.samples[i] = hat.samples[i] * wv;
        nonzero = true;
      }
      if (!nonzero) continue;
      GridFunction piece = transform(masked, Domain::space);
      double wgt = std::pow(weight_bracket(mu, n), s);
      for (std::size_t i = 0; i < piece.samples.size(); ++i) {
        double v = wgt * std::abs(piece.samples[i]);
        if (q_inf)
          acc[i] = std::max(acc[i], v);
        else
          acc[i] += std::pow(v, qd);
      }
    }
  }
  GridFunction outer = GridFunction::zeros(spec, Domain::space);
  for (std::size_t i = 0; i < outer.samples.size(); ++i) {
    double v = q_inf ? acc[i] : std::pow(acc[i], 1.0 / qd);
    outer.samples[i] = cd{v, 0.0};
  }
  return lp_norm(outer, p);
}

// --- runtime norm selection ----------------------------------------------------

void NormRequest::validate() const {
  switch (space) {
    case SpaceKind::besov:
    case SpaceKind::besov_hp_variant:
      if (family == nullptr)
        throw config_error("NormRequest: besov spaces need a window family");
      break;
    case SpaceKind::wiener_amalgam:
      if (kappa == nullptr)
        throw config_error("NormRequest: wiener_amalgam needs a kappa window");
      break;
    case SpaceKind::local_hardy:
      maximal.validate();
      break;
    default:
      break;
  }
}

double evaluate_norm(const GridFunction& f, const NormRequest& request) {
  request.validate();
  switch (request.space) {
    case SpaceKind::lq:
      throw config_error("evaluate_norm: lq applies to sequences, not grid functions");
    case SpaceKind::lp:
      return lp_norm(to_domain(f, Domain::space), request.p);
    case SpaceKind::besov:
      return besov_norm(f, request.p, request.q, request.s, *request.family,
                        BlockNorm::lp);
    case SpaceKind::besov_hp_variant:
      return besov_norm(f, request.p, request.q, request.s, *request.family,
                        BlockNorm::hp);
    case SpaceKind::local_hardy:
      return local_hardy_norm(f, request.p, request.maximal);
    case SpaceKind::bmo:
      return bmo_norm(f);
    case SpaceKind::wiener_amalgam:
      return wiener_amalgam_norm(f, request.p, request.q, request.s, *request.kappa);
  }
  throw config_error("evaluate_norm: unknown space kind");
}

EmbeddingRatio embedding_ratio(std::span<const GridFunction> fs, const NormRequest& from,
                               const NormRequest& to) {
  if (fs.empty()) throw config_error("embedding_ratio: empty function set");
  EmbeddingRatio out;
  out.ratios.assign(fs.size(), 0.0);
  bool have_any = false;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    double denom = evaluate_norm(fs[i], from);
    if (denom <= 1e-14 * std::max(1.0, fs[i].max_abs())) {
      ++out.skipped;
      continue;
    }
    double ratio = evaluate_norm(fs[i], to) / denom;
    out.ratios[i] = ratio;
    if (!have_any) {
      out.max_ratio = out.min_ratio = ratio;
      out.arg_max = i;
      have_any = true;
    } else {
      if (ratio > out.max_ratio) {
        out.max_ratio = ratio;
        out.arg_max = i;
      }
      out.min_ratio = std::min(out.min_ratio, ratio);
    }
  }
  return out;
}

}  // namespace mlpo
