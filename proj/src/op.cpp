#include "mlpo/op.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace mlpo {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<std::uint64_t>::max() / b)
    return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

GridFunction to_domain(const GridFunction& f, Domain target) {
  return f.domain == target ? f : transform(f, target);
}

struct ActiveBin {
  std::array<int, 2> idx{0, 0};
  std::array<double, 2> freq{0.0, 0.0};
  cd hat{0.0, 0.0};
};

std::vector<ActiveBin> collect_active(const GridFunction& hat_f, double threshold) {
  if (hat_f.domain != Domain::frequency)
    throw compute_error("collect_active: expected a frequency-domain function");
  const double cut = threshold * hat_f.max_abs();
  std::vector<ActiveBin> bins;
  const int n = hat_f.spec.n;
  int idx[2] = {0, 0};
  for (std::size_t flat = 0; flat < hat_f.samples.size(); ++flat) {
    const double a = std::abs(hat_f.samples[flat]);
    if (a <= cut && !(a > 0.0 && cut == 0.0)) continue;
    hat_f.unflatten(flat, idx);
    ActiveBin b;
    for (int ax = 0; ax < n; ++ax) {
      b.idx[ax] = idx[ax];
      b.freq[ax] = hat_f.spec.freq(idx[ax]);
    }
    b.hat = hat_f.samples[flat];
    bins.push_back(b);
  }
  return bins;
}

// The frequency part of a factorized symbol, synthesized from the evaluator
// for x-independent symbols that do not carry an explicit core.
std::function<cd(const double*)> core_function(const Symbol& sigma) {
  if (sigma.frequency_core) return sigma.frequency_core;
  if (!sigma.x_independent)
    throw config_error("operator: symbol has no frequency factorization");
  auto ev = sigma.evaluator;
  return [ev](const double* Xi) {
    const double origin[2] = {0.0, 0.0};
    return ev(origin, Xi);
  };
}

void check_alias(double peak_out, std::size_t outside_count, double peak_in,
                 double tolerance) {
  if (peak_out <= tolerance * std::max(peak_in, 1e-300)) return;
  std::ostringstream msg;
  msg << "apply_direct: output spectrum exceeds the representable band ("
      << outside_count << " out-of-band bins, peak " << peak_out
      << " vs in-band peak " << peak_in << "); enlarge the grid";
  throw compute_error(msg.str());
}

GridFunction apply_grouped(const std::function<cd(const double*)>& core,
                           const std::vector<std::vector<ActiveBin>>& bins,
                           const GridSpec& spec, const ApplyOptions& options) {
  const int n = spec.n;
  const int N = static_cast<int>(bins.size());
  const int M = spec.points_per_dim;
  GridFunction out_hat = GridFunction::zeros(spec, Domain::frequency);
  std::map<std::array<int, 2>, cd> outside;

  bool any_empty = false;
  for (const auto& b : bins) any_empty = any_empty || b.empty();
  if (!any_empty) {
    std::vector<std::size_t> pick(N, 0);
    std::vector<double> Xi(static_cast<std::size_t>(N) * n);
    while (true) {
      cd prod{1.0, 0.0};
      std::array<int, 2> tau{0, 0};
      for (int j = 0; j < N; ++j) {
        const ActiveBin& b = bins[j][pick[j]];
        prod *= b.hat;
        for (int ax = 0; ax < n; ++ax) {
          Xi[static_cast<std::size_t>(j) * n + ax] = b.freq[ax];
          tau[ax] += b.idx[ax];
        }
      }
      for (int ax = 0; ax < n; ++ax) tau[ax] -= (N - 1) * (M / 2);
      cd term = core(Xi.data()) * prod;
      bool in_band = true;
      for (int ax = 0; ax < n; ++ax) in_band = in_band && tau[ax] >= 0 && tau[ax] < M;
      if (in_band) {
        int idx[2] = {tau[0], tau[1]};
        out_hat.samples[out_hat.flat_index(idx)] += term;
      } else {
        outside[tau] += term;
      }
      int j = N - 1;
      for (; j >= 0; --j) {
        if (++pick[j] < bins[j].size()) break;
        pick[j] = 0;
      }
      if (j < 0) break;
    }
  }

  const double scale =
      std::pow(two_pi * spec.scale_T, -static_cast<double>((N - 1) * n));
  for (cd& v : out_hat.samples) v *= scale;
  double peak_out = 0.0;
  for (const auto& [key, v] : outside) peak_out = std::max(peak_out, std::abs(v) * scale);
  check_alias(peak_out, outside.size(), out_hat.max_abs(), options.alias_tolerance);
  return transform(out_hat, Domain::space);
}

GridFunction apply_general(const Symbol& sigma,
                           const std::vector<std::vector<ActiveBin>>& bins,
                           const GridSpec& spec, const ApplyOptions& options) {
  const int n = spec.n;
  const int N = static_cast<int>(bins.size());
  const int M = spec.points_per_dim;
  GridFunction out = GridFunction::zeros(spec, Domain::space);

  bool any_empty = false;
  for (const auto& b : bins) any_empty = any_empty || b.empty();
  if (any_empty) return out;

  const double scale = std::pow(two_pi * spec.scale_T, -static_cast<double>(N * n));
  double mass_in = 0.0, mass_out = 0.0;
  std::size_t outside_count = 0;

  std::vector<std::size_t> pick(N, 0);
  std::vector<double> Xi(static_cast<std::size_t>(N) * n);
  std::vector<cd> phase0(M), phase1(M);
  while (true) {
    cd prod{1.0, 0.0};
    std::array<int, 2> tau{0, 0};
    for (int j = 0; j < N; ++j) {
      const ActiveBin& b = bins[j][pick[j]];
      prod *= b.hat;
      for (int ax = 0; ax < n; ++ax) {
        Xi[static_cast<std::size_t>(j) * n + ax] = b.freq[ax];
        tau[ax] += b.idx[ax];
      }
    }
    for (int ax = 0; ax < n; ++ax) tau[ax] -= (N - 1) * (M / 2);
    bool in_band = true;
    for (int ax = 0; ax < n; ++ax) in_band = in_band && tau[ax] >= 0 && tau[ax] < M;
    if (!in_band) {
      mass_out += std::abs(prod);
      ++outside_count;
    } else {
      mass_in += std::abs(prod);
      double tau_freq[2] = {0.0, 0.0};
      for (int ax = 0; ax < n; ++ax) tau_freq[ax] = spec.freq(tau[ax]);
      for (int i = 0; i < M; ++i)
        phase0[i] = std::exp(cd{0.0, tau_freq[0] * spec.coord(i)});
      if (n == 2)
        for (int i = 0; i < M; ++i)
          phase1[i] = std::exp(cd{0.0, tau_freq[1] * spec.coord(i)});
      double x[2] = {0.0, 0.0};
      if (n == 1) {
        for (int i = 0; i < M; ++i) {
          x[0] = spec.coord(i);
          out.samples[i] += sigma.eval(x, Xi.data()) * prod * phase0[i];
        }
      } else {
        std::size_t flat = 0;
        for (int i0 = 0; i0 < M; ++i0) {
          x[0] = spec.coord(i0);
          for (int i1 = 0; i1 < M; ++i1, ++flat) {
            x[1] = spec.coord(i1);
            out.samples[flat] +=
                sigma.eval(x, Xi.data()) * prod * phase0[i0] * phase1[i1];
          }
        }
      }
    }
    int j = N - 1;
    for (; j >= 0; --j) {
      if (++pick[j] < bins[j].size()) break;
      pick[j] = 0;
    }
    if (j < 0) break;
  }
  for (cd& v : out.samples) v *= scale;
  check_alias(mass_out * scale, outside_count, mass_in * scale, options.alias_tolerance);
  return out;
}

// sigma * prod_j phi(xi_j - nu_j) as a Symbol carrying its box center.
Symbol make_piece(const Symbol& parent, std::span<const LatticePoint> center,
                  const UniformWindow& phi) {
  Symbol p;
  p.n = parent.n;
  p.N = parent.N;
  p.x_independent = parent.x_independent;
  p.space_factor = parent.space_factor;
  p.piece_center.assign(center.begin(), center.end());
  const int n = parent.n;
  const int N = parent.N;
  auto window_product = [phi, centers = p.piece_center, n, N](const double* Xi) {
    double w = 1.0;
    for (int j = 0; j < N; ++j) {
      w *= phi.eval_shifted(Xi + static_cast<std::size_t>(j) * n, centers[j].data(), n);
      if (w == 0.0) return 0.0;
    }
    return w;
  };
  if (parent.frequency_core) {
    auto core = parent.frequency_core;
    p.frequency_core = [core, window_product](const double* Xi) {
      double w = window_product(Xi);
      if (w == 0.0) return cd{0.0, 0.0};
      return core(Xi) * w;
    };
  }
  if (parent.structure == Symbol::Structure::separable &&
      parent.slot_multipliers.size() == static_cast<std::size_t>(N)) {
    p.structure = Symbol::Structure::separable;
    for (int j = 0; j < N; ++j) {
      SpectrumSampler s;
      auto m = parent.slot_multipliers[j].eval;
      LatticePoint c = p.piece_center[j];
      UniformWindow w = phi;
      s.eval = [m, c, w, n](const double* xi) -> cd {
        double ww = w.eval_shifted(xi, c.data(), n);
        if (ww == 0.0) return cd{0.0, 0.0};
        return m(xi) * ww;
      };
      s.support_radius = w.half_width;
      s.support_center =
          std::array<double, 2>{static_cast<double>(c[0]), static_cast<double>(c[1])};
      p.slot_multipliers.push_back(std::move(s));
    }
  } else {
    p.structure = Symbol::Structure::general;
  }
  if (p.frequency_core) {
    auto core = p.frequency_core;
    auto factor = p.space_factor;
    p.evaluator = [core, factor](const double* x, const double* Xi) {
      cd v = core(Xi);
      if (factor) v *= factor(x);
      return v;
    };
  } else {
    auto ev = parent.evaluator;
    p.evaluator = [ev, window_product](const double* x, const double* Xi) {
      double w = window_product(Xi);
      if (w == 0.0) return cd{0.0, 0.0};
      return ev(x, Xi) * w;
    };
  }
  return p;
}

int mode_flat_index(const LatticePoint& mu, int radius, int n) {
  const int per_axis = 2 * radius + 1;
  int f = mu[0] + radius;
  if (n == 2) f = f * per_axis + (mu[1] + radius);
  return f;
}

LatticePoint mode_from_flat(int flat, int radius, int n) {
  const int per_axis = 2 * radius + 1;
  LatticePoint mu{0, 0};
  if (n == 1) {
    mu[0] = flat - radius;
  } else {
    mu[0] = flat / per_axis - radius;
    mu[1] = flat % per_axis - radius;
  }
  return mu;
}

double least_squares_slope(const std::vector<std::pair<double, double>>& pts) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(pts.size());
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

GridFunction apply_direct(const Symbol& sigma, std::span<const GridFunction> inputs,
                          const ApplyOptions& options) {
  if (inputs.empty()) throw config_error("apply_direct: no inputs");
  if (static_cast<int>(inputs.size()) != sigma.N)
    throw config_error("apply_direct: input count differs from the symbol arity");
  const GridSpec spec = inputs[0].spec;
  if (spec.n != sigma.n)
    throw config_error("apply_direct: grid dimension differs from the symbol dimension");
  for (const auto& f : inputs)
    if (!(f.spec == spec)) throw config_error("apply_direct: inputs live on different grids");

  std::vector<std::vector<ActiveBin>> bins;
  std::uint64_t tuple_count = 1;
  for (const auto& f : inputs) {
    GridFunction hat = to_domain(f, Domain::frequency);
    bins.push_back(collect_active(hat, options.bin_threshold));
    tuple_count = sat_mul(tuple_count, bins.back().size());
  }

  const bool factorized = sigma.frequency_core || sigma.x_independent;
  const std::uint64_t cost =
      factorized ? tuple_count : sat_mul(tuple_count, spec.size());
  if (cost > options.cost_budget) {
    std::ostringstream msg;
    msg << "apply_direct: " << cost << " symbol evaluations needed (active bins per slot:";
    for (const auto& b : bins) msg << " " << b.size();
    msg << "; x-grid " << spec.size() << "; budget " << options.cost_budget << ")";
    throw config_error(msg.str());
  }

  GridFunction out = factorized ? apply_grouped(core_function(sigma), bins, spec, options)
                                : apply_general(sigma, bins, spec, options);
  if (factorized && sigma.space_factor) {
    int idx[2] = {0, 0};
    double x[2] = {0.0, 0.0};
    for (std::size_t flat = 0; flat < out.samples.size(); ++flat) {
      out.unflatten(flat, idx);
      for (int ax = 0; ax < spec.n; ++ax) x[ax] = spec.coord(idx[ax]);
      out.samples[flat] *= sigma.space_factor(x);
    }
  }
  return out;
}

void DecompositionPlan::validate(int n, int N) const {
  if (static_cast<int>(active.size()) != N)
    throw config_error("DecompositionPlan: one active box list per slot required");
  if (mode_radius < 0) throw config_error("DecompositionPlan: negative mode radius");
  if (order < 0) throw config_error("DecompositionPlan: negative order");
  const int floor_pts = std::max(16, 2 * mode_radius + 2);
  if (quad_points < floor_pts) {
    std::ostringstream msg;
    msg << "DecompositionPlan: quadrature resolution " << quad_points
        << " is below the floor " << floor_pts << " required for mode radius "
        << mode_radius;
    throw config_error(msg.str());
  }
  if ((quad_points & (quad_points - 1)) != 0)
    throw config_error("DecompositionPlan: quad_points must be a power of two");
  if (!phi.axis_profile || !phi_tilde.axis_profile)
    throw config_error("DecompositionPlan: missing box windows");
  (void)n;
}

DecompositionPlan make_plan(const Symbol& sigma, std::span<const GridFunction> inputs,
                            int mode_radius, int order) {
  if (static_cast<int>(inputs.size()) != sigma.N)
    throw config_error("make_plan: input count differs from the symbol arity");
  DecompositionPlan plan;
  plan.phi = make_uniform_window(UniformKind::phi, UniformVariant::s3);
  plan.phi_tilde = make_uniform_window(UniformKind::phi_tilde, UniformVariant::s3);
  plan.mode_radius = mode_radius;
  plan.order = order;
  const int n = sigma.n;
  for (const auto& f : inputs) {
    GridFunction hat = to_domain(f, Domain::frequency);
    std::set<std::array<int, 2>> centers;
    for (const ActiveBin& b : collect_active(hat, 0.0)) {
      int lo[2] = {0, 0}, hi[2] = {0, 0};
      for (int ax = 0; ax < n; ++ax) {
        lo[ax] = static_cast<int>(std::ceil(b.freq[ax] - 1.0 - 1e-9));
        hi[ax] = static_cast<int>(std::floor(b.freq[ax] + 1.0 + 1e-9));
      }
      for (int v0 = lo[0]; v0 <= hi[0]; ++v0) {
        if (n == 1) {
          centers.insert({v0, 0});
        } else {
          for (int v1 = lo[1]; v1 <= hi[1]; ++v1) centers.insert({v0, v1});
        }
      }
    }
    plan.active.emplace_back(centers.begin(), centers.end());
  }
  return plan;
}

std::vector<Symbol> decompose_symbol(const Symbol& sigma, const DecompositionPlan& plan) {
  plan.validate(sigma.n, sigma.N);
  const int N = sigma.N;
  std::vector<Symbol> pieces;
  for (const auto& slot : plan.active)
    if (slot.empty()) return pieces;
  std::vector<std::size_t> pick(N, 0);
  std::vector<LatticePoint> center(N);
  while (true) {
    for (int j = 0; j < N; ++j) center[j] = plan.active[j][pick[j]];
    pieces.push_back(make_piece(sigma, center, plan.phi));
    int j = N - 1;
    for (; j >= 0; --j) {
      if (++pick[j] < plan.active[j].size()) break;
      pick[j] = 0;
    }
    if (j < 0) break;
  }
  return pieces;
}

std::vector<CoefficientTable> symbol_fourier_coefficients(const Symbol& piece,
                                                          const DecompositionPlan& plan) {
  const int n = piece.n;
  const int N = piece.N;
  if (piece.piece_center.size() != static_cast<std::size_t>(N))
    throw config_error(
        "symbol_fourier_coefficients: the symbol is not a decomposition piece");
  if (!piece.frequency_core)
    throw config_error("symbol_fourier_coefficients: requires a frequency core");
  if (static_cast<int>(plan.active.size()) != N) {
    // The plan may come straight from a caller that never built active sets;
    // only the quadrature fields matter here.
  }
  const int rank = N * n;
  if (rank > 4)
    throw config_error(
        "symbol_fourier_coefficients: joint frequency rank above 4 is unsupported");
  const int Qp = plan.quad_points;
  const int floor_pts = std::max(16, 2 * plan.mode_radius + 2);
  if (Qp < floor_pts || (Qp & (Qp - 1)) != 0) {
    std::ostringstream msg;
    msg << "symbol_fourier_coefficients: quadrature resolution " << Qp
        << " below the floor " << floor_pts << " (power of two required)";
    throw config_error(msg.str());
  }

  std::vector<int> dims(rank, Qp);
  std::size_t total = 1;
  for (int r = 0; r < rank; ++r) total *= static_cast<std::size_t>(Qp);
  std::vector<cd> data(total);
  const double step = two_pi / Qp;
  std::vector<double> Xi(rank);
  std::vector<int> idx(rank, 0);
  const auto& core = piece.frequency_core;
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int r = rank - 1; r >= 0; --r) {
      idx[r] = static_cast<int>(rem % Qp);
      rem /= Qp;
    }
    for (int r = 0; r < rank; ++r) {
      const double eta = (idx[r] - Qp / 2) * step;
      Xi[r] = piece.piece_center[r / n][r % n] + eta;
    }
    data[flat] = core(Xi.data());
  }
  centered_fft(dims, two_pi, true, data);

  const double norm = std::pow(two_pi, -rank);
  const int R = plan.mode_radius;
  const int per_axis = 2 * R + 1;
  std::size_t mode_total = 1;
  for (int r = 0; r < rank; ++r) mode_total *= static_cast<std::size_t>(per_axis);

  std::vector<CoefficientTable> tables;
  tables.reserve(mode_total);
  std::vector<int> k(rank, -R);
  while (true) {
    std::size_t flat = 0;
    for (int r = 0; r < rank; ++r)
      flat = flat * static_cast<std::size_t>(Qp) + static_cast<std::size_t>(k[r] + Qp / 2);
    const cd hat = data[flat];
    double dot = 0.0;
    double bracket = 1.0;
    for (int r = 0; r < rank; ++r) {
      dot += static_cast<double>(k[r]) * piece.piece_center[r / n][r % n];
      bracket += static_cast<double>(k[r]) * k[r];
    }
    CoefficientTable t;
    t.nu = piece.piece_center;
    t.mu.resize(N);
    for (int j = 0; j < N; ++j) {
      t.mu[j] = {k[j * n], n == 2 ? k[j * n + 1] : 0};
    }
    t.order = plan.order;
    t.P = norm * std::exp(cd{0.0, -dot}) * hat;
    t.Q = std::pow(bracket, plan.order) * t.P;
    tables.push_back(std::move(t));
    int r = rank - 1;
    for (; r >= 0; --r) {
      if (++k[r] <= R) break;
      k[r] = -R;
    }
    if (r < 0) break;
  }
  return tables;
}

GridFunction apply_via_expansion(const Symbol& sigma, std::span<const GridFunction> inputs,
                                 const DecompositionPlan& plan) {
  const int n = sigma.n;
  const int N = sigma.N;
  if (static_cast<int>(inputs.size()) != N)
    throw config_error("apply_via_expansion: input count differs from the symbol arity");
  plan.validate(n, N);
  Symbol base = sigma;
  if (!base.frequency_core) base.frequency_core = core_function(sigma);
  const GridSpec spec = inputs[0].spec;
  for (const auto& f : inputs)
    if (!(f.spec == spec))
      throw config_error("apply_via_expansion: inputs live on different grids");
  GridFunction out = GridFunction::zeros(spec, Domain::space);
  for (const auto& slot : plan.active)
    if (slot.empty()) return out;

  std::vector<GridFunction> hats;
  hats.reserve(inputs.size());
  for (const auto& f : inputs) hats.push_back(to_domain(f, Domain::frequency));

  // Partition coverage: the active boxes must resolve every occupied bin.
  for (int j = 0; j < N; ++j) {
    for (const ActiveBin& b : collect_active(hats[j], 0.0)) {
      double s = 0.0;
      for (const LatticePoint& v : plan.active[j])
        s += plan.phi.eval_shifted(b.freq.data(), v.data(), n);
      if (std::abs(s - 1.0) > 1e-12)
        throw config_error(
            "apply_via_expansion: the plan's active boxes do not cover the input "
            "spectrum");
    }
  }

  const int R = plan.mode_radius;
  const int per_axis = 2 * R + 1;
  const int modes_per_slot = n == 1 ? per_axis : per_axis * per_axis;
  std::uint64_t tuples = 1;
  for (const auto& slot : plan.active) tuples = sat_mul(tuples, slot.size());
  std::uint64_t mode_tuples = 1;
  for (int j = 0; j < N; ++j)
    mode_tuples = sat_mul(mode_tuples, static_cast<std::uint64_t>(modes_per_slot));
  const std::uint64_t accum_cost = sat_mul(sat_mul(tuples, mode_tuples), spec.size());
  if (accum_cost > plan.cost_budget) {
    std::ostringstream msg;
    msg << "apply_via_expansion: " << accum_cost
        << " accumulation steps needed (boxes per slot:";
    for (const auto& slot : plan.active) msg << " " << slot.size();
    msg << "; modes per slot " << modes_per_slot << "; x-grid " << spec.size()
        << "; budget " << plan.cost_budget << ")";
    throw config_error(msg.str());
  }

  // Translated box projections G[j][box][mode](x) = F^{-1}[e^{i mu xi}
  // phi_tilde(xi - nu) hat f_j](x), precomputed once.
  std::vector<std::vector<std::vector<std::vector<cd>>>> G(N);
  std::vector<std::vector<char>> box_zero(N);
  const int M = spec.points_per_dim;
  for (int j = 0; j < N; ++j) {
    const auto& slot = plan.active[j];
    G[j].resize(slot.size());
    box_zero[j].assign(slot.size(), 0);
    for (std::size_t vi = 0; vi < slot.size(); ++vi) {
      GridFunction masked = hats[j];
      multiply_spectrum_inplace(masked, plan.phi_tilde.sampler(n, slot[vi].data()));
      if (masked.max_abs() == 0.0) {
        box_zero[j][vi] = 1;
        continue;
      }
      G[j][vi].resize(modes_per_slot);
      for (int mf = 0; mf < modes_per_slot; ++mf) {
        const LatticePoint mu = mode_from_flat(mf, R, n);
        GridFunction shifted = masked;
        int idx[2] = {0, 0};
        for (std::size_t flat = 0; flat < shifted.samples.size(); ++flat) {
          shifted.unflatten(flat, idx);
          double phase = 0.0;
          for (int ax = 0; ax < n; ++ax) phase += mu[ax] * spec.freq(idx[ax]);
          shifted.samples[flat] *= std::exp(cd{0.0, phase});
        }
        G[j][vi][mf] = transform(shifted, Domain::space).samples;
      }
    }
  }

  // Accumulate sum_{Nu, Mu} P_{Nu,Mu} prod_j G_{j,nu_j,mu_j}(x).
  std::vector<std::size_t> pick(N, 0);
  std::vector<LatticePoint> center(N);
  while (true) {
    bool skip = false;
    for (int j = 0; j < N; ++j) {
      center[j] = plan.active[j][pick[j]];
      skip = skip || box_zero[j][pick[j]];
    }
    if (!skip) {
      Symbol piece = make_piece(base, center, plan.phi);
      std::vector<CoefficientTable> tables = symbol_fourier_coefficients(piece, plan);
      const std::vector<cd>* g[8] = {nullptr};
      for (const CoefficientTable& t : tables) {
        if (t.P == cd{0.0, 0.0}) continue;
        for (int j = 0; j < N; ++j)
          g[j] = &G[j][pick[j]][mode_flat_index(t.mu[j], R, n)];
        const cd P = t.P;
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
          cd prod = P;
          for (int j = 0; j < N; ++j) prod *= (*g[j])[i];
          out.samples[i] += prod;
        }
      }
    }
    int j = N - 1;
    for (; j >= 0; --j) {
      if (++pick[j] < plan.active[j].size()) break;
      pick[j] = 0;
    }
    if (j < 0) break;
  }
  (void)M;

  if (base.space_factor) {
    int idx[2] = {0, 0};
    double x[2] = {0.0, 0.0};
    for (std::size_t flat = 0; flat < out.samples.size(); ++flat) {
      out.unflatten(flat, idx);
      for (int ax = 0; ax < n; ++ax) x[ax] = spec.coord(idx[ax]);
      out.samples[flat] *= base.space_factor(x);
    }
  }
  return out;
}

BandDecayReport coefficient_band_decay(const Symbol& sigma,
                                       std::span<const LatticePoint> nu,
                                       std::span<const LatticePoint> mu,
                                       const DecompositionPlan& plan,
                                       const WindowFamily& family, const GridSpec& x_spec,
                                       int level_lo, int level_hi,
                                       std::span<const double> reference_orders) {
  const int n = sigma.n;
  const int N = sigma.N;
  x_spec.validate();
  if (x_spec.n != n)
    throw config_error("coefficient_band_decay: x-grid dimension mismatch");
  if (static_cast<int>(nu.size()) != N || static_cast<int>(mu.size()) != N)
    throw config_error("coefficient_band_decay: need one box and one mode per slot");
  if (level_lo < 0 || level_hi < level_lo)
    throw config_error("coefficient_band_decay: bad level range");
  if (static_cast<std::size_t>(level_hi) >= family.windows.size())
    throw config_error("coefficient_band_decay: family has too few levels");
  const int rank = N * n;
  const int Qp = plan.quad_points;
  if (Qp < 16 || (Qp & (Qp - 1)) != 0)
    throw config_error("coefficient_band_decay: quadrature resolution below the floor");

  const double step = two_pi / Qp;
  std::size_t quad_total = 1;
  for (int r = 0; r < rank; ++r) quad_total *= static_cast<std::size_t>(Qp);

  // Weights shared by both paths: window product and Fourier phase on the
  // centered quadrature grid, plus the absolute-phase factor e^{-i Mu.Nu}.
  double dot_nu = 0.0;
  double bracket = 1.0;
  for (int j = 0; j < N; ++j)
    for (int ax = 0; ax < n; ++ax) {
      dot_nu += static_cast<double>(mu[j][ax]) * nu[j][ax];
      bracket += static_cast<double>(mu[j][ax]) * mu[j][ax];
    }
  const cd center_phase = std::exp(cd{0.0, -dot_nu});
  const double norm = std::pow(two_pi, -rank) * std::pow(step, rank);
  const double q_weight = std::pow(bracket, plan.order);

  std::vector<int> idx(rank, 0);
  std::vector<double> Xi(rank);
  auto quadrature_at = [&](const double* x, const std::function<cd(const double*)>& eval_core,
                           const std::function<cd(const double*, const double*)>& eval_full)
      -> cd {
    cd acc{0.0, 0.0};
    for (std::size_t flat = 0; flat < quad_total; ++flat) {
      std::size_t rem = flat;
      for (int r = rank - 1; r >= 0; --r) {
        idx[r] = static_cast<int>(rem % Qp);
        rem /= Qp;
      }
      double w = 1.0;
      double phase = 0.0;
      for (int r = 0; r < rank; ++r) {
        const double eta = (idx[r] - Qp / 2) * step;
        w *= plan.phi.axis_profile(eta);
        if (w == 0.0) break;
        const int j = r / n, ax = r % n;
        Xi[r] = nu[j][ax] + eta;
        phase += mu[j][ax] * eta;
      }
      if (w == 0.0) continue;
      const cd v = eval_core ? eval_core(Xi.data()) : eval_full(x, Xi.data());
      acc += v * w * std::exp(cd{0.0, -phase});
    }
    return acc * norm * center_phase;
  };

  GridFunction Qg = GridFunction::zeros(x_spec, Domain::space);
  if (sigma.frequency_core || sigma.x_independent) {
    const cd Q0 = q_weight * quadrature_at(nullptr, core_function(sigma), nullptr);
    int gidx[2] = {0, 0};
    double x[2] = {0.0, 0.0};
    for (std::size_t flat = 0; flat < Qg.samples.size(); ++flat) {
      if (sigma.space_factor) {
        Qg.unflatten(flat, gidx);
        for (int ax = 0; ax < n; ++ax) x[ax] = x_spec.coord(gidx[ax]);
        Qg.samples[flat] = Q0 * sigma.space_factor(x);
      } else {
        Qg.samples[flat] = Q0;
      }
    }
  } else {
    const std::uint64_t cost = sat_mul(quad_total, Qg.samples.size());
    if (cost > plan.cost_budget) {
      std::ostringstream msg;
      msg << "coefficient_band_decay: " << cost
          << " symbol evaluations needed for the per-x quadrature (budget "
          << plan.cost_budget << ")";
      throw config_error(msg.str());
    }
    int gidx[2] = {0, 0};
    double x[2] = {0.0, 0.0};
    for (std::size_t flat = 0; flat < Qg.samples.size(); ++flat) {
      Qg.unflatten(flat, gidx);
      for (int ax = 0; ax < n; ++ax) x[ax] = x_spec.coord(gidx[ax]);
      Qg.samples[flat] = q_weight * quadrature_at(x, nullptr, sigma.evaluator);
    }
  }

  BandDecayReport report;
  report.reference_orders.assign(reference_orders.begin(), reference_orders.end());
  const double zero_tol = 1e-14 * std::max(1.0, Qg.max_abs());
  std::vector<std::pair<double, double>> pts;
  for (int level = level_lo; level <= level_hi; ++level) {
    GridFunction band = band_project(level, family, Qg);
    const double v = band.max_abs();
    BandDecayRow row;
    row.level = level;
    row.value = v;
    row.skipped = v <= zero_tol;
    if (!row.skipped) pts.emplace_back(static_cast<double>(level), std::log2(v));
    report.rows.push_back(row);
  }
  if (pts.size() >= 3) {
    report.slope = least_squares_slope(pts);
    report.slope_valid = true;
  }
  return report;
}

int support_margin_exponent(int N) {
  if (N < 1) throw config_error("support_margin_exponent: arity must be >= 1");
  const int d = static_cast<int>(std::ceil(std::log2(static_cast<double>(N + 1)))) + 2;
  // A level-l x-band has spectral radius 2^{l+1}; each box projection adds at
  // most 3 per slot. 2^d >= 3N + 2 covers every level >= 0.
  if ((1 << d) < 3 * N + 2)
    throw compute_error("support_margin_exponent: margin formula under-covers");
  return d;
}

JointSupportCheck joint_support_check(const GridFunction& q_band,
                                      std::span<const GridFunction> projected,
                                      std::span<const LatticePoint> nu, int level,
                                      double tolerance) {
  const GridSpec spec = q_band.spec;
  const int n = spec.n;
  const int N = static_cast<int>(projected.size());
  if (static_cast<int>(nu.size()) != N)
    throw config_error("joint_support_check: need one box center per factor");
  GridFunction prod = to_domain(q_band, Domain::space);
  for (const auto& f : projected) {
    if (!(f.spec == spec))
      throw config_error("joint_support_check: factors live on different grids");
    GridFunction fs = to_domain(f, Domain::space);
    for (std::size_t i = 0; i < prod.samples.size(); ++i) prod.samples[i] *= fs.samples[i];
  }
  GridFunction hat = transform(prod, Domain::frequency);

  JointSupportCheck check;
  const int d = support_margin_exponent(N);
  check.radius = std::ldexp(1.0, level + d);
  double center[2] = {0.0, 0.0};
  for (int j = 0; j < N; ++j)
    for (int ax = 0; ax < n; ++ax) center[ax] += nu[j][ax];
  int idx[2] = {0, 0};
  for (std::size_t flat = 0; flat < hat.samples.size(); ++flat) {
    const double a = std::abs(hat.samples[flat]);
    if (a == 0.0) continue;
    hat.unflatten(flat, idx);
    bool inside = true;
    for (int ax = 0; ax < n; ++ax)
      inside = inside && std::abs(spec.freq(idx[ax]) - center[ax]) <= check.radius;
    if (inside)
      check.max_inside = std::max(check.max_inside, a);
    else
      check.max_outside = std::max(check.max_outside, a);
  }
  check.pass = check.max_outside <= tolerance * std::max(check.max_inside, 1e-300);
  return check;
}

}  // namespace mlpo
