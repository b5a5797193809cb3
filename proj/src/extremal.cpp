#include "mlpo/extremal.hpp"

#include <algorithm>
#include <cmath>

namespace mlpo {

namespace {

double point_norm(const LatticePoint& v) {
  return std::sqrt(static_cast<double>(v[0]) * v[0] + static_cast<double>(v[1]) * v[1]);
}

LatticePoint point_add(const LatticePoint& a, const LatticePoint& b) {
  return {a[0] + b[0], a[1] + b[1]};
}

LatticePoint point_neg(const LatticePoint& a) { return {-a[0], -a[1]}; }

// Integer points v with 2^(level-delta) <= |v| <= 2^(level+delta), in
// lexicographic order.
std::vector<LatticePoint> shell_points(int n, double level, double delta) {
  double r_lo = std::exp2(level - delta);
  double r_hi = std::exp2(level + delta);
  int box = static_cast<int>(std::floor(r_hi));
  std::vector<LatticePoint> out;
  if (n == 1) {
    for (int v = -box; v <= box; ++v) {
      double r = std::abs(v);
      if (r < r_lo || r > r_hi) continue;
      out.push_back({v, 0});
    }
  } else {
    for (int v0 = -box; v0 <= box; ++v0)
      for (int v1 = -box; v1 <= box; ++v1) {
        double r = point_norm({v0, v1});
        if (r < r_lo || r > r_hi) continue;
        out.push_back({v0, v1});
      }
  }
  return out;
}

// The oscillatory lattice coefficient for frequency nu.
cd wainger_coefficient(const WaingerParams& params, double r) {
  return std::exp(-params.epsilon * r) * std::pow(r, -params.b) *
         std::exp(cd{0.0, std::pow(r, params.a)});
}

void check_integer_scale(const GridSpec& spec, const char* who) {
  double t_int = std::round(spec.scale_T);
  if (std::abs(spec.scale_T - t_int) > 1e-12 || t_int < 1.0)
    throw config_error(std::string(who) + ": scale_T must be a positive integer");
}

}  // namespace

// --- oscillatory lattice sums ------------------------------------------------

void WaingerParams::validate() const {
  if (n != 1 && n != 2) throw config_error("WaingerParams: n must be 1 or 2");
  if (!(a > 0.0 && a < 1.0)) throw config_error("WaingerParams: a must lie in (0,1)");
  if (!(b > 0.0)) throw config_error("WaingerParams: b must be positive");
  if (!(epsilon >= 0.0)) throw config_error("WaingerParams: epsilon must be >= 0");
  if (V_max < 1) throw config_error("WaingerParams: V_max must be >= 1");
  if (!p.is_infinity() && p.to_double() < 1.0)
    throw config_error("WaingerParams: p must be >= 1");
}

bool WaingerParams::above_threshold() const { return b > wainger_threshold(a, p, n); }

double wainger_threshold(double a, const LebesgueExponent& p, int n) {
  if (!(a > 0.0 && a < 1.0)) throw config_error("wainger_threshold: a must lie in (0,1)");
  if (!p.is_infinity() && p.to_double() < 1.0)
    throw config_error("wainger_threshold: requires p >= 1");
  double inv_p = p.is_infinity() ? 0.0 : p.reciprocal().value();
  double half_n = 0.5 * n;
  return (1.0 - a) * (half_n - n * inv_p) + half_n;
}

GridFunction make_wainger_spectrum(const WaingerParams& params, const GridSpec& spec) {
  params.validate();
  spec.validate();
  if (spec.n != params.n)
    throw config_error("make_wainger_spectrum: dimension mismatch with grid");
  check_integer_scale(spec, "make_wainger_spectrum");
  int max_freq = static_cast<int>(std::floor((spec.points_per_dim / 2 - 1) / spec.scale_T));
  if (params.V_max > max_freq)
    throw config_error("make_wainger_spectrum: V_max exceeds the representable band");

  GridFunction hat = GridFunction::zeros(spec, Domain::frequency);
  double amp = std::pow(spec.period(), spec.n);  // Fourier coefficient -> bin value
  const int V = params.V_max;
  auto put = [&](const LatticePoint& v) {
    double r = point_norm(v);
    if (r == 0.0 || r > V) return;
    cd c = wainger_coefficient(params, r);
    int idx[2] = {0, 0};
    for (int axis = 0; axis < spec.n; ++axis)
      idx[axis] = spec.freq_index(static_cast<double>(v[axis]));
    hat.samples[hat.flat_index(idx)] += amp * c;
  };
  if (params.n == 1) {
    for (int v = -V; v <= V; ++v) put({v, 0});
  } else {
    for (int v0 = -V; v0 <= V; ++v0)
      for (int v1 = -V; v1 <= V; ++v1) put({v0, v1});
  }
  return hat;
}

GridFunction make_wainger(const WaingerParams& params, const UniformWindow& phi,
                          const GridSpec& spec) {
  GridFunction f = transform(make_wainger_spectrum(params, spec), Domain::space);
  int idx[2] = {0, 0};
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    f.unflatten(i, idx);
    double w = 1.0;
    for (int axis = 0; axis < spec.n; ++axis) w *= phi.axis_profile(spec.coord(idx[axis]));
    f.samples[i] *= w;
  }
  return f;
}

GridFunction make_wainger_modulated(const WaingerParams& params,
                                    const UniformWindow& envelope, const GridSpec& spec) {
  params.validate();
  spec.validate();
  if (spec.n != params.n)
    throw config_error("make_wainger_modulated: dimension mismatch with grid");
  check_integer_scale(spec, "make_wainger_modulated");
  if (envelope.half_width > 0.5 + 1e-12)
    throw config_error("make_wainger_modulated: envelope wider than the unit cell");
  double band = params.V_max + envelope.half_width;
  if (band > spec.nyquist())
    throw config_error("make_wainger_modulated: V_max exceeds the representable band");

  GridFunction hat = GridFunction::zeros(spec, Domain::frequency);
  double amp = std::pow(spec.period(), spec.n);
  const int V = params.V_max;
  const int M = spec.points_per_dim;
  // Bins within the envelope box around integer frequency nu.
  int reach = static_cast<int>(std::floor(envelope.half_width * spec.scale_T + 1e-9));
  auto put = [&](const LatticePoint& v) {
    double r = point_norm(v);
    if (r == 0.0 || r > V) return;
    cd c = amp * wainger_coefficient(params, r);
    int center[2] = {0, 0};
    for (int axis = 0; axis < spec.n; ++axis)
      center[axis] = spec.freq_index(static_cast<double>(v[axis]));
    int idx[2] = {0, 0};
    double xi_rel[2] = {0.0, 0.0};
    if (spec.n == 1) {
      for (int d0 = -reach; d0 <= reach; ++d0) {
        idx[0] = center[0] + d0;
        if (idx[0] < 0 || idx[0] >= M) continue;
        xi_rel[0] = spec.freq(idx[0]) - v[0];
        double w = envelope.eval_centered(xi_rel, 1);
        if (w != 0.0) hat.samples[hat.flat_index(idx)] += c * w;
      }
    } else {
      for (int d0 = -reach; d0 <= reach; ++d0)
        for (int d1 = -reach; d1 <= reach; ++d1) {
          idx[0] = center[0] + d0;
          idx[1] = center[1] + d1;
          if (idx[0] < 0 || idx[0] >= M || idx[1] < 0 || idx[1] >= M) continue;
          xi_rel[0] = spec.freq(idx[0]) - v[0];
          xi_rel[1] = spec.freq(idx[1]) - v[1];
          double w = envelope.eval_centered(xi_rel, 2);
          if (w != 0.0) hat.samples[hat.flat_index(idx)] += c * w;
        }
    }
  };
  if (params.n == 1) {
    for (int v = -V; v <= V; ++v) put({v, 0});
  } else {
    for (int v0 = -V; v0 <= V; ++v0)
      for (int v1 = -V; v1 <= V; ++v1) put({v0, v1});
  }
  return hat;
}

// --- constrained lattice tuple sets ------------------------------------------

int default_gap(int N, double delta) {
  if (N <= 2) return 3;
  // Worst case: the N-2 low-shell entries all pull the determined entry
  // toward the inner slack boundary 2^(ell - 2 delta).
  double bound = std::exp2(-delta) - std::exp2(-2.0 * delta);
  int L = 3;
  while ((N - 2) * std::exp2(-L + delta) > bound) ++L;
  return L;
}

void LatticeTupleParams::validate() const {
  if (n != 1 && n != 2) throw config_error("LatticeTupleParams: n must be 1 or 2");
  if (N < 2) throw config_error("LatticeTupleParams: N must be >= 2");
  if (ell < 1) throw config_error("LatticeTupleParams: ell must be >= 1");
  if (!(delta > 0.0)) throw config_error("LatticeTupleParams: delta must be positive");
  if (gap != -1 && gap < 0) throw config_error("LatticeTupleParams: gap must be >= 0");
  if (N >= 3 && ell - effective_gap() < 1)
    throw config_error("LatticeTupleParams: ell too small for the low shells");
}

int LatticeTupleParams::effective_gap() const {
  return gap == -1 ? default_gap(N, delta) : gap;
}

std::uint64_t for_each_tuple(const LatticeTupleParams& params,
                             const std::function<void(std::span<const LatticePoint>)>& fn) {
  params.validate();
  const int N = params.N;
  const int low_count = N - 2;
  const double slack_lo = std::exp2(params.ell - 2.0 * params.delta);
  const double slack_hi = std::exp2(params.ell + 2.0 * params.delta);

  std::vector<LatticePoint> primary = shell_points(params.n, params.ell, params.delta);
  std::vector<LatticePoint> low;
  if (low_count > 0)
    low = shell_points(params.n, params.ell - params.effective_gap(), params.delta);
  if (primary.empty() || (low_count > 0 && low.empty()))
    throw config_error("for_each_tuple: a shell contains no lattice points; increase delta");

  std::uint64_t count = 0;
  std::vector<LatticePoint> tuple(params.kind == TupleKind::sum_zero ? N : N - 1);
  std::vector<std::size_t> odo(low_count, 0);

  auto low_sum = [&]() {
    LatticePoint s{0, 0};
    for (int j = 0; j < low_count; ++j) s = point_add(s, low[odo[j]]);
    return s;
  };
  auto advance = [&]() {
    for (int j = low_count - 1; j >= 0; --j) {
      if (++odo[j] < low.size()) return true;
      odo[j] = 0;
    }
    return false;
  };

  for (const LatticePoint& head : primary) {
    std::fill(odo.begin(), odo.end(), 0);
    bool more = true;
    while (more) {
      LatticePoint rest = low_sum();
      if (params.kind == TupleKind::sum_zero) {
        // head = mu_2; mu_1 determined by the zero-sum constraint.
        LatticePoint mu1 = point_neg(point_add(head, rest));
        double r = point_norm(mu1);
        if (r < slack_lo || r > slack_hi)
          throw compute_error("for_each_tuple: determined entry left its shell");
        tuple[0] = mu1;
        tuple[1] = head;
        for (int j = 0; j < low_count; ++j) tuple[2 + j] = low[odo[j]];
      } else {
        // head = nu (the prescribed sum); mu_2 determined.
        LatticePoint mu2 = point_add(head, point_neg(rest));
        double r = point_norm(mu2);
        if (r < slack_lo || r > slack_hi)
          throw compute_error("for_each_tuple: determined entry left its shell");
        tuple[0] = mu2;
        for (int j = 0; j < low_count; ++j) tuple[1 + j] = low[odo[j]];
      }
      fn(std::span<const LatticePoint>(tuple.data(), tuple.size()));
      ++count;
      more = low_count > 0 ? advance() : false;
    }
  }
  return count;
}

std::vector<LatticeTuple> enumerate_tuples(const LatticeTupleParams& params) {
  std::vector<LatticeTuple> out;
  for_each_tuple(params, [&](std::span<const LatticePoint> mu) {
    if (out.size() >= 20'000'000)
      throw compute_error("enumerate_tuples: set too large; use for_each_tuple");
    LatticeTuple t;
    t.mu.assign(mu.begin(), mu.end());
    out.push_back(std::move(t));
  });
  return out;
}

CoefficientSums coefficient_sums(const LatticeTupleParams& params, double m,
                                 const std::vector<double>& b, double epsilon) {
  params.validate();
  if (!(epsilon >= 0.0)) throw config_error("coefficient_sums: epsilon must be >= 0");
  std::size_t stored = params.kind == TupleKind::sum_zero ? params.N : params.N - 1;
  // For free_sum sets a full-length exponent list is also accepted; the
  // leading slot carries no lattice translate and its entry is skipped.
  std::size_t b_from = 0;
  if (b.size() == stored) {
    b_from = 0;
  } else if (params.kind == TupleKind::free_sum &&
             b.size() == static_cast<std::size_t>(params.N)) {
    b_from = 1;
  } else {
    throw config_error("coefficient_sums: need one decay exponent per stored entry");
  }

  CoefficientSums sums;
  for_each_tuple(params, [&](std::span<const LatticePoint> mu) {
    double norm2 = 1.0;
    for (const LatticePoint& v : mu) {
      double r = point_norm(v);
      norm2 += r * r;
    }
    double w = std::pow(norm2, 0.5 * m);
    for (std::size_t j = 0; j < mu.size(); ++j) {
      double r = point_norm(mu[j]);
      w *= std::exp(-epsilon * r) * std::pow(r, -b[b_from + j]);
    }
    sums.count += 1;
    sums.total += w;
    sums.l2_weights += w * w;
    if (params.kind == TupleKind::free_sum) {
      LatticePoint nu{0, 0};
      for (const LatticePoint& v : mu) nu = point_add(nu, v);
      sums.per_sum[nu] += w;
    }
  });
  double l2 = 0.0;
  for (const auto& [nu, d] : sums.per_sum) l2 += d * d;
  sums.l2_per_sum = std::sqrt(l2);
  sums.l2_weights = std::sqrt(sums.l2_weights);
  return sums;
}

int rademacher_sign(std::uint64_t seed, std::span<const LatticePoint> mu) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the entries
  auto feed = [&h](std::uint64_t v) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xffull;
      h *= 1099511628211ull;
    }
  };
  for (const LatticePoint& v : mu) {
    feed(static_cast<std::uint64_t>(static_cast<std::uint32_t>(v[0])));
    feed(static_cast<std::uint64_t>(static_cast<std::uint32_t>(v[1])));
  }
  return (mix64(seed ^ h) >> 63) ? -1 : 1;
}

}  // namespace mlpo
