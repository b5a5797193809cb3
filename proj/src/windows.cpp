#include "mlpo/windows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mlpo {

namespace {

double bump_h(double t) { return t <= 0.0 ? 0.0 : std::exp(-1.0 / t); }

// Monotone ramp used by every window; exactly 0 / 1 off the transition.
double step_raw(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double a = bump_h(t);
  double b = bump_h(1.0 - t);
  return a / (a + b);
}

// Radial cut for the generic family: 1 for r <= 1, 0 for r >= 2.
double cut_generic(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  return step_raw(2.0 - r);
}

// Radial cut for the sharp family, in log2 radius: 1 for log2 r <= 1/4,
// 0 for log2 r >= 3/4.
double cut_sharp(double r) {
  if (r <= 0.0) return 1.0;
  double t = std::log2(r);
  if (t <= 0.25) return 1.0;
  if (t >= 0.75) return 0.0;
  return step_raw((0.75 - t) / 0.5);
}

// Plateau bump for the tilde family, in log2 radius around level l:
// 1 for |t| <= 1/8, 0 for |t| >= 1/4.
double bump_tilde(double t) {
  double a = std::abs(t);
  if (a <= 0.125) return 1.0;
  if (a >= 0.25) return 0.0;
  return step_raw((0.25 - a) / 0.125);
}

double norm2(const double* xi, int n) {
  double s = 0.0;
  for (int a = 0; a < n; ++a) s += xi[a] * xi[a];
  return std::sqrt(s);
}

}  // namespace

double smooth_step(double t) { return step_raw(t); }

double DyadicWindow::eval(const double* xi, int n) const {
  return radial(norm2(xi, n));
}

SpectrumSampler DyadicWindow::sampler(int n) const {
  SpectrumSampler s;
  auto f = radial;
  s.eval = [f, n](const double* nu) { return cd{f(norm2(nu, n)), 0.0}; };
  s.support_radius = support_outer;  // sup-norm box contains the ball
  return s;
}

double WindowFamily::coverage_radius() const {
  switch (kind) {
    case FamilyKind::generic_lp:
      return std::ldexp(1.0, K);  // 2^K
    case FamilyKind::sharp_lp:
      return std::pow(2.0, K + 0.25);
    default:
      return 0.0;  // tilde family is not a partition
  }
}

WindowFamily make_lp_family(FamilyKind kind, int K, const GridSpec* spec) {
  if (K < 1) throw config_error("make_lp_family: K must be >= 1");
  WindowFamily fam;
  fam.kind = kind;
  fam.K = K;
  for (int k = 0; k <= K; ++k) {
    DyadicWindow w;
    w.k = k;
    double scale = std::ldexp(1.0, k);  // 2^k
    switch (kind) {
      case FamilyKind::generic_lp:
        if (k == 0) {
          w.radial = [](double r) { return cut_generic(r); };
          w.support_inner = 0.0;
          w.support_outer = 2.0;
          w.plateau_inner = 0.0;
          w.plateau_outer = 1.0;
        } else {
          w.radial = [scale](double r) {
            return cut_generic(r / scale) - cut_generic(2.0 * r / scale);
          };
          w.support_inner = scale / 2.0;
          w.support_outer = scale * 2.0;
        }
        break;
      case FamilyKind::sharp_lp:
        if (k == 0) {
          w.radial = [](double r) { return cut_sharp(r); };
          w.support_inner = 0.0;
          w.support_outer = std::pow(2.0, 0.75);
          w.plateau_inner = 0.0;
          w.plateau_outer = std::pow(2.0, 0.25);
        } else {
          w.radial = [scale](double r) {
            return cut_sharp(r / scale) - cut_sharp(2.0 * r / scale);
          };
          w.support_inner = scale * std::pow(2.0, -0.75);
          w.support_outer = scale * std::pow(2.0, 0.75);
          w.plateau_inner = scale * std::pow(2.0, -0.25);
          w.plateau_outer = scale * std::pow(2.0, 0.25);
        }
        break;
      case FamilyKind::sharp_lp_tilde:
        if (k == 0) {
          w.radial = [](double r) {
            if (r <= 0.0) return 1.0;
            double t = std::log2(r);
            if (t <= 0.125) return 1.0;
            if (t >= 0.25) return 0.0;
            return step_raw((0.25 - t) / 0.125);
          };
          w.support_inner = 0.0;
          w.support_outer = std::pow(2.0, 0.25);
          w.plateau_inner = 0.0;
          w.plateau_outer = std::pow(2.0, 0.125);
        } else {
          int kk = k;
          w.radial = [kk](double r) {
            if (r <= 0.0) return 0.0;
            return bump_tilde(std::log2(r) - kk);
          };
          w.support_inner = scale * std::pow(2.0, -0.25);
          w.support_outer = scale * std::pow(2.0, 0.25);
          w.plateau_inner = scale * std::pow(2.0, -0.125);
          w.plateau_outer = scale * std::pow(2.0, 0.125);
        }
        break;
    }
    fam.windows.push_back(std::move(w));
  }
  if (spec) {
    spec->validate();
    if (fam.windows.back().support_inner >= spec->nyquist())
      throw config_error(
          "make_lp_family: level K lies entirely beyond the representable band");
  }
  return fam;
}

namespace {

// One-dimensional profiles for the uniform windows.
double profile_phi_s3(double t) {
  // S(1+t) - S(t): supported in (-1,1), integer translates telescope to 1.
  return step_raw(1.0 + t) - step_raw(t);
}
double profile_phi_tilde_s3(double t) {
  double a = std::abs(t);
  if (a <= 1.0) return 1.0;
  if (a >= 3.0) return 0.0;
  return step_raw((3.0 - a) / 2.0);
}
double profile_phi_s4_raw(double t) {
  double a = std::abs(t);
  if (a <= 0.125) return 1.0;
  if (a >= 0.25) return 0.0;
  return step_raw((0.25 - a) * 8.0);
}
double profile_phi_tilde_s4(double t) {
  double a = std::abs(t);
  if (a <= 0.25) return 1.0;
  if (a >= 0.5) return 0.0;
  return step_raw((0.5 - a) * 4.0);
}
double profile_kappa(double t) {
  double a = std::abs(t);
  if (a <= 0.5) return 1.0;
  if (a >= 1.0) return 0.0;
  return step_raw((1.0 - a) * 2.0);
}

// min over |x|<=1 of (2pi)^{-1} * integral of profile_phi_s4_raw * cos(x xi).
// Simpson quadrature; the result fixes the s4 phi normalization so that
// |F^{-1} phi| >= 1 on [-1,1]^n.
double phi_s4_kernel_min() {
  static const double cached = [] {
    const int Q = 4096;  // panels over [-1/4, 1/4]
    const double lo = -0.25, hi = 0.25;
    const double h = (hi - lo) / Q;
    double min_val = std::numeric_limits<double>::infinity();
    for (int ix = 0; ix <= 256; ++ix) {
      double x = ix / 256.0;  // even in x: [0,1] suffices
      double acc = 0.0;
      for (int i = 0; i <= Q; ++i) {
        double xi = lo + i * h;
        double w = (i == 0 || i == Q) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * profile_phi_s4_raw(xi) * std::cos(x * xi);
      }
      acc *= h / 3.0 / (2.0 * std::numbers::pi);
      min_val = std::min(min_val, acc);
    }
    return min_val;
  }();
  return cached;
}

}  // namespace

double UniformWindow::eval_centered(const double* xi, int n) const {
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= axis_profile(xi[a]);
  return v;
}

double UniformWindow::eval_shifted(const double* xi, const int* mu, int n) const {
  double v = 1.0;
  for (int a = 0; a < n; ++a) v *= axis_profile(xi[a] - mu[a]);
  return v;
}

SpectrumSampler UniformWindow::sampler(int n, const int* mu) const {
  SpectrumSampler s;
  auto prof = axis_profile;
  std::array<double, 2> center = {0.0, 0.0};
  if (mu)
    for (int a = 0; a < n; ++a) center[a] = mu[a];
  s.eval = [prof, n, center](const double* nu) {
    double v = 1.0;
    for (int a = 0; a < n; ++a) v *= prof(nu[a] - center[a]);
    return cd{v, 0.0};
  };
  s.support_radius = half_width;
  s.support_center = center;
  return s;
}

UniformWindow make_uniform_window(UniformKind kind, UniformVariant variant) {
  UniformWindow w;
  w.kind = kind;
  w.variant = variant;
  switch (kind) {
    case UniformKind::phi:
      if (variant == UniformVariant::s3) {
        w.axis_profile = profile_phi_s3;
        w.half_width = 1.0;
        w.plateau_half_width = -1.0;
      } else {
        double c = 1.0 / phi_s4_kernel_min();
        w.axis_profile = [c](double t) { return c * profile_phi_s4_raw(t); };
        w.half_width = 0.25;
        w.plateau_half_width = -1.0;  // plateau exists but at height c, not 1
      }
      break;
    case UniformKind::phi_tilde:
      if (variant == UniformVariant::s3) {
        w.axis_profile = profile_phi_tilde_s3;
        w.half_width = 3.0;
        w.plateau_half_width = 1.0;
      } else {
        w.axis_profile = profile_phi_tilde_s4;
        w.half_width = 0.5;
        w.plateau_half_width = 0.25;
      }
      break;
    case UniformKind::kappa_wiener:
      w.axis_profile = profile_kappa;
      w.half_width = 1.0;
      w.plateau_half_width = 0.5;
      break;
  }
  return w;
}

// ---------------------------------------------------------------------------
// Verification.

void VerificationReport::add(VerificationCheck c) {
  c.pass = c.lower_bound ? (c.value >= c.threshold) : (c.value <= c.threshold);
  all_pass = all_pass && c.pass;
  checks.push_back(std::move(c));
}

std::string VerificationReport::summary() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.pass ? "pass" : "FAIL") << "  " << c.name << "  value="
        << format_double(c.value) << (c.lower_bound ? "  >=  " : "  <=  ")
        << format_double(c.threshold) << "\n";
  }
  return out.str();
}

namespace {

// sup of |d^o/dr^o profile| via spectral differentiation of the (even)
// radial profile sampled on a 1-D periodic grid that contains its support.
double radial_derivative_sup(const DyadicWindow& w, int order) {
  const int M = 8192;
  double P = 4.0 * std::max(w.support_outer, 1.0);
  std::vector<cd> data(M);
  for (int i = 0; i < M; ++i) {
    double r = (i - M / 2) * (P / M);
    data[i] = cd{w.radial(std::abs(r)), 0.0};
  }
  std::vector<int> dims{M};
  centered_fft(dims, P, true, data);
  for (int k = 0; k < M; ++k) {
    double omega = (k - M / 2) * (2.0 * std::numbers::pi / P);
    cd i_omega{0.0, omega};
    cd factor = (order == 1) ? i_omega : i_omega * i_omega;
    data[k] *= factor;
  }
  centered_fft(dims, P, false, data);
  double sup = 0.0;
  for (const cd& v : data) sup = std::max(sup, std::abs(v));
  return sup;
}

}  // namespace

VerificationReport verify_partition(const WindowFamily& family, const GridSpec& spec,
                                    std::uint64_t seed) {
  spec.validate();
  VerificationReport report;
  const int n = spec.n;
  const bool is_partition = family.kind != FamilyKind::sharp_lp_tilde;
  const double coverage = family.coverage_radius();

  auto family_sum = [&](const double* xi) {
    double s = 0.0;
    for (const auto& w : family.windows) s += w.eval(xi, n);
    return s;
  };

  if (is_partition) {
    // Partition sum on every representable bin inside the coverage ball.
    double max_dev = 0.0;
    int idx[2] = {0, 0};
    double nu[2] = {0.0, 0.0};
    GridFunction probe = GridFunction::zeros(spec, Domain::frequency);
    for (std::size_t i = 0; i < probe.samples.size(); ++i) {
      probe.unflatten(i, idx);
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) {
        nu[a] = spec.freq(idx[a]);
        r2 += nu[a] * nu[a];
      }
      if (std::sqrt(r2) <= coverage)
        max_dev = std::max(max_dev, std::abs(family_sum(nu) - 1.0));
    }
    report.add({"partition_sum_bins", max_dev, 1e-12});

    // And on random off-bin frequencies.
    RngStream rng(seed, "verify_partition");
    double max_dev_r = 0.0;
    for (int t = 0; t < 10000; ++t) {
      double xi[2] = {0.0, 0.0};
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) {
        xi[a] = (2.0 * rng.uniform() - 1.0) * coverage;
        r2 += xi[a] * xi[a];
      }
      if (std::sqrt(r2) > coverage) continue;
      max_dev_r = std::max(max_dev_r, std::abs(family_sum(xi) - 1.0));
    }
    report.add({"partition_sum_random", max_dev_r, 1e-12});
  }

  // Bin-exact support and plateau checks, and the [0,1] range.
  double support_leak = 0.0, plateau_dev = 0.0, range_dev = 0.0;
  {
    int idx[2] = {0, 0};
    double nu[2] = {0.0, 0.0};
    GridFunction probe = GridFunction::zeros(spec, Domain::frequency);
    for (std::size_t i = 0; i < probe.samples.size(); ++i) {
      probe.unflatten(i, idx);
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) {
        nu[a] = spec.freq(idx[a]);
        r2 += nu[a] * nu[a];
      }
      double r = std::sqrt(r2);
      for (const auto& w : family.windows) {
        double v = w.radial(r);
        range_dev = std::max(range_dev, std::max(-v, v - 1.0));
        if (r < w.support_inner || r > w.support_outer)
          support_leak = std::max(support_leak, std::abs(v));
        if (w.plateau_inner >= 0.0 && r >= w.plateau_inner && r <= w.plateau_outer)
          plateau_dev = std::max(plateau_dev, std::abs(v - 1.0));
      }
    }
  }
  report.add({"support_exact_bins", support_leak, 0.0});
  report.add({"plateau_exact_bins", plateau_dev, 0.0});
  report.add({"value_range", range_dev, 0.0});

  // Dilation-derivative fits: sup 2^{k|a|} |d^a w_k| should be level-independent
  // for the dilated members k >= 1. Reported: the fitted constant (max over k)
  // and the max/min variation across k.
  for (int order = 1; order <= 2; ++order) {
    double cmax = 0.0, cmin = std::numeric_limits<double>::infinity();
    for (const auto& w : family.windows) {
      if (w.k == 0) continue;
      double v = std::ldexp(1.0, w.k * order) * radial_derivative_sup(w, order);
      cmax = std::max(cmax, v);
      cmin = std::min(cmin, v);
    }
    std::string tag = "deriv_order" + std::to_string(order);
    report.add({tag + "_fitted_constant", cmax, 1e12});
    report.add({tag + "_variation", cmax / cmin, 2.0});
  }

  if (family.kind == FamilyKind::sharp_lp_tilde) {
    // Product identity against the sharp partition: w_k * wt_l == [k==l] wt_l.
    WindowFamily sharp = make_lp_family(FamilyKind::sharp_lp, family.K);
    double prod_dev = 0.0;
    int idx[2] = {0, 0};
    double nu[2] = {0.0, 0.0};
    GridFunction probe = GridFunction::zeros(spec, Domain::frequency);
    for (std::size_t i = 0; i < probe.samples.size(); ++i) {
      probe.unflatten(i, idx);
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) {
        nu[a] = spec.freq(idx[a]);
        r2 += nu[a] * nu[a];
      }
      double r = std::sqrt(r2);
      for (const auto& wt : family.windows) {
        double tv = wt.radial(r);
        if (tv == 0.0) continue;
        for (const auto& wk : sharp.windows) {
          double expected = (wk.k == wt.k) ? tv : 0.0;
          prod_dev = std::max(prod_dev, std::abs(wk.radial(r) * tv - expected));
        }
      }
    }
    report.add({"tilde_product_identity", prod_dev, 0.0});

    // Inverse-transform L1 stability across levels (dilation invariance).
    double l1_max = 0.0, l1_min = std::numeric_limits<double>::infinity();
    for (const auto& wt : family.windows) {
      if (wt.k == 0 || wt.support_outer > spec.nyquist()) continue;
      GridFunction hat = GridFunction::zeros(spec, Domain::frequency);
      int bidx[2] = {0, 0};
      for (std::size_t i = 0; i < hat.samples.size(); ++i) {
        hat.unflatten(i, bidx);
        double rr = 0.0;
        for (int a = 0; a < n; ++a) {
          double f = spec.freq(bidx[a]);
          rr += f * f;
        }
        hat.samples[i] = cd{wt.radial(std::sqrt(rr)), 0.0};
      }
      GridFunction kernel = transform(hat, Domain::space);
      double l1 = 0.0;
      double cell = std::pow(spec.cell_width(), n);
      for (const cd& v : kernel.samples) l1 += std::abs(v) * cell;
      l1_max = std::max(l1_max, l1);
      l1_min = std::min(l1_min, l1);
    }
    if (std::isfinite(l1_min) && l1_min > 0.0)
      report.add({"tilde_kernel_l1_variation", l1_max / l1_min, 3.0});
  }

  return report;
}

VerificationReport verify_partition(const UniformWindow& window, const GridSpec& spec,
                                    std::uint64_t seed) {
  spec.validate();
  VerificationReport report;
  RngStream rng(seed, "verify_uniform");

  // 1-D profile checks (tensor structure makes per-axis checks sufficient).
  double support_leak = 0.0, range_lo = 0.0, range_hi = 0.0, plateau_dev = 0.0;
  double height = (window.kind == UniformKind::phi && window.variant == UniformVariant::s4)
                      ? window.axis_profile(0.0)
                      : 1.0;
  for (int i = 0; i <= 20000; ++i) {
    double t = (i / 20000.0 - 0.5) * 4.0 * window.half_width;
    double v = window.axis_profile(t);
    range_lo = std::max(range_lo, -v);
    range_hi = std::max(range_hi, v - height);
    if (std::abs(t) > window.half_width) support_leak = std::max(support_leak, std::abs(v));
    if (window.plateau_half_width > 0.0 && std::abs(t) <= window.plateau_half_width)
      plateau_dev = std::max(plateau_dev, std::abs(v - 1.0));
  }
  report.add({"support_exact", support_leak, 0.0});
  report.add({"range_nonnegative", range_lo, 0.0});
  report.add({"range_bounded", range_hi, 1e-12});
  if (window.plateau_half_width > 0.0) report.add({"plateau_exact", plateau_dev, 0.0});

  // Lattice translate sums at random points (per axis; tensor products follow).
  int reach = static_cast<int>(std::ceil(window.half_width)) + 1;
  auto translate_sum = [&](double t) {
    double s = 0.0;
    int base = static_cast<int>(std::floor(t));
    for (int j = base - reach; j <= base + reach; ++j) s += window.axis_profile(t - j);
    return s;
  };
  if (window.kind == UniformKind::phi && window.variant == UniformVariant::s3) {
    double dev = 0.0;
    for (int i = 0; i < 10000; ++i)
      dev = std::max(dev, std::abs(translate_sum((rng.uniform() - 0.5) * 20.0) - 1.0));
    report.add({"translate_sum_one", dev, 1e-12});
  }
  if (window.kind == UniformKind::kappa_wiener) {
    double min_sum = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 10000; ++i)
      min_sum = std::min(min_sum, translate_sum((rng.uniform() - 0.5) * 20.0));
    VerificationCheck c{"translate_sum_lower_bound", min_sum, 1.0, true};
    report.add(c);
  }
  if (window.kind == UniformKind::phi && window.variant == UniformVariant::s4) {
    // |F^{-1} phi| >= 1 on [-1,1]^n reduces to the per-axis kernel minimum.
    const int Q = 4096;
    const double lo = -window.half_width, hi = window.half_width;
    const double h = (hi - lo) / Q;
    double min_val = std::numeric_limits<double>::infinity();
    for (int ix = 0; ix <= 200; ++ix) {
      double x = ix / 200.0;
      double acc = 0.0;
      for (int i = 0; i <= Q; ++i) {
        double xi = lo + i * h;
        double wq = (i == 0 || i == Q) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += wq * window.axis_profile(xi) * std::cos(x * xi);
      }
      acc *= h / 3.0 / (2.0 * std::numbers::pi);
      min_val = std::min(min_val, acc);
    }
    VerificationCheck c{"inverse_kernel_lower_bound", min_val, 1.0 - 1e-9, true};
    report.add(c);
  }
  (void)spec;
  return report;
}

// --- projection operators ----------------------------------------------------

GridFunction band_project(int k, const WindowFamily& family, const GridFunction& f) {
  if (k < 0 || static_cast<std::size_t>(k) >= family.windows.size())
    throw config_error("band_project: level index out of range");
  return apply_multiplier(family.windows[k].sampler(f.spec.n), f);
}

GridFunction box_project(const std::array<int, 2>& mu, const SpectrumSampler& kappa,
                         const GridFunction& f) {
  if (!kappa.support_radius)
    throw config_error("box_project: kappa must declare a finite support radius");
  SpectrumSampler shifted;
  shifted.support_radius = kappa.support_radius;
  std::array<double, 2> center =
      kappa.support_center.value_or(std::array<double, 2>{0.0, 0.0});
  center[0] += mu[0];
  center[1] += mu[1];
  shifted.support_center = center;
  const int n = f.spec.n;
  const std::array<int, 2> shift = mu;
  const std::function<cd(const double*)> base = kappa.eval;
  shifted.eval = [base, shift, n](const double* nu) {
    double rel[2] = {0.0, 0.0};
    for (int a = 0; a < n; ++a) rel[a] = nu[a] - shift[a];
    return base(rel);
  };
  return apply_multiplier(shifted, f);
}

}  // namespace mlpo
