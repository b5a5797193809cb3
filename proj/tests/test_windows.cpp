#include <doctest.h>

#include <cmath>
#include <complex>

#include "mlpo/grid.hpp"
#include "mlpo/util.hpp"
#include "mlpo/windows.hpp"

using namespace mlpo;

namespace {

GridSpec spec1d(int points, double T) {
  GridSpec spec;
  spec.n = 1;
  spec.points_per_dim = points;
  spec.scale_T = T;
  spec.validate();
  return spec;
}

double family_sum(const WindowFamily& family, double r) {
  double s = 0.0;
  for (const DyadicWindow& w : family.windows) s += w.radial(r);
  return s;
}

}  // namespace

TEST_SUITE("windows") {

TEST_CASE("smooth_step is a flat-ended ramp") {
  CHECK(smooth_step(-0.5) == 0.0);
  CHECK(smooth_step(0.0) == 0.0);
  CHECK(smooth_step(1.0) == 1.0);
  CHECK(smooth_step(1.5) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  // Monotone on [0, 1].
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    double v = smooth_step(i / 20.0);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("dyadic families partition the coverage range") {
  for (FamilyKind kind : {FamilyKind::generic_lp, FamilyKind::sharp_lp}) {
    WindowFamily family = make_lp_family(kind, 8);
    RngStream rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      double r = rng.uniform() * family.coverage_radius();
      double total = family_sum(family, r);
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
    // Outside the coverage radius the sum must fall below one.
    CHECK(family_sum(family, family.coverage_radius() * 1.5) < 1.0);
  }
}

TEST_CASE("sharp family has the pinned support and plateau radii") {
  WindowFamily family = make_lp_family(FamilyKind::sharp_lp, 6);
  for (const DyadicWindow& w : family.windows) {
    if (w.k == 0) continue;  // the low window fills the middle
    double scale = std::pow(2.0, w.k);
    CHECK(w.support_inner == doctest::Approx(scale * std::pow(2.0, -0.75)));
    CHECK(w.support_outer == doctest::Approx(scale * std::pow(2.0, 0.75)));
    CHECK(w.plateau_inner == doctest::Approx(scale * std::pow(2.0, -0.25)));
    CHECK(w.plateau_outer == doctest::Approx(scale * std::pow(2.0, 0.25)));
    // Exactly one on the plateau, zero outside the support.
    CHECK(w.radial(w.plateau_inner) == 1.0);
    CHECK(w.radial(0.5 * (w.plateau_inner + w.plateau_outer)) == 1.0);
    CHECK(w.radial(w.plateau_outer) == 1.0);
    CHECK(w.radial(w.support_outer * 1.0000001) == 0.0);
    CHECK(w.radial(w.support_inner * 0.9999999) == 0.0);
  }
}

TEST_CASE("tilde windows are flat on their companions") {
  WindowFamily family = make_lp_family(FamilyKind::sharp_lp, 6);
  WindowFamily tilde = make_lp_family(FamilyKind::sharp_lp_tilde, 6);
  REQUIRE(family.windows.size() == tilde.windows.size());
  RngStream rng(6);
  for (std::size_t i = 1; i < family.windows.size(); ++i) {
    const DyadicWindow& w = family.windows[i];
    const DyadicWindow& t = tilde.windows[i];
    for (int trial = 0; trial < 50; ++trial) {
      double r = w.support_inner +
                 rng.uniform() * (w.support_outer - w.support_inner);
      if (w.radial(r) > 0.0) CHECK(t.radial(r) == 1.0);
    }
  }
}

TEST_CASE("uniform windows have the pinned supports") {
  UniformWindow phi3 = make_uniform_window(UniformKind::phi, UniformVariant::s3);
  CHECK(phi3.half_width == doctest::Approx(1.0));
  // Integer translates sum to one.
  RngStream rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    double xi = (rng.uniform() - 0.5) * 10.0;
    double total = 0.0;
    for (int k = -7; k <= 7; ++k) total += phi3.axis_profile(xi - k);
    CHECK(std::abs(total - 1.0) < 1e-12);
  }

  UniformWindow tilde3 = make_uniform_window(UniformKind::phi_tilde, UniformVariant::s3);
  CHECK(tilde3.half_width == doctest::Approx(3.0));
  CHECK(tilde3.axis_profile(0.99) == 1.0);
  CHECK(tilde3.axis_profile(-1.0) == 1.0);
  CHECK(tilde3.axis_profile(3.01) == 0.0);

  UniformWindow phi4 = make_uniform_window(UniformKind::phi, UniformVariant::s4);
  CHECK(phi4.half_width == doctest::Approx(0.25));
  CHECK(phi4.axis_profile(0.26) == 0.0);

  UniformWindow tilde4 = make_uniform_window(UniformKind::phi_tilde, UniformVariant::s4);
  CHECK(tilde4.half_width == doctest::Approx(0.5));
  CHECK(tilde4.axis_profile(0.24) == 1.0);
  CHECK(tilde4.axis_profile(0.51) == 0.0);

  UniformWindow kappa = make_uniform_window(UniformKind::kappa_wiener, UniformVariant::s3);
  CHECK(kappa.half_width == doctest::Approx(1.0));
  CHECK(kappa.axis_profile(0.49) == 1.0);
  CHECK(kappa.axis_profile(-0.5) == 1.0);
  CHECK(kappa.axis_profile(1.01) == 0.0);
}

TEST_CASE("verification battery passes for well-formed families") {
  GridSpec spec = spec1d(2048, 4.0);
  for (FamilyKind kind :
       {FamilyKind::generic_lp, FamilyKind::sharp_lp, FamilyKind::sharp_lp_tilde}) {
    WindowFamily family = make_lp_family(kind, 6, &spec);
    VerificationReport report = verify_partition(family, spec, 1);
    CHECK(report.all_pass);
  }
  for (UniformKind kind : {UniformKind::phi, UniformKind::phi_tilde,
                           UniformKind::kappa_wiener}) {
    for (UniformVariant variant : {UniformVariant::s3, UniformVariant::s4}) {
      if (kind == UniformKind::kappa_wiener && variant == UniformVariant::s4) continue;
      UniformWindow window = make_uniform_window(kind, variant);
      VerificationReport report = verify_partition(window, spec, 1);
      CHECK(report.all_pass);
    }
  }
}

TEST_CASE("verification battery flags a tampered family") {
  GridSpec spec = spec1d(2048, 4.0);
  WindowFamily family = make_lp_family(FamilyKind::sharp_lp, 6, &spec);
  DyadicWindow& w = family.windows[3];
  auto original = w.radial;
  w.radial = [original](double r) { return 1.01 * original(r); };
  VerificationReport report = verify_partition(family, spec, 1);
  CHECK_FALSE(report.all_pass);
}

TEST_CASE("band projection keeps plateau bins and kills far bins") {
  GridSpec spec = spec1d(512, 1.0);
  WindowFamily family = make_lp_family(FamilyKind::sharp_lp, 6, &spec);
  // One exponential sitting on the level-4 plateau: |nu| = 16.
  GridFunction f = GridFunction::zeros(spec, Domain::space);
  for (int i = 0; i < spec.points_per_dim; ++i)
    f.samples[static_cast<std::size_t>(i)] = std::exp(cd{0.0, 16.0 * spec.coord(i)});
  GridFunction kept = band_project(4, family, f);
  GridFunction killed = band_project(2, family, f);
  double kept_err = 0.0, killed_mass = 0.0;
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    kept_err = std::max(kept_err, std::abs(kept.samples[i] - f.samples[i]));
    killed_mass = std::max(killed_mass, std::abs(killed.samples[i]));
  }
  CHECK(kept_err < 1e-10);
  CHECK(killed_mass < 1e-12);
}

TEST_CASE("box projection selects unit frequency boxes") {
  GridSpec spec = spec1d(256, 1.0);
  UniformWindow kappa = make_uniform_window(UniformKind::kappa_wiener, UniformVariant::s3);
  GridFunction f = GridFunction::zeros(spec, Domain::space);
  for (int i = 0; i < spec.points_per_dim; ++i)
    f.samples[static_cast<std::size_t>(i)] = std::exp(cd{0.0, 9.0 * spec.coord(i)}) +
                                             std::exp(cd{0.0, -5.0 * spec.coord(i)});
  // kappa(nu - mu) equals one at nu = mu, so the mu = 9 box keeps exactly
  // the first exponential.
  GridFunction boxed = box_project({9, 0}, kappa.sampler(1), f);
  double err = 0.0;
  for (int i = 0; i < spec.points_per_dim; ++i) {
    cd expected = std::exp(cd{0.0, 9.0 * spec.coord(i)});
    err = std::max(err, std::abs(boxed.samples[static_cast<std::size_t>(i)] - expected));
  }
  CHECK(err < 1e-10);
}

}  // TEST_SUITE
