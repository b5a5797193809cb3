#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>

#include "mlpo/grid.hpp"
#include "mlpo/util.hpp"

using namespace mlpo;

namespace {

GridSpec spec1d(int points, double T = 1.0) {
  GridSpec spec;
  spec.n = 1;
  spec.points_per_dim = points;
  spec.scale_T = T;
  spec.validate();
  return spec;
}

GridFunction random_space(const GridSpec& spec, std::uint64_t seed) {
  GridFunction f = GridFunction::zeros(spec, Domain::space);
  RngStream rng(seed);
  for (cd& v : f.samples) v = cd{rng.uniform() - 0.5, rng.uniform() - 0.5};
  return f;
}

// A single complex exponential sampled in space.
GridFunction exponential(const GridSpec& spec, double nu) {
  GridFunction f = GridFunction::zeros(spec, Domain::space);
  for (int i = 0; i < spec.points_per_dim; ++i)
    f.samples[static_cast<std::size_t>(i)] = std::exp(cd{0.0, nu * spec.coord(i)});
  return f;
}

double max_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    m = std::max(m, std::abs(a.samples[i] - b.samples[i]));
  return m;
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("grid geometry is centered") {
  GridSpec spec = spec1d(8, 1.0);
  CHECK(spec.period() == doctest::Approx(2.0 * std::numbers::pi));
  CHECK(spec.coord(4) == doctest::Approx(0.0));
  CHECK(spec.coord(0) == doctest::Approx(-std::numbers::pi));
  CHECK(spec.freq(4) == doctest::Approx(0.0));
  CHECK(spec.freq(0) == doctest::Approx(-4.0));
  CHECK(spec.freq_step() == doctest::Approx(1.0));
  CHECK(spec.nyquist() == doctest::Approx(4.0));
  CHECK(spec.freq_index(-4.0) == 0);
  CHECK(spec.freq_index(3.0) == 7);
  CHECK(spec.freq_index(0.0) == 4);
  CHECK_THROWS_AS(spec.freq_index(0.5), config_error);
  CHECK_THROWS_AS(spec.freq_index(4.0), config_error);  // just past the band

  GridSpec wide = spec1d(8, 2.0);
  CHECK(wide.freq_step() == doctest::Approx(0.5));
  CHECK(wide.freq_index(0.5) == 5);
}

TEST_CASE("spec validation rejects bad shapes") {
  GridSpec spec;
  spec.n = 1;
  spec.points_per_dim = 12;  // not a power of two
  CHECK_THROWS_AS(spec.validate(), config_error);
  spec.points_per_dim = 2;  // too small
  CHECK_THROWS_AS(spec.validate(), config_error);
  spec.points_per_dim = 8;
  spec.scale_T = 0.0;
  CHECK_THROWS_AS(spec.validate(), config_error);
  spec.scale_T = 1.0;
  spec.n = 3;
  CHECK_THROWS_AS(spec.validate(), config_error);
}

TEST_CASE("transform round trip is lossless") {
  for (int n : {1, 2}) {
    GridSpec spec;
    spec.n = n;
    spec.points_per_dim = n == 1 ? 256 : 32;
    spec.scale_T = 2.0;
    spec.validate();
    GridFunction f = random_space(spec, 42);
    GridFunction back = transform(transform(f, Domain::frequency), Domain::space);
    CHECK(max_diff(f, back) < 1e-12);
  }
}

TEST_CASE("a pure exponential occupies one frequency bin") {
  GridSpec spec = spec1d(64, 1.0);
  GridFunction f = exponential(spec, 3.0);
  GridFunction hat = transform(f, Domain::frequency);
  // hat f(nu) = int e^{-i nu x} e^{i 3 x} dx = period at nu = 3, zero elsewhere.
  for (int k = 0; k < spec.points_per_dim; ++k) {
    cd expected = (k == spec.freq_index(3.0)) ? cd{spec.period(), 0.0} : cd{0.0, 0.0};
    CHECK(std::abs(hat.samples[static_cast<std::size_t>(k)] - expected) < 1e-10);
  }
}

TEST_CASE("inverse normalization reproduces the exponential") {
  GridSpec spec = spec1d(64, 2.0);
  GridFunction hat = GridFunction::zeros(spec, Domain::frequency);
  hat.samples[static_cast<std::size_t>(spec.freq_index(2.5))] = cd{spec.period(), 0.0};
  GridFunction f = transform(hat, Domain::space);
  CHECK(max_diff(f, exponential(spec, 2.5)) < 1e-12);
}

TEST_CASE("Parseval holds in the Riemann-sum convention") {
  //   sum |f(x_i)|^2 h = (2 pi)^{-1} sum |hat f(nu)|^2 (1/T).
  GridSpec spec = spec1d(128, 4.0);
  GridFunction f = random_space(spec, 7);
  GridFunction hat = transform(f, Domain::frequency);
  double space_energy = 0.0, freq_energy = 0.0;
  for (const cd& v : f.samples) space_energy += std::norm(v);
  space_energy *= spec.cell_width();
  for (const cd& v : hat.samples) freq_energy += std::norm(v);
  freq_energy *= spec.freq_step() / (2.0 * std::numbers::pi);
  CHECK(space_energy == doctest::Approx(freq_energy).epsilon(1e-12));
}

TEST_CASE("apply_multiplier scales each frequency bin") {
  GridSpec spec = spec1d(128, 1.0);
  GridFunction f = random_space(spec, 11);
  SpectrumSampler h;
  h.eval = [](const double* nu) { return cd{1.0 / (1.0 + nu[0] * nu[0]), 0.0}; };
  GridFunction g = apply_multiplier(h, f);
  REQUIRE(g.domain == Domain::space);
  GridFunction hat_f = transform(f, Domain::frequency);
  GridFunction hat_g = transform(g, Domain::frequency);
  for (int k = 0; k < spec.points_per_dim; ++k) {
    double nu = spec.freq(k);
    cd expected = hat_f.samples[static_cast<std::size_t>(k)] / (1.0 + nu * nu);
    CHECK(std::abs(hat_g.samples[static_cast<std::size_t>(k)] - expected) < 1e-10);
  }
}

TEST_CASE("grid shift corresponds to a spectral phase") {
  GridSpec spec = spec1d(64, 1.0);
  GridFunction f = random_space(spec, 13);
  // Shift by one whole cell: g(x) = f(x - h).
  GridFunction g = GridFunction::zeros(spec, Domain::space);
  for (int i = 0; i < spec.points_per_dim; ++i)
    g.samples[static_cast<std::size_t>(i)] =
        f.samples[static_cast<std::size_t>((i - 1 + spec.points_per_dim) %
                                           spec.points_per_dim)];
  GridFunction hat_f = transform(f, Domain::frequency);
  GridFunction hat_g = transform(g, Domain::frequency);
  double h = spec.cell_width();
  for (int k = 0; k < spec.points_per_dim; ++k) {
    cd expected = hat_f.samples[static_cast<std::size_t>(k)] *
                  std::exp(cd{0.0, -spec.freq(k) * h});
    CHECK(std::abs(hat_g.samples[static_cast<std::size_t>(k)] - expected) < 1e-9);
  }
}

TEST_CASE("grid-function files round-trip bit for bit") {
  GridSpec spec;
  spec.n = 2;
  spec.points_per_dim = 16;
  spec.scale_T = 3.0;
  spec.validate();
  GridFunction f = random_space(spec, 17);
  f.domain = Domain::frequency;  // tag should survive
  std::string path = "test_grid_roundtrip.gridfn";
  write_gridfn(path, f);
  GridFunction back = read_gridfn(path);
  std::remove(path.c_str());
  CHECK(back.spec == f.spec);
  CHECK(back.domain == f.domain);
  REQUIRE(back.samples.size() == f.samples.size());
  for (std::size_t i = 0; i < f.samples.size(); ++i) {
    CHECK(back.samples[i].real() == f.samples[i].real());
    CHECK(back.samples[i].imag() == f.samples[i].imag());
  }
  CHECK_THROWS_AS(read_gridfn("definitely_missing.gridfn"), config_error);
}

}  // TEST_SUITE
