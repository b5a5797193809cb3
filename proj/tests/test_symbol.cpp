#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <vector>

#include "mlpo/extremal.hpp"
#include "mlpo/symbol.hpp"
#include "mlpo/util.hpp"
#include "mlpo/windows.hpp"

using namespace mlpo;

namespace {

cd eval_at(const Symbol& sym, std::vector<double> x, std::vector<double> Xi) {
  REQUIRE(x.size() == static_cast<std::size_t>(sym.n));
  REQUIRE(Xi.size() == static_cast<std::size_t>(sym.N * sym.n));
  return sym.eval(x.data(), Xi.data());
}

}  // namespace

TEST_SUITE("symbol") {

TEST_CASE("constant symbol is the constant in every variable") {
  TestSymbolParams params;
  params.N = 3;
  params.constant = cd{2.0, -3.0};
  Symbol sym = make_test_symbol(TestSymbolKind::constant, params);
  CHECK(sym.x_independent);
  CHECK(sym.structure == Symbol::Structure::separable);
  REQUIRE(sym.slot_multipliers.size() == 3);
  for (double xi : {-40.0, 0.0, 3.25})
    CHECK(eval_at(sym, {0.7}, {xi, -xi, 2.0 * xi}) == cd{2.0, -3.0});
  // The constant sits in the first slot; the rest are unit multipliers.
  double nu = 17.0;
  CHECK(sym.slot_multipliers[0].eval(&nu) == cd{2.0, -3.0});
  CHECK(sym.slot_multipliers[1].eval(&nu) == cd{1.0, 0.0});
}

TEST_CASE("separable symbol is a product of per-slot Gaussians") {
  TestSymbolParams params;
  params.n = 2;
  params.N = 2;
  params.gaussian_widths = {8.0, 3.0};
  Symbol sym = make_test_symbol(TestSymbolKind::separable, params);
  CHECK(sym.x_independent);
  std::vector<double> Xi{1.5, -2.0, 0.5, 4.0};  // slot-major layout
  double r1 = 1.5 * 1.5 + 4.0, r2 = 0.25 + 16.0;
  cd want{std::exp(-0.5 * r1 / 64.0) * std::exp(-0.5 * r2 / 9.0), 0.0};
  CHECK(std::abs(eval_at(sym, {0.0, 0.0}, Xi) - want) < 1e-15);
  CHECK(std::abs(sym.frequency_core(Xi.data()) - want) < 1e-15);
  // Width list must cover every slot.
  params.gaussian_widths = {8.0};
  CHECK_THROWS_AS(make_test_symbol(TestSymbolKind::separable, params), config_error);
}

TEST_CASE("modulated symbol carries a unimodular space factor") {
  TestSymbolParams params;
  params.modulation_freq = 2.5;
  Symbol sym = make_test_symbol(TestSymbolKind::oscillatory_x, params);
  CHECK(!sym.x_independent);
  std::vector<double> Xi{3.0, -1.0};
  double x0 = 0.8, x1 = -2.1;
  cd at0 = eval_at(sym, {x0}, Xi), at1 = eval_at(sym, {x1}, Xi);
  CHECK(std::abs(std::abs(at0) - std::abs(at1)) < 1e-15);  // modulus ignores x
  cd ratio = at0 / at1;
  CHECK(std::abs(ratio - std::exp(cd{0.0, 2.5 * (x0 - x1)})) < 1e-12);
  CHECK(std::abs(sym.space_factor(&x0) - std::exp(cd{0.0, 2.5 * x0})) < 1e-15);
}

TEST_CASE("cosine-series factor matches its truncated sum") {
  TestSymbolParams params;
  params.space_factor = TestSymbolParams::SpaceFactor::cosine_series;
  params.cosine_terms = 8;
  params.cosine_power = 2.0;
  Symbol sym = make_test_symbol(TestSymbolKind::oscillatory_x, params);
  double x = 1.33;
  double want = 1.0;
  for (int k = 1; k <= 8; ++k) want += 2.0 * std::pow(k, -2.0) * std::cos(k * x);
  CHECK(std::abs(sym.space_factor(&x) - cd{want, 0.0}) < 1e-14);
  params.cosine_terms = 0;
  CHECK_THROWS_AS(make_test_symbol(TestSymbolKind::oscillatory_x, params), config_error);
}

TEST_CASE("window-sum symbol reproduces its defining sum near the lattice") {
  LatticeTupleParams set;
  set.ell = 4;
  Symbol sym = make_sharpness_symbol(set, -0.5, chirp_phase_coefficients({0.5, 0.5}));
  CHECK(sym.structure == Symbol::Structure::lattice_sum);
  CHECK(sym.x_independent);
  REQUIRE(sym.lattice);
  const UniformWindow& phi = sym.lattice->phi;

  std::vector<LatticeTuple> members = enumerate_tuples(set);
  auto coeff = chirp_phase_coefficients({0.5, 0.5});
  double x = 0.0;
  for (const LatticeTuple& t : members) {
    for (double off1 : {0.0, 0.1, -0.2}) {
      for (double off2 : {0.05, -0.12}) {
        std::vector<double> Xi{t.mu[0][0] + off1, t.mu[1][0] + off2};
        double r1 = std::abs(static_cast<double>(t.mu[0][0]));
        double r2 = std::abs(static_cast<double>(t.mu[1][0]));
        double bracket = 1.0 + r1 * r1 + r2 * r2;
        cd want = coeff(t.mu) * std::pow(bracket, -0.25) * phi.axis_profile(off1) *
                  phi.axis_profile(off2);
        CHECK(std::abs(sym.eval(&x, Xi.data()) - want) < 1e-12);
      }
    }
  }
  // Between lattice points the quarter-width boxes leave dead zones.
  std::vector<double> dead{members[0].mu[0][0] + 0.5, members[0].mu[1][0] + 0.0};
  CHECK(sym.eval(&x, dead.data()) == cd{0.0, 0.0});
  // A frequency pair that rounds to a non-member tuple evaluates to zero.
  std::vector<double> nonmember{12.0, -11.0};  // sums to 1, not 0
  CHECK(sym.eval(&x, nonmember.data()) == cd{0.0, 0.0});
}

TEST_CASE("free-sum symbol carries the leading centered window") {
  LatticeTupleParams set;
  set.kind = TupleKind::free_sum;
  set.ell = 4;
  Symbol sym = make_sharpness_symbol(set, -1.0, chirp_phase_coefficients({0.5}));
  const UniformWindow& phi = sym.lattice->phi;
  auto coeff = chirp_phase_coefficients({0.5});
  std::vector<LatticeTuple> members = enumerate_tuples(set);
  double x = 0.0;
  const LatticeTuple& t = members.front();
  double r = std::abs(static_cast<double>(t.mu[0][0]));
  std::vector<double> Xi{0.1, t.mu[0][0] - 0.15};
  cd want = coeff(t.mu) * std::pow(1.0 + r * r, -0.5) * phi.axis_profile(0.1) *
            phi.axis_profile(-0.15);
  CHECK(std::abs(sym.eval(&x, Xi.data()) - want) < 1e-12);
  // Away from the leading window's quarter-width support the symbol dies.
  std::vector<double> off{0.4, static_cast<double>(t.mu[0][0])};
  CHECK(sym.eval(&x, off.data()) == cd{0.0, 0.0});
}

TEST_CASE("construction rejects oversized coefficients and missing ones") {
  LatticeTupleParams set;
  set.ell = 4;
  CHECK_THROWS_AS(make_sharpness_symbol(set, 0.0, nullptr), config_error);
  auto too_big = [](std::span<const LatticePoint>) { return cd{1.5, 0.0}; };
  CHECK_THROWS_AS(make_sharpness_symbol(set, 0.0, too_big), config_error);
}

TEST_CASE("chirp coefficients are unimodular with the stated phase") {
  auto coeff = chirp_phase_coefficients({0.5, 0.7});
  LatticePoint mu[2] = {{9, 0}, {-9, 0}};
  cd c = coeff(std::span<const LatticePoint>(mu, 2));
  CHECK(std::abs(std::abs(c) - 1.0) < 1e-15);
  double phase = -std::pow(9.0, 0.5) - std::pow(9.0, 0.7);
  CHECK(std::abs(c - std::exp(cd{0.0, phase})) < 1e-15);
  // One exponent per stored entry, enforced.
  CHECK_THROWS_AS(coeff(std::span<const LatticePoint>(mu, 1)), compute_error);
}

TEST_CASE("sign-flipped chirps attach the sign of the tuple sum") {
  auto plain = chirp_phase_coefficients({0.5, 0.5});
  auto flipped = rademacher_chirp_coefficients({0.5, 0.5}, 11);
  LatticeTupleParams set;
  set.ell = 5;
  int plus = 0, minus = 0;
  for (const LatticeTuple& t : enumerate_tuples(set)) {
    std::span<const LatticePoint> mu(t.mu.data(), t.mu.size());
    LatticePoint nu{t.mu[0][0] + t.mu[1][0], t.mu[0][1] + t.mu[1][1]};
    double sign = rademacher_sign(11, std::span<const LatticePoint>(&nu, 1));
    cd want = sign * plain(mu);
    CHECK(std::abs(flipped(mu) - want) < 1e-15);
    (sign > 0 ? plus : minus) += 1;
  }
  CHECK(plus > 0);
  CHECK(minus > 0);
}

TEST_CASE("coefficient tables survive a write/read round trip") {
  LatticeSymbolData data;
  data.set.ell = 4;
  data.m = -0.5;
  data.phi = make_uniform_window(UniformKind::phi, UniformVariant::s4);
  data.coefficient = rademacher_chirp_coefficients({0.4, 0.6}, 3);
  std::string path = "coeff_round_trip.csv";
  write_lattice_coefficients(path, data);
  auto read_back = read_lattice_coefficients(path);
  for_each_tuple(data.set, [&](std::span<const LatticePoint> mu) {
    cd want = data.coefficient(mu);
    cd got = read_back(mu);
    CHECK(want.real() == got.real());  // full-precision text round trip
    CHECK(want.imag() == got.imag());
  });
  LatticePoint absent[2] = {{1, 0}, {-1, 0}};
  CHECK_THROWS_AS(read_back(std::span<const LatticePoint>(absent, 2)), compute_error);
  LatticePoint wrong[1] = {{12, 0}};
  CHECK_THROWS_AS(read_back(std::span<const LatticePoint>(wrong, 1)), compute_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_lattice_coefficients(path), config_error);
}

TEST_CASE("seminorm probe of the unit symbol returns one") {
  TestSymbolParams params;
  Symbol sym = make_test_symbol(TestSymbolKind::constant, params);
  auto points = probe_points_uniform(1, 2, 3.0, 40.0, 32, 5);
  REQUIRE(!points.empty());
  for (const auto& p : points) REQUIRE(p.size() == 3);  // x + two slots
  SeminormReport report = seminorm_estimate(sym, 0.0, 2, points);
  CHECK(report.m == 0.0);
  CHECK(report.M == 2);
  std::vector<int> zero(3, 0);
  REQUIRE(report.values.count(zero) == 1);
  CHECK(report.values.at(zero) == 1.0);
  // Derivatives of a constant vanish up to difference-scheme roundoff.
  for (const auto& [key, value] : report.values)
    if (key != zero) CHECK(value < 1e-6);
  CHECK(report.max_value() == 1.0);
}

TEST_CASE("probe point generators are deterministic in the seed") {
  auto a = probe_points_uniform(2, 3, 3.0, 20.0, 16, 9);
  auto b = probe_points_uniform(2, 3, 3.0, 20.0, 16, 9);
  CHECK(a == b);
  auto c = probe_points_uniform(2, 3, 3.0, 20.0, 16, 10);
  CHECK(a != c);

  LatticeSymbolData data;
  data.set.ell = 5;
  data.m = 0.0;
  data.phi = make_uniform_window(UniformKind::phi, UniformVariant::s4);
  data.coefficient = chirp_phase_coefficients({0.5, 0.5});
  auto near = probe_points_near_lattice(data, 24, 13);
  CHECK(near == probe_points_near_lattice(data, 24, 13));
  std::vector<LatticeTuple> members = enumerate_tuples(data.set);
  for (const auto& p : near) {
    REQUIRE(p.size() == 3);
    // The frequency part hugs some member tuple of the defining set.
    double best = 1e9;
    for (const LatticeTuple& t : members)
      best = std::min(best, std::max(std::abs(p[1] - t.mu[0][0]),
                                     std::abs(p[2] - t.mu[1][0])));
    CHECK(best <= 0.31);
  }
}

}  // TEST_SUITE
