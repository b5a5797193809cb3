#include "mlpo/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mlpo {

namespace {

double point_norm(const LatticePoint& v) {
  return std::sqrt(static_cast<double>(v[0]) * v[0] + static_cast<double>(v[1]) * v[1]);
}

bool in_shell(double r, double level, double delta) {
  return r >= std::exp2(level - delta) && r <= std::exp2(level + delta);
}

constexpr int kMaxArity = 8;

SpectrumSampler gaussian_multiplier(double width, int n) {
  SpectrumSampler s;
  s.eval = [width, n](const double* nu) {
    double r2 = 0.0;
    for (int a = 0; a < n; ++a) r2 += nu[a] * nu[a];
    return cd{std::exp(-0.5 * r2 / (width * width)), 0.0};
  };
  return s;
}

// sigma = space_factor(x) * prod_j slot_multipliers[j](xi_j), pieces shared
// by every separable test symbol.
Symbol assemble_separable(int n, int N, std::vector<SpectrumSampler> slots,
                          std::function<cd(const double* x)> space_factor) {
  Symbol sym;
  sym.n = n;
  sym.N = N;
  sym.structure = Symbol::Structure::separable;
  sym.slot_multipliers = std::move(slots);
  sym.space_factor = std::move(space_factor);
  sym.x_independent = !sym.space_factor;
  auto slots_copy = sym.slot_multipliers;
  sym.frequency_core = [slots_copy, n, N](const double* Xi) {
    cd prod{1.0, 0.0};
    for (int j = 0; j < N; ++j) prod *= slots_copy[j].eval(Xi + j * n);
    return prod;
  };
  auto core = sym.frequency_core;
  auto factor = sym.space_factor;
  sym.evaluator = [core, factor](const double* x, const double* Xi) {
    cd v = core(Xi);
    if (factor) v *= factor(x);
    return v;
  };
  return sym;
}

}  // namespace

// --- test symbols --------------------------------------------------------------

Symbol make_test_symbol(TestSymbolKind kind, const TestSymbolParams& params) {
  if (params.n != 1 && params.n != 2)
    throw config_error("make_test_symbol: n must be 1 or 2");
  if (params.N < 1 || params.N > kMaxArity)
    throw config_error("make_test_symbol: unsupported arity");
  const int n = params.n, N = params.N;

  std::vector<double> widths = params.gaussian_widths;
  if (widths.empty()) widths.assign(N, 8.0);
  if (widths.size() != static_cast<std::size_t>(N))
    throw config_error("make_test_symbol: need one Gaussian width per slot");

  switch (kind) {
    case TestSymbolKind::constant: {
      std::vector<SpectrumSampler> slots(N);
      cd c = params.constant;
      for (int j = 0; j < N; ++j) {
        cd v = (j == 0) ? c : cd{1.0, 0.0};
        slots[j].eval = [v](const double*) { return v; };
      }
      return assemble_separable(n, N, std::move(slots), nullptr);
    }
    case TestSymbolKind::separable: {
      std::vector<SpectrumSampler> slots;
      for (int j = 0; j < N; ++j) slots.push_back(gaussian_multiplier(widths[j], n));
      return assemble_separable(n, N, std::move(slots), nullptr);
    }
    case TestSymbolKind::oscillatory_x: {
      std::vector<SpectrumSampler> slots;
      for (int j = 0; j < N; ++j) slots.push_back(gaussian_multiplier(widths[j], n));
      std::function<cd(const double*)> factor;
      if (params.space_factor == TestSymbolParams::SpaceFactor::modulation) {
        double f = params.modulation_freq;
        factor = [f](const double* x) { return std::exp(cd{0.0, f * x[0]}); };
      } else {
        int K = params.cosine_terms;
        double power = params.cosine_power;
        if (K < 1) throw config_error("make_test_symbol: cosine_terms must be >= 1");
        factor = [K, power](const double* x) {
          double acc = 1.0;
          for (int k = 1; k <= K; ++k)
            acc += 2.0 * std::pow(static_cast<double>(k), -power) * std::cos(k * x[0]);
          return cd{acc, 0.0};
        };
      }
      return assemble_separable(n, N, std::move(slots), std::move(factor));
    }
  }
  throw config_error("make_test_symbol: unknown kind");
}

// --- sharpness symbols ----------------------------------------------------------

Symbol make_sharpness_symbol(const LatticeTupleParams& set, double m,
                             std::function<cd(std::span<const LatticePoint>)> coefficient) {
  set.validate();
  if (set.N > kMaxArity) throw config_error("make_sharpness_symbol: unsupported arity");
  if (!coefficient) throw config_error("make_sharpness_symbol: missing coefficients");
  // One full pass checks non-emptiness, the shell implications, and |c|<=1.
  auto coeff = coefficient;
  for_each_tuple(set, [&](std::span<const LatticePoint> mu) {
    if (std::abs(coeff(mu)) > 1.0 + 1e-12)
      throw config_error("make_sharpness_symbol: coefficient magnitude exceeds 1");
  });

  auto data = std::make_shared<LatticeSymbolData>();
  data->set = set;
  data->m = m;
  data->phi = make_uniform_window(UniformKind::phi, UniformVariant::s4);
  data->coefficient = std::move(coefficient);

  Symbol sym;
  sym.n = set.n;
  sym.N = set.N;
  sym.structure = Symbol::Structure::lattice_sum;
  sym.x_independent = true;
  sym.lattice = data;

  sym.frequency_core = [data](const double* Xi) -> cd {
    const LatticeTupleParams& set = data->set;
    const int n = set.n, N = set.N;
    const double level = set.ell;
    const double low_level = set.ell - set.effective_gap();
    const double delta = set.delta;
    std::array<LatticePoint, kMaxArity> mu{};
    double windows = 1.0;
    if (set.kind == TupleKind::sum_zero) {
      // One candidate tuple: the nearest lattice point per slot.
      for (int j = 0; j < N; ++j) {
        const double* xi = Xi + j * n;
        mu[j] = {0, 0};
        for (int a = 0; a < n; ++a)
          mu[j][a] = static_cast<int>(std::llround(xi[a]));
        double w = data->phi.eval_shifted(xi, mu[j].data(), n);
        if (w == 0.0) return cd{0.0, 0.0};
        windows *= w;
      }
      LatticePoint total{0, 0};
      for (int j = 0; j < N; ++j) {
        total[0] += mu[j][0];
        total[1] += mu[j][1];
      }
      if (total[0] != 0 || total[1] != 0) return cd{0.0, 0.0};
      if (!in_shell(point_norm(mu[1]), level, delta)) return cd{0.0, 0.0};
      for (int j = 2; j < N; ++j)
        if (!in_shell(point_norm(mu[j]), low_level, delta)) return cd{0.0, 0.0};
      double bracket2 = 1.0;
      for (int j = 0; j < N; ++j) {
        double r = point_norm(mu[j]);
        bracket2 += r * r;
      }
      cd c = data->coefficient(std::span<const LatticePoint>(mu.data(), N));
      return c * std::pow(bracket2, 0.5 * data->m) * windows;
    }
    // free_sum: leading centered window on slot 1, lattice translates on the rest.
    double lead = data->phi.eval_centered(Xi, n);
    if (lead == 0.0) return cd{0.0, 0.0};
    const int stored = N - 1;
    for (int j = 0; j < stored; ++j) {
      const double* xi = Xi + (j + 1) * n;
      mu[j] = {0, 0};
      for (int a = 0; a < n; ++a) mu[j][a] = static_cast<int>(std::llround(xi[a]));
      double w = data->phi.eval_shifted(xi, mu[j].data(), n);
      if (w == 0.0) return cd{0.0, 0.0};
      windows *= w;
    }
    LatticePoint nu{0, 0};
    for (int j = 0; j < stored; ++j) {
      nu[0] += mu[j][0];
      nu[1] += mu[j][1];
    }
    if (!in_shell(point_norm(nu), level, delta)) return cd{0.0, 0.0};
    for (int j = 1; j < stored; ++j)
      if (!in_shell(point_norm(mu[j]), low_level, delta)) return cd{0.0, 0.0};
    double bracket2 = 1.0;
    for (int j = 0; j < stored; ++j) {
      double r = point_norm(mu[j]);
      bracket2 += r * r;
    }
    cd c = data->coefficient(std::span<const LatticePoint>(mu.data(), stored));
    return c * std::pow(bracket2, 0.5 * data->m) * lead * windows;
  };
  auto core = sym.frequency_core;
  sym.evaluator = [core](const double*, const double* Xi) { return core(Xi); };
  return sym;
}

std::function<cd(std::span<const LatticePoint>)> chirp_phase_coefficients(
    std::vector<double> a) {
  return [a = std::move(a)](std::span<const LatticePoint> mu) -> cd {
    if (mu.size() != a.size())
      throw compute_error("chirp_phase_coefficients: arity mismatch");
    double phase = 0.0;
    for (std::size_t j = 0; j < mu.size(); ++j)
      phase -= std::pow(point_norm(mu[j]), a[j]);
    return std::exp(cd{0.0, phase});
  };
}

std::function<cd(std::span<const LatticePoint>)> rademacher_chirp_coefficients(
    std::vector<double> a, std::uint64_t seed) {
  auto phases = chirp_phase_coefficients(std::move(a));
  return [phases, seed](std::span<const LatticePoint> mu) -> cd {
    LatticePoint nu{0, 0};
    for (const LatticePoint& v : mu) {
      nu[0] += v[0];
      nu[1] += v[1];
    }
    double sign = rademacher_sign(seed, std::span<const LatticePoint>(&nu, 1));
    return sign * phases(mu);
  };
}

void write_lattice_coefficients(const std::string& path, const LatticeSymbolData& data) {
  std::ofstream out(path);
  if (!out) throw config_error("write_lattice_coefficients: cannot open " + path);
  const int stored = data.set.kind == TupleKind::sum_zero ? data.set.N : data.set.N - 1;
  for (int j = 0; j < stored; ++j) out << "mu" << (j + 1) << "_a0,mu" << (j + 1) << "_a1,";
  out << "re,im\n";
  for_each_tuple(data.set, [&](std::span<const LatticePoint> mu) {
    cd c = data.coefficient(mu);
    for (const LatticePoint& v : mu) out << v[0] << "," << v[1] << ",";
    out << format_double(c.real()) << "," << format_double(c.imag()) << "\n";
  });
  if (!out) throw config_error("write_lattice_coefficients: write failed on " + path);
}

std::function<cd(std::span<const LatticePoint>)> read_lattice_coefficients(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("read_lattice_coefficients: cannot open " + path);
  std::string header;
  if (!std::getline(in, header))
    throw config_error("read_lattice_coefficients: empty file " + path);
  std::size_t columns = 1 + std::count(header.begin(), header.end(), ',');
  if (columns < 4 || (columns - 2) % 2 != 0)
    throw config_error("read_lattice_coefficients: malformed header in " + path);
  std::size_t stored = (columns - 2) / 2;
  auto table = std::make_shared<std::map<std::vector<int>, cd>>();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<int> key;
    std::vector<double> tail;
    for (std::size_t c = 0; c < columns; ++c) {
      if (!std::getline(row, cell, ','))
        throw config_error("read_lattice_coefficients: short row in " + path);
      if (c < 2 * stored)
        key.push_back(std::stoi(cell));
      else
        tail.push_back(std::stod(cell));
    }
    (*table)[std::move(key)] = cd{tail[0], tail[1]};
  }
  return [table, stored](std::span<const LatticePoint> mu) -> cd {
    if (mu.size() != stored)
      throw compute_error("lattice coefficient table: arity mismatch");
    std::vector<int> key;
    key.reserve(2 * stored);
    for (const LatticePoint& v : mu) {
      key.push_back(v[0]);
      key.push_back(v[1]);
    }
    auto it = table->find(key);
    if (it == table->end())
      throw compute_error("lattice coefficient table: tuple not found");
    return it->second;
  };
}

// --- seminorm estimation ---------------------------------------------------------

double SeminormReport::max_value() const {
  double best = 0.0;
  for (const auto& [key, v] : values) best = std::max(best, v);
  return best;
}

std::vector<std::vector<double>> probe_points_uniform(int n, int N, double x_radius,
                                                      double freq_radius, int count,
                                                      std::uint64_t seed) {
  RngStream rng(seed, "seminorm_probe_uniform");
  std::vector<std::vector<double>> points;
  for (int i = 0; i < count; ++i) {
    std::vector<double> p(n + N * n);
    for (int a = 0; a < n; ++a) p[a] = (rng.uniform() - 0.5) * 2.0 * x_radius;
    for (int j = 0; j < N * n; ++j)
      p[n + j] = (rng.uniform() - 0.5) * 2.0 * freq_radius;
    points.push_back(std::move(p));
  }
  return points;
}

std::vector<std::vector<double>> probe_points_near_lattice(const LatticeSymbolData& data,
                                                           int count, std::uint64_t seed) {
  RngStream rng(seed, "seminorm_probe_lattice");
  std::vector<LatticeTuple> members = enumerate_tuples(data.set);
  const int n = data.set.n, N = data.set.N;
  const bool leading_slot = data.set.kind == TupleKind::free_sum;
  std::vector<std::vector<double>> points;
  for (int i = 0; i < count; ++i) {
    const LatticeTuple& t = members[static_cast<std::size_t>(rng.uniform() * members.size()) %
                                    members.size()];
    std::vector<double> p(n + N * n);
    for (int a = 0; a < n; ++a) p[a] = (rng.uniform() - 0.5) * 2.0 * std::numbers::pi;
    auto jitter = [&]() { return (rng.uniform() - 0.5) * 0.6; };
    int slot = 0;
    if (leading_slot) {
      for (int a = 0; a < n; ++a) p[n + a] = jitter();
      slot = 1;
    }
    for (const LatticePoint& v : t.mu) {
      for (int a = 0; a < n; ++a) p[n + slot * n + a] = v[a] + jitter();
      ++slot;
    }
    points.push_back(std::move(p));
  }
  return points;
}

namespace {

// Central-difference stencils (offset, coefficient) for d^k/dt^k, k <= 3.
const std::vector<std::pair<int, double>>& stencil(int k) {
  static const std::vector<std::vector<std::pair<int, double>>> table = {
      {{0, 1.0}},
      {{-1, -0.5}, {1, 0.5}},
      {{-1, 1.0}, {0, -2.0}, {1, 1.0}},
      {{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}},
  };
  return table[k];
}

// All multi-indices over `n` axes with total order <= M, in lex order.
std::vector<std::vector<int>> group_indices(int n, int M) {
  std::vector<std::vector<int>> out;
  if (n == 1) {
    for (int k = 0; k <= M; ++k) out.push_back({k});
  } else {
    for (int k0 = 0; k0 <= M; ++k0)
      for (int k1 = 0; k0 + k1 <= M; ++k1) out.push_back({k0, k1});
  }
  return out;
}

}  // namespace

SeminormReport seminorm_estimate(const Symbol& sigma, double m, int M,
                                 std::span<const std::vector<double>> points) {
  if (M < 0 || M > 3) throw config_error("seminorm_estimate: M must lie in [0, 3]");
  if (points.empty()) throw config_error("seminorm_estimate: empty sample set");
  const int n = sigma.n, N = sigma.N;
  const std::size_t dims = static_cast<std::size_t>(n) * (N + 1);
  for (const auto& p : points)
    if (p.size() != dims)
      throw config_error("seminorm_estimate: sample point has wrong dimension");

  std::vector<std::vector<int>> per_group = group_indices(n, M);
  // Cartesian product of the group choices -> full multi-indices.
  std::vector<std::vector<int>> multis;
  std::vector<std::size_t> pick(N + 1, 0);
  while (true) {
    std::vector<int> d;
    for (int g = 0; g <= N; ++g)
      d.insert(d.end(), per_group[pick[g]].begin(), per_group[pick[g]].end());
    multis.push_back(std::move(d));
    int g = N;
    for (; g >= 0; --g) {
      if (++pick[g] < per_group.size()) break;
      pick[g] = 0;
    }
    if (g < 0) break;
  }

  SeminormReport report;
  report.m = m;
  report.M = M;

  std::vector<double> shifted(dims);
  for (const auto& d : multis) {
    int total = 0;
    for (int k : d) total += k;
    // Step: 1e-3 at low order, widened so roundoff ~ eps/h^total stays small.
    double h = std::max(1e-3, std::pow(1e-16, 1.0 / (total + 2)));
    double best = 0.0;
    for (const auto& p : points) {
      // Tensor product of per-axis stencils over the axes with d[axis] > 0.
      std::vector<std::size_t> axes;
      for (std::size_t a = 0; a < dims; ++a)
        if (d[a] > 0) axes.push_back(a);
      std::vector<std::size_t> counter(axes.size(), 0);
      cd acc{0.0, 0.0};
      while (true) {
        double coeff = 1.0;
        shifted = p;
        for (std::size_t i = 0; i < axes.size(); ++i) {
          const auto& s = stencil(d[axes[i]])[counter[i]];
          coeff *= s.second;
          shifted[axes[i]] += s.first * h;
        }
        acc += coeff * sigma.eval(shifted.data(), shifted.data() + n);
        std::size_t i = 0;
        for (; i < axes.size(); ++i) {
          if (++counter[i] < stencil(d[axes[i]]).size()) break;
          counter[i] = 0;
        }
        if (i == axes.size()) break;
      }
      double value = std::abs(acc) / std::pow(h, total);
      double freq_sum = 1.0;
      for (int j = 0; j < N; ++j) {
        double r2 = 0.0;
        for (int a = 0; a < n; ++a) {
          double c = p[n + j * n + a];
          r2 += c * c;
        }
        freq_sum += std::sqrt(r2);
      }
      value /= std::pow(freq_sum, m);
      if (!std::isfinite(value)) {
        std::string msg = "seminorm_estimate: non-finite value at point (";
        for (std::size_t a = 0; a < dims; ++a) {
          if (a) msg += ", ";
          msg += format_double(p[a]);
        }
        msg += ")";
        throw compute_error(msg);
      }
      best = std::max(best, value);
    }
    report.values[d] = best;
  }
  return report;
}

}  // namespace mlpo
