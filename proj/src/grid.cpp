#include "mlpo/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <numbers>

namespace mlpo {

namespace {

bool is_pow2(int v) { return v >= 1 && (v & (v - 1)) == 0; }

// One cached FFTW plan pair with its own aligned buffers. FFTW planning is
// not thread-safe and we reuse the plan buffers, so execution is serialized
// behind a mutex; everything around the transform stays parallel-friendly.
struct PlanEntry {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  fftw_complex* buf = nullptr;
  std::size_t total = 0;
};

std::mutex g_fft_mutex;
std::map<std::vector<int>, PlanEntry>& plan_cache() {
  static std::map<std::vector<int>, PlanEntry> cache;
  return cache;
}

PlanEntry& get_plan(const std::vector<int>& dims) {
  auto& cache = plan_cache();
  auto it = cache.find(dims);
  if (it != cache.end()) return it->second;
  PlanEntry entry;
  entry.total = 1;
  for (int d : dims) entry.total *= static_cast<std::size_t>(d);
  entry.buf = fftw_alloc_complex(entry.total);
  if (!entry.buf) throw compute_error("fft: allocation failed");
  entry.fwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), entry.buf,
                            entry.buf, FFTW_FORWARD, FFTW_ESTIMATE);
  entry.bwd = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), entry.buf,
                            entry.buf, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!entry.fwd || !entry.bwd) throw compute_error("fft: planning failed");
  return cache.emplace(dims, entry).first->second;
}

}  // namespace

void GridSpec::validate() const {
  if (n != 1 && n != 2) throw config_error("GridSpec: n must be 1 or 2");
  if (!is_pow2(points_per_dim) || points_per_dim < 4)
    throw config_error("GridSpec: points_per_dim must be a power of two >= 4");
  if (!(scale_T > 0)) throw config_error("GridSpec: scale_T must be positive");
}

double GridSpec::period() const { return 2.0 * std::numbers::pi * scale_T; }

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < n; ++a) s *= static_cast<std::size_t>(points_per_dim);
  return s;
}

int GridSpec::freq_index(double nu) const {
  double bins = nu * scale_T;
  double rounded = std::round(bins);
  if (std::abs(bins - rounded) > 1e-9)
    throw config_error("GridSpec: frequency is not on the bin lattice");
  int k = static_cast<int>(rounded) + points_per_dim / 2;
  if (k < 0 || k >= points_per_dim)
    throw config_error("GridSpec: frequency exceeds the representable band");
  return k;
}

GridFunction GridFunction::zeros(const GridSpec& spec, Domain domain) {
  spec.validate();
  GridFunction f;
  f.spec = spec;
  f.domain = domain;
  f.samples.assign(spec.size(), cd{0.0, 0.0});
  return f;
}

std::size_t GridFunction::flat_index(const int* idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < spec.n; ++a)
    flat = flat * static_cast<std::size_t>(spec.points_per_dim) +
           static_cast<std::size_t>(idx[a]);
  return flat;
}

void GridFunction::unflatten(std::size_t flat, int* idx) const {
  for (int a = spec.n - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % spec.points_per_dim);
    flat /= spec.points_per_dim;
  }
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (const cd& v : samples) m = std::max(m, std::abs(v));
  return m;
}

void centered_fft(const std::vector<int>& dims, double period, bool forward,
                  std::vector<cd>& data) {
  if (dims.empty() || dims.size() > 4)
    throw config_error("centered_fft: rank must be between 1 and 4");
  std::size_t total = 1;
  for (int d : dims) {
    if (!is_pow2(d) || d < 4)
      throw config_error("centered_fft: dims must be powers of two >= 4");
    total *= static_cast<std::size_t>(d);
  }
  if (data.size() != total) throw config_error("centered_fft: size mismatch");

  // Centered-in, centered-out transform via double index shift:
  //   forward:  hat[k] = h^r * (-1)^{sum k_a} * DFT[ (-1)^{sum i_a} f ][k]
  //   inverse:  f[i]  = P^{-r} * (-1)^{sum i_a} * IDFT[ (-1)^{sum k_a} hat ][i]
  // where h = P/M per axis and M/2 is even for every M >= 8 handled here
  // (M = 4 has M/2 = 2, also even), so (-1)^{k - M/2} == (-1)^k.
  int rank = static_cast<int>(dims.size());
  double h_factor = 1.0;
  for (int d : dims) h_factor *= period / d;
  double scale = forward ? h_factor : 1.0 / std::pow(period, rank);

  std::lock_guard<std::mutex> lock(g_fft_mutex);
  PlanEntry& plan = get_plan(dims);

  std::vector<int> idx(rank, 0);
  auto parity_sign = [&](std::size_t flat) {
    int s = 0;
    for (int a = rank - 1; a >= 0; --a) {
      s += static_cast<int>(flat % dims[a]);
      flat /= dims[a];
    }
    return (s & 1) ? -1.0 : 1.0;
  };

  for (std::size_t i = 0; i < total; ++i) {
    cd v = data[i] * parity_sign(i);
    plan.buf[i][0] = v.real();
    plan.buf[i][1] = v.imag();
  }
  fftw_execute(forward ? plan.fwd : plan.bwd);
  for (std::size_t i = 0; i < total; ++i) {
    cd v{plan.buf[i][0], plan.buf[i][1]};
    data[i] = v * (parity_sign(i) * scale);
  }
}

GridFunction transform(const GridFunction& f, Domain target) {
  f.spec.validate();
  if (f.domain == target)
    throw config_error("transform: function is already in the requested domain");
  GridFunction out = f;
  std::vector<int> dims(static_cast<std::size_t>(f.spec.n), f.spec.points_per_dim);
  centered_fft(dims, f.spec.period(), target == Domain::frequency, out.samples);
  out.domain = target;
  return out;
}

void multiply_spectrum_inplace(GridFunction& hat_f, const SpectrumSampler& m) {
  if (hat_f.domain != Domain::frequency)
    throw config_error("multiply_spectrum: expected a frequency-domain function");
  const GridSpec& spec = hat_f.spec;
  double center[2] = {0.0, 0.0};
  if (m.support_center) {
    center[0] = (*m.support_center)[0];
    center[1] = (*m.support_center)[1];
  }
  int idx[2] = {0, 0};
  double nu[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < hat_f.samples.size(); ++i) {
    hat_f.unflatten(i, idx);
    bool outside = false;
    for (int a = 0; a < spec.n; ++a) {
      nu[a] = spec.freq(idx[a]);
      if (m.support_radius &&
          std::abs(nu[a] - center[a]) > *m.support_radius + 1e-12)
        outside = true;
    }
    if (outside) {
      hat_f.samples[i] = 0.0;
      continue;
    }
    if (hat_f.samples[i] != cd{0.0, 0.0}) hat_f.samples[i] *= m.eval(nu);
  }
}

GridFunction apply_multiplier(const SpectrumSampler& m, const GridFunction& f) {
  if (f.domain == Domain::space) {
    GridFunction hat = transform(f, Domain::frequency);
    multiply_spectrum_inplace(hat, m);
    return transform(hat, Domain::space);
  }
  GridFunction hat = f;
  multiply_spectrum_inplace(hat, m);
  return hat;
}

void write_gridfn(const std::string& path, const GridFunction& f) {
  f.spec.validate();
  std::vector<unsigned char> raw(f.samples.size() * 2 * sizeof(double));
  std::memcpy(raw.data(), f.samples.data(), raw.size());
  nlohmann::json j;
  j["n"] = f.spec.n;
  j["points_per_dim"] = f.spec.points_per_dim;
  j["period"] = f.spec.period();
  j["domain_tag"] = (f.domain == Domain::space) ? "space" : "frequency";
  j["samples_b64"] = base64_encode(raw.data(), raw.size());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("write_gridfn: cannot open '" + path + "'");
  out << j.dump() << "\n";
}

GridFunction read_gridfn(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("read_gridfn: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("read_gridfn: invalid JSON: ") + e.what());
  }
  GridFunction f;
  try {
    f.spec.n = j.at("n").get<int>();
    f.spec.points_per_dim = j.at("points_per_dim").get<int>();
    f.spec.scale_T = j.at("period").get<double>() / (2.0 * std::numbers::pi);
    std::string tag = j.at("domain_tag").get<std::string>();
    if (tag == "space")
      f.domain = Domain::space;
    else if (tag == "frequency")
      f.domain = Domain::frequency;
    else
      throw config_error("read_gridfn: unknown domain_tag '" + tag + "'");
    std::vector<unsigned char> raw = base64_decode(j.at("samples_b64").get<std::string>());
    f.spec.validate();
    if (raw.size() != f.spec.size() * 2 * sizeof(double))
      throw config_error("read_gridfn: sample payload size mismatch");
    f.samples.resize(f.spec.size());
    std::memcpy(f.samples.data(), raw.data(), raw.size());
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("read_gridfn: ") + e.what());
  }
  return f;
}

}  // namespace mlpo
