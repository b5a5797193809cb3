#pragma once
// Spectral core: periodic grids, forward/inverse transforms, Fourier
// multipliers, band/box projections, and the grid-function file format.
//
// Conventions. The torus has period 2*pi*T per axis with x-samples
//   x_i = (i - M/2) * h,  h = 2*pi*T / M,  i = 0..M-1,
// and the representable frequencies are
//   nu_k = (k - M/2) / T,  k = 0..M-1,
// stored in ascending order (row-major across axes). The forward transform
// approximates hat f(nu) = integral e^{-i nu x} f(x) dx by its Riemann sum
// (exact for band-limited samples); the inverse is
//   f(x) = (2*pi*T)^{-n} * sum_nu hat f(nu) e^{i nu x}.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlpo/util.hpp"

namespace mlpo {

enum class Domain { space, frequency };

struct GridSpec {
  int n = 1;               // spatial dimension (1 or 2)
  int points_per_dim = 0;  // power of two, >= 4
  double scale_T = 1.0;    // period = 2*pi*scale_T

  void validate() const;
  double period() const;
  double cell_width() const { return period() / points_per_dim; }
  double freq_step() const { return 1.0 / scale_T; }
  double nyquist() const { return points_per_dim / (2.0 * scale_T); }
  std::size_t size() const;

  double coord(int axis_index) const {
    return (axis_index - points_per_dim / 2) * cell_width();
  }
  double freq(int axis_index) const {
    return (axis_index - points_per_dim / 2) * freq_step();
  }
  // Axis index of a given integer-lattice frequency bin nu (nu * T must be an
  // integer; throws config_error otherwise).
  int freq_index(double nu) const;

  bool operator==(const GridSpec& o) const {
    return n == o.n && points_per_dim == o.points_per_dim && scale_T == o.scale_T;
  }
};

struct GridFunction {
  GridSpec spec;
  Domain domain = Domain::space;
  std::vector<cd> samples;  // row-major, size spec.size()

  static GridFunction zeros(const GridSpec& spec, Domain domain);

  // Row-major flattening helpers.
  std::size_t flat_index(const int* idx) const;
  void unflatten(std::size_t flat, int* idx) const;

  double max_abs() const;
};

// Pointwise sampler of a frequency-domain function m(nu). `support_radius`
// (per-axis sup-norm radius, optional) lets multiplier application skip bins
// that are guaranteed zero.
struct SpectrumSampler {
  std::function<cd(const double* nu)> eval;
  std::optional<double> support_radius;
  std::optional<std::array<double, 2>> support_center;  // defaults to origin
};

// Forward (space -> frequency) or inverse (frequency -> space) transform.
// Throws config_error if `f` is already in the requested domain.
GridFunction transform(const GridFunction& f, Domain target);

// m(D) f: transform if needed, multiply bin-wise, return in f's domain.
GridFunction apply_multiplier(const SpectrumSampler& m, const GridFunction& f);

// Multiply an already-frequency-domain function bin-wise (no transforms).
void multiply_spectrum_inplace(GridFunction& hat_f, const SpectrumSampler& m);

// Generic-rank centered transform used both by GridFunction transforms and by
// the symbol-coefficient quadrature (rank up to 4). `dims` are per-axis sizes
// (powers of two); `period` is shared by all axes. Forward maps centered
// samples to centered spectrum with the Riemann-sum normalization above.
void centered_fft(const std::vector<int>& dims, double period, bool forward,
                  std::vector<cd>& data);

// Grid-function file format: a single JSON object
//   {"n":..,"points_per_dim":..,"period":..,"domain_tag":"space"|"frequency",
//    "samples_b64":"..."}
// with samples as little-endian float64 pairs (re,im), row-major.
void write_gridfn(const std::string& path, const GridFunction& f);
GridFunction read_gridfn(const std::string& path);

}  // namespace mlpo
