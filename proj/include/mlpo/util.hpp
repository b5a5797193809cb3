#pragma once
// Small shared utilities: error types, deterministic RNG substreams,
// base64, and float formatting used by the report writers.

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mlpo {

using cd = std::complex<double>;

// Validation problems (bad arguments, bad config, contract misuse).
struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Failures discovered while computing (resolution limits, budget overruns,
// aliasing, non-convergence).
struct compute_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic randomness.
//
// Everything random flows from one top-level seed through named substreams.
// We avoid std::<random> distributions on purpose: their output is
// implementation-defined, and reports must be byte-identical across reruns.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stateless mix of a single value (used for per-index Rademacher signs).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive a named substream seed from a master seed. FNV-1a over the name,
// then mixed together with the master so unrelated names decorrelate.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::uint64_t s = master ^ h;
  return mix64(s);
}

// Minimal counter-based stream of uniforms in [0,1).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {}
  RngStream(std::uint64_t master, std::string_view name)
      : state_(substream_seed(master, name)) {}

  std::uint64_t next_u64() { return splitmix64(state_); }
  // 53-bit mantissa uniform in [0,1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // Uniform on the complex unit circle.
  cd unit_phase();

 private:
  std::uint64_t state_;
};

// ---------------------------------------------------------------------------
// base64 (for the grid-function file format).
std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(std::string_view text);

// Shortest-exact double formatting for CSV/JSON ("%.17g" round-trips).
std::string format_double(double v);

}  // namespace mlpo
