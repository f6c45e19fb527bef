#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace prafd {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream identifiers for counter-based splitting. A trial's streams depend
// only on (master seed, trial, stream), never on execution order.
enum class Stream : std::uint64_t {
  kRealization = 1,
  kLayout = 2,
  kBsumOrder = 3,
  kPerturbation = 4,
  kGeometry = 5,
  kTest = 99,
};

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, Stream stream) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ splitmix64(trial + 0x632be59bd9b4e019ULL));
  return splitmix64(s ^ (static_cast<std::uint64_t>(stream) * 0xd1b54a32d192ed03ULL));
}

// mt19937_64 with hand-rolled transforms so sampled values do not depend on
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::uint64_t trial, Stream stream) : engine_(derive_seed(master, trial, stream)) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  std::complex<double> cscg(double variance) {
    const double s = std::sqrt(0.5 * variance);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace prafd
