#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>

namespace oswa {

// splitmix64; used both as a stream generator and to derive child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic seed derivation: mixes each word through splitmix64 so
// (seed, tx_id, frame) tuples map to independent streams.
inline std::uint64_t seed_mix(std::initializer_list<std::uint64_t> words) {
  std::uint64_t s = 0x243f6a8885a308d3ULL;
  for (std::uint64_t w : words) {
    s ^= w + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    std::uint64_t t = s;
    s = splitmix64(t);
  }
  return s;
}

// Small self-contained generator. std::normal_distribution is
// implementation-defined, so uniform and Gaussian draws are hand-rolled to
// keep corpora bit-reproducible across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller, one spare cached
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // circular complex Gaussian with total variance 1 (0.5 per component)
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * 0.7071067811865476, im * 0.7071067811865476};
  }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace oswa
