#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ppfit {

// Seeded RNG with our own draw routines so results stay identical across
// standard library implementations and thread counts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = eng_();
    while (v >= limit) v = eng_();
    return v % n;
  }

  // Poisson draw by multiplication, chunked so the mean may be large.
  std::uint64_t poisson(double mean) {
    std::uint64_t k = 0;
    while (mean > 30.0) {
      k += poisson_small(30.0);
      mean -= 30.0;
    }
    return k + poisson_small(mean);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Derive an independent stream, e.g. per replicate or per restart.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step on seed ^ rotated stream
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t poisson_small(double mean) {
    if (mean <= 0) return 0;
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 eng_;
};

}  // namespace ppfit
