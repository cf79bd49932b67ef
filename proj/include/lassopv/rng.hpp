#ifndef LASSOPV_RNG_HPP
#define LASSOPV_RNG_HPP

#include <cmath>
#include <cstdint>

namespace lassopv {

// Counter-based generator built on the splitmix64 mixer. Substreams are keyed
// by (seed, stream), so simulation s of task t can be seeded independently of
// the execution schedule and results stay reproducible under any parallelism.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(seed + 0x9e3779b97f4a7c15ull * (mix(stream) | 1ull))) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    return mix(z);
  }

  // Uniform on the open interval (0, 1).
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, m). Rejection sampling keeps it unbiased.
  std::uint64_t next_below(std::uint64_t m) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % m;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % m;
  }

  // Standard normal via Box-Muller; the second deviate is cached.
  double next_gaussian() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace lassopv

#endif
