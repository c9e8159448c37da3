#ifndef BLJES_RNG_HPP
#define BLJES_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace bljes {

// SplitMix64 finalizer, used to derive well-separated stream seeds.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded random stream with hierarchical substream derivation. Substreams
// are keyed, not consumed from the parent, so the draw order inside one
// stream never shifts when a sibling stream appears or disappears.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

  RngStream substream(std::uint64_t tag) const {
    return RngStream(mix64(seed_ ^ mix64(tag ^ 0xa3c59ac2ed9c8b15ULL)));
  }

  RngStream substream(std::uint64_t tag, std::uint64_t index) const {
    return substream(tag).substream(index ^ 0x9d2c5680fULL);
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform on [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // uniform integer in [0, n), n >= 1
  std::uint64_t uniform_index(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<__uint128_t>(engine_()) * n) >> 64);
  }

  // standard normal via Box-Muller, pairs cached
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace bljes

#endif  // BLJES_RNG_HPP
