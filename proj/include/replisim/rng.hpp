#pragma once
#include <cstdint>
#include <vector>

namespace replisim {

// 64-bit finalizer used both by the deterministic generator below and by
// node identity hashing. Wrapping arithmetic throughout.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

// splitmix64: tiny, seedable, identical output on every platform.
// std::uniform_int_distribution is implementation-defined, so all ranged
// draws go through the rejection-sampling helpers here instead.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // Uniform on [0, bound), bound > 0. Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % bound;
  }

  // Uniform on [lo, hi], inclusive.
  std::uint64_t range(std::uint64_t lo, std::uint64_t hi) {
    return lo + below(hi - lo + 1);
  }

  double unit() {  // uniform on [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // k distinct values from [0, n), order of first selection.
  std::vector<std::uint64_t> sample(std::uint64_t n, std::uint64_t k);

 private:
  std::uint64_t state_;
};

inline std::vector<std::uint64_t> SplitMix64::sample(std::uint64_t n,
                                                     std::uint64_t k) {
  if (k > n) k = n;
  std::vector<std::uint64_t> out;
  out.reserve(k);
  if (k == 0) return out;
  // Floyd's algorithm keeps the draw count at exactly k.
  std::vector<std::uint64_t> seen;
  for (std::uint64_t j = n - k; j < n; ++j) {
    std::uint64_t v = below(j + 1);
    bool dup = false;
    for (std::uint64_t s : seen) {
      if (s == v) { dup = true; break; }
    }
    if (dup) v = j;
    seen.push_back(v);
    out.push_back(v);
  }
  return out;
}

// Independent deterministic stream for a named purpose within one run.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t tag) {
  return SplitMix64(mix64(seed ^ mix64(tag)));
}

}  // namespace replisim
