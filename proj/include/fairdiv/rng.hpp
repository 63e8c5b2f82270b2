#pragma once

#include <cstdint>
#include <string_view>

namespace fairdiv {

// Counter-based pseudorandom stream. Each stream is keyed by
// (seed, trial, module tag); draws are a pure function of (key, counter),
// so adding draws to one module never perturbs another module's stream
// and any trial can be replayed in isolation.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t trial, std::string_view tag)
      : key_(derive_key(seed, trial, tag)) {}

  explicit Stream(std::uint64_t raw_key) : key_(raw_key) {}

  // Independent child stream; used for per-agent / per-node substreams.
  Stream fork(std::uint64_t salt) const {
    return Stream(mix(key_ ^ mix(salt ^ 0xA5A5A5A5DEADBEEFull)));
  }

  std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGolden); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  // Uniform in {0, ..., n-1}, unbiased.
  std::uint64_t next_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t u;
    do {
      u = next_u64();
    } while (u >= limit);
    return u % n;
  }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Standard normal via Box-Muller; consumes exactly two uniforms.
  double next_gaussian();

  std::uint64_t key() const { return key_; }

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
    return h;
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t trial,
                                  std::string_view tag) {
    return mix(mix(mix(seed) ^ fnv1a(tag)) ^ trial);
  }

  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace fairdiv
