#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace spinlab {

// Counter-based splittable generator. A stream is (key, counter); children are
// derived from the key and a label only, so results never depend on draw order
// or thread scheduling. Every experiment derives its streams from the root seed
// through a path of child() calls.
class Rng {
 public:
  explicit Rng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ull * ++counter_); }

  // uniform in [0,1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform in {0,...,n-1}
  int uniform_int(int n) {
    // multiply-shift; bias < 2^-32 for desk-scale n
    return int((__uint128_t(next_u64()) * __uint128_t(n)) >> 64);
  }

  double exponential() { return -std::log1p(-uniform()); }

  double gaussian() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  // index from unnormalized nonnegative weights
  int discrete(const double* w, int n) {
    double total = 0;
    for (int i = 0; i < n; ++i) total += w[i];
    double u = uniform() * total;
    double cum = 0;
    int last = 0;
    for (int i = 0; i < n; ++i) {
      if (w[i] <= 0) continue;
      cum += w[i];
      last = i;
      if (u < cum) return i;
    }
    return last;
  }

  Rng child(std::uint64_t label) const { return Rng(mix(key_ ^ mix(label ^ 0xA3EC4E9F1FEC4E9Full))); }

  Rng child(std::string_view label) const {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : label) {
      h ^= std::uint64_t(std::uint8_t(c));
      h *= 1099511628211ull;
    }
    return child(h);
  }

  std::uint64_t key() const { return key_; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace spinlab
