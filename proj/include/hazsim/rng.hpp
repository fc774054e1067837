#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace hazsim {

// 64-bit mixer used to derive independent substream seeds.
inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Substream (a, b) of a master seed. Streams derived from distinct (a, b)
// pairs are effectively independent, so ensemble members can be sampled in
// any order (or in parallel) without changing results.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                           std::uint64_t b = 0) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64_next(s);
  s ^= 0xd6e8feb86659fd93ULL * (a + 1);
  h ^= splitmix64_next(s);
  s ^= 0xa0761d6478bd642fULL * (b + 1);
  h ^= splitmix64_next(s);
  return h;
}

// FNV-1a; stable across platforms (std::hash is not).
inline constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// xoshiro256++ with hand-rolled sampling. Everything random in this codebase
// goes through this class so that a (seed, input) pair maps to one result
// bit-for-bit, independent of platform and standard-library version.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // [0, n)
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) return 0;
    auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return std::min(k, n - 1);
  }

  // Inversion by sequential search; exact for the small rates used here.
  // Large lambdas are split so the partial sums never underflow.
  long poisson(double lambda) {
    if (lambda <= 0) return 0;
    long total = 0;
    while (lambda > 60.0) {
      total += poisson_direct(30.0);
      lambda -= 30.0;
    }
    return total + poisson_direct(lambda);
  }

  // Draw an index with probability proportional to the increments of a
  // cumulative-weight table. Zero-weight entries are never selected.
  std::size_t weighted_index(const std::vector<double>& cumulative) {
    const double u = uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return static_cast<std::size_t>(it - cumulative.begin());
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  long poisson_direct(double lambda) {
    const double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    long k = 0;
    while (u > cdf && k < 100000) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  std::uint64_t state_[4];
};

}  // namespace hazsim
