#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

namespace cannings {

// splitmix64: the standard 64-bit seed scrambler.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Per-replicate stream id. The tuple (global seed, op id, replicate index)
// pins the stream regardless of how replicates are scheduled across workers.
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t op = 0;
  std::uint64_t replicate = 0;
};

// A seeded random stream. One instance per replicate; never shared across
// threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(scramble(seed)) {}
  explicit Rng(StreamKey key) : engine_(scramble(mix(key))) {}

  std::mt19937_64& engine() { return engine_; }

  // uniform on [0,1)
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  // uniform on (0,1)
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }

  // uniform integer in [0, n)
  std::int64_t uniform_below(std::int64_t n) {
    return std::uniform_int_distribution<std::int64_t>(0, n - 1)(engine_);
  }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform() < p;
  }

  std::int64_t binomial(std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    return std::binomial_distribution<std::int64_t>(trials, p)(engine_);
  }

  double exponential(double rate = 1.0) {
    return std::exponential_distribution<double>(rate)(engine_);
  }

  double gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(engine_);
  }

  double beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
  }

  // Hypergeometric: number of tagged items among `draws` taken without
  // replacement from a population of size `total` containing `tagged` tagged
  // items. Bernoulli chain over min(draws, tagged) steps.
  std::int64_t hypergeometric(std::int64_t total, std::int64_t tagged,
                              std::int64_t draws) {
    if (draws <= 0 || tagged <= 0) return 0;
    if (draws >= total) return tagged;
    if (tagged > draws) {
      // Hyp(total, tagged, draws) == Hyp(total, draws, tagged) in law.
      std::swap(tagged, draws);
    }
    std::int64_t hits = 0;
    std::int64_t pool = total;
    std::int64_t marks = tagged;
    for (std::int64_t i = 0; i < draws && marks > 0; ++i) {
      if (uniform_below(pool) < marks) {
        ++hits;
        --marks;
      }
      --pool;
    }
    return hits;
  }

  // k distinct values from {0, ..., n-1}, unsorted order.
  std::vector<std::int64_t> sample_without_replacement(std::int64_t n,
                                                       std::int64_t k) {
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(k));
    if (3 * k >= n) {
      std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
      for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
      for (std::int64_t i = 0; i < k; ++i) {
        const std::int64_t j = i + uniform_below(n - i);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
        out.push_back(pool[static_cast<std::size_t>(i)]);
      }
      return out;
    }
    // Floyd's algorithm for sparse samples.
    std::vector<std::int64_t> seen;
    for (std::int64_t i = n - k; i < n; ++i) {
      std::int64_t v = uniform_below(i + 1);
      if (std::find(seen.begin(), seen.end(), v) != seen.end()) v = i;
      seen.push_back(v);
      out.push_back(v);
    }
    return out;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), engine_);
  }

 private:
  static std::uint64_t mix(StreamKey key) {
    std::uint64_t s = key.seed;
    std::uint64_t a = splitmix64(s);
    s ^= key.op * 0x9e3779b97f4a7c15ULL;
    a ^= splitmix64(s);
    s ^= key.replicate * 0xd1b54a32d192ed03ULL;
    a ^= splitmix64(s);
    return a;
  }

  static std::mt19937_64 scramble(std::uint64_t seed) {
    std::uint64_t s = seed;
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
};

}  // namespace cannings
