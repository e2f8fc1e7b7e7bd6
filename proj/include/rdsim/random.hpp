#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace rdsim {

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over a byte string.
constexpr std::uint64_t hash_string(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Seed for the stream of (master, key, index). The key is a stable label
// (e.g. a cell identifier) so that adding cells never shifts other streams.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view key,
                                    std::uint64_t index) noexcept {
  return mix64(mix64(master ^ hash_string(key)) + mix64(index + 0x632be59bd9b4e019ULL));
}

double normal_quantile(double p);

// Seeded random stream. All draws are implemented here rather than through
// <random> distributions so that outputs do not depend on the standard
// library's distribution algorithms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  double normal() { return normal_quantile(uniform_open()); }

  bool bernoulli(double p) { return uniform() < p; }

  // Number of failures before the first success of a Bernoulli(p) sequence,
  // 0 < p < 1.
  std::uint64_t geometric(double p) {
    const double g = std::floor(std::log(uniform_open()) / std::log1p(-p));
    return g >= 1.8e19 ? ~std::uint64_t{0} : static_cast<std::uint64_t>(g);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rdsim
