#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pcmlp {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t key);
std::uint64_t hash_name(std::string_view name);

// An explicit random stream. Every stochastic routine takes one of these by
// reference; nothing in the library touches global random state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  // Independent stream for a named purpose, derived only from (seed, name, index).
  static Rng stream(std::uint64_t seed, std::string_view name, std::uint64_t index = 0) {
    return Rng(mix_seed(mix_seed(seed, hash_name(name)), index));
  }

  // Consumes one draw from this stream and returns a base key; children derived
  // with child(base, i) are independent of the order in which they are used.
  std::uint64_t fork_key() { return engine_(); }
  static Rng child(std::uint64_t base, std::uint64_t index) { return Rng(mix_seed(base, index)); }

  Rng split(std::uint64_t key) { return child(fork_key(), key); }

  std::uint64_t next_u64() { return engine_(); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal() { return normal_(engine_); }
  // Uniform integer in [0, n).
  int uniform_int(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pcmlp
