#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nextrec {

// Random streams used by every stage. The engine is mt19937_64, whose output
// sequence is fixed by the standard; the helpers below avoid std
// distributions, whose algorithms vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  double normal(double mean, double stddev);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

// Seed of a named sub-stream: splitmix64(seed ^ fnv1a64(stage)).
std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage);

}  // namespace nextrec
