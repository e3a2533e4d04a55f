#pragma once

#include <cstdint>
#include <random>

namespace treatsim {

/// Named sources of randomness. Each is derived independently from the run
/// seed, so toggling one source leaves the draws of the others unchanged.
enum class Stream : std::uint64_t {
  Population = 1,
  Missingness = 2,
  PolicyCoins = 3,
  WorldDynamics = 4,
  Training = 5,
};

/// Mixes a run seed, a stream name and up to three indices into a 64-bit
/// engine seed (splitmix64 finalizer applied per component).
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                          std::uint64_t b = 0, std::uint64_t c = 0);

class RandomStream {
 public:
  RandomStream(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0,
               std::uint64_t c = 0)
      : engine_(derive_seed(seed, stream, a, b, c)) {}

  /// Uniform on [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean, double stddev) {
    if (stddev == 0.0) return mean;
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  bool bernoulli(double p) { return uniform() < p; }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace treatsim
