#pragma once

#include <cstdint>
#include <random>

namespace stabilab {

// Gaussian shocks drawn from a 64-bit Mersenne Twister (std::mt19937_64).
// Streams are bit-reproducible for a given seed within one build of the
// standard library; nothing is promised across toolchains.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double draw(double stddev) { return stddev * unit_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> unit_{0.0, 1.0};
};

/// Per-period structural and policy shocks. Both are drawn every period, even
/// at zero scale, so changing one scale never shifts the other's stream.
class ShockStream {
 public:
  struct Draw {
    double eps;
    double eta;
  };

  ShockStream(std::uint64_t seed, double sigma_eps, double sigma_eta)
      : stream_(seed), sigma_eps_(sigma_eps), sigma_eta_(sigma_eta) {}

  Draw next() {
    const double eps = stream_.draw(sigma_eps_);
    const double eta = stream_.draw(sigma_eta_);
    return {eps, eta};
  }

 private:
  GaussianStream stream_;
  double sigma_eps_;
  double sigma_eta_;
};

/// Seed for an auxiliary stream (e.g. measurement noise) that must stay
/// independent of the primary shock stream built from `seed`.
constexpr std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace stabilab
