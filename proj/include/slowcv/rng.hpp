#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace slowcv {

// Seeded 64-bit Mersenne Twister with hand-rolled transforms, so that every
// draw is identical across standard libraries (std::*_distribution is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Two independent standard normals from one Box-Muller transform.
  // Consumes exactly two uniforms: u1 for the radius, u2 for the angle.
  std::pair<double, double> gaussian_pair();

  // Uniform integer in [0, n) by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n);

  // Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace slowcv
