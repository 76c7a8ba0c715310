#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace repdyn {

// Deterministic random source. mt19937_64 output is pinned by the standard,
// and we map raw bits to doubles ourselves because the distribution adaptors
// in <random> are not bit-portable across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; one spare value is cached.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t raw() { return gen_(); }

  Eigen::MatrixXd gaussian_matrix(int rows, int cols);
  Eigen::VectorXd uniform_vector(int n, double lo, double hi);

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream derivation so that parallel sweeps use disjoint seed streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace repdyn
