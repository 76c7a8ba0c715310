#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repdyn/mdp.hpp"

namespace repdyn {

enum class CumulantFamily {
  GAUSSIAN,
  NORMALIZED_GAUSSIAN,
  HAAR,
  INDICATOR,
  SVD_RIGHT,
  INVARIANT_ORTHO,
  IDENTITY,
  CUSTOM,
};

std::string family_name(CumulantFamily family);
CumulantFamily family_from_name(const std::string& name);

// S x T pseudo-reward matrix; columns are cumulant functions.
struct CumulantMatrix {
  Eigen::MatrixXd g;
  CumulantFamily family = CumulantFamily::CUSTOM;

  int tasks() const { return static_cast<int>(g.cols()); }
  // Checks the family-specific invariants (no all-zero column; HAAR /
  // INVARIANT_ORTHO orthonormal; NORMALIZED_GAUSSIAN unit columns;
  // INDICATOR entries in {0,1}).
  void validate() const;
};

CumulantMatrix sample_gaussian(std::uint64_t seed, int s, int t);
CumulantMatrix sample_normalized_gaussian(std::uint64_t seed, int s, int t);
// QR of a Gaussian matrix with R-diagonal sign correction; requires t <= s.
CumulantMatrix sample_haar(std::uint64_t seed, int s, int t);
// iid Bernoulli(0.5) entries in {0,1}; all-zero columns are resampled.
CumulantMatrix sample_indicator(std::uint64_t seed, int s, int t);

// Top-T right singular vectors B_T of the SR (weighted SVD); the canonical
// member of the MC-optimal family {B_T M : M orthogonal}.
CumulantMatrix mc_optimal_cumulants(const TabularMDP& mdp, int t);

// First T ordered Schur vectors of the SR: orthogonal and SR-invariant.
// Throws when a conjugate block straddles position T.
CumulantMatrix td_optimal_cumulants(const TabularMDP& mdp, int t);

// Samples the given family with the seed (for random families) or builds the
// dynamics-dependent family from the MDP.
CumulantMatrix sample_cumulants(CumulantFamily family, std::uint64_t seed,
                                const TabularMDP& mdp, int t);

// Randomized range-finder bound on the expected sin-theta distance:
//   sqrt(d/(p-1)) sigma_{d+1}/sigma_d + (e sqrt(T)/p) sqrt(tail)/sigma_d,
// p = T - d >= 2, tail = sum_{j>d} sigma_j^2. Monotone non-increasing in T.
double random_cumulant_bound(const Eigen::VectorXd& singular_values, int d,
                             int t);

struct EmpiricalSinTheta {
  double mean;
  std::vector<double> per_seed;
};

// For each seed: sample G, compute the top-d weighted left singular subspace
// of SR*G, and measure its sin-theta distance to F_d of the SR.
EmpiricalSinTheta empirical_sin_theta(const TabularMDP& mdp, int d, int t,
                                      int n_seeds, CumulantFamily family,
                                      std::uint64_t base_seed = 0);

// Plain-text export: one-line family tag, then the matrix.
std::string write_cumulant_text(const CumulantMatrix& g);

}  // namespace repdyn
