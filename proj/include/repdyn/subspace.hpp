#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace repdyn {

// Orthonormal basis of a d-dimensional subspace of R^S (Euclidean inner
// product): basis^T basis = I.
struct Subspace {
  Eigen::MatrixXd basis;
  int dim() const { return static_cast<int>(basis.cols()); }
  void validate() const;  // throws std::invalid_argument on violation
};

// Euclidean-orthonormal basis of span(a) via SVD with relative rank cutoff.
// Throws std::invalid_argument when a is rank-deficient below its column
// count (unless allow_rank_drop).
Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& a,
                                  bool allow_rank_drop = false,
                                  double rel_cutoff = 1e-12);

// Weighted truncated SVD of Xi^{1/2} M = U Sigma V^T.
// f_d = Xi^{-1/2} U_d satisfies f_d^T Xi f_d = I (weighted orthonormality).
struct WeightedSvd {
  Eigen::MatrixXd f_d;     // S x d, Xi-orthonormal left vectors
  Eigen::VectorXd sigma;   // d, non-increasing
  Eigen::MatrixXd b_d;     // n x d, Euclidean-orthonormal right vectors
};

WeightedSvd weighted_truncated_svd(const Eigen::MatrixXd& m,
                                   const Eigen::VectorXd& weights, int d);

// All singular values of Xi^{1/2} M, non-increasing.
Eigen::VectorXd weighted_singular_values(const Eigen::MatrixXd& m,
                                         const Eigen::VectorXd& weights);

// Real Schur form M = Q T Q^T with diagonal blocks sorted by decreasing
// eigenvalue real part (ties: decreasing |Im|, then original order).
struct OrderedSchur {
  Eigen::MatrixXd q;
  Eigen::MatrixXd t;
  std::vector<std::complex<double>> eigenvalues;  // sorted as in t
};

OrderedSchur ordered_real_schur(const Eigen::MatrixXd& m);

// Eigenvalue layout around a candidate split position d.
struct SpectralSplit {
  std::vector<std::complex<double>> eigenvalues;  // decreasing real part
  bool gap_at_d;         // Re(lambda_d) > Re(lambda_{d+1}) beyond 1e-10
  bool block_safe_at_d;  // no conjugate pair straddles position d
};

SpectralSplit spectral_split(const Eigen::MatrixXd& m, int d);

// First d ordered Schur vectors. Throws std::runtime_error("no real top-d
// invariant subspace ...") when a conjugate block straddles position d.
// When gap_warning is non-null it is set when Re(lambda_d) and
// Re(lambda_{d+1}) are equal within 1e-10 (degenerate split, not an error).
Subspace top_d_invariant_subspace(const Eigen::MatrixXd& m, int d,
                                  bool* gap_warning = nullptr);

bool is_invariant_subspace(const Eigen::MatrixXd& phi,
                           const Eigen::MatrixXd& m, double tol);

// 1 - Tr(P_a P_b)/d, basis-invariant, in [0, 1].
double normalized_subspace_distance(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b);

// Operator norm of sin(principal angles) = ||P_a - P_b||_2.
double sin_theta_distance(const Subspace& a, const Subspace& b);
double sin_theta_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Phi (X^T Phi)^{-1} X^T: projection onto span(Phi) along span(X)-perp.
Eigen::MatrixXd oblique_projection(const Eigen::MatrixXd& phi,
                                   const Eigen::MatrixXd& x);

}  // namespace repdyn
