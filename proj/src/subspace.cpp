#include "repdyn/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>
#include <lapacke.h>

#include "repdyn/constants.hpp"

namespace repdyn {

void Subspace::validate() const {
  const int d = dim();
  if (d < 1 || d > basis.rows())
    throw std::invalid_argument("subspace: need 1 <= d <= S");
  Eigen::MatrixXd gram = basis.transpose() * basis;
  if ((gram - Eigen::MatrixXd::Identity(d, d)).norm() > tol::spectral)
    throw std::invalid_argument("subspace: basis is not orthonormal");
}

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& a,
                                  bool allow_rank_drop, double rel_cutoff) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_cutoff * s(0)) ++rank;
  if (rank < a.cols() && !allow_rank_drop)
    throw std::invalid_argument("orthonormal_basis: matrix is rank-deficient");
  return svd.matrixU().leftCols(rank);
}

WeightedSvd weighted_truncated_svd(const Eigen::MatrixXd& m,
                                   const Eigen::VectorXd& weights, int d) {
  if (weights.size() != m.rows() || weights.minCoeff() <= 0.0)
    throw std::invalid_argument("weighted_truncated_svd: bad weight vector");
  if (d < 1 || d > std::min(m.rows(), m.cols()))
    throw std::invalid_argument("weighted_truncated_svd: bad d");
  Eigen::VectorXd sq = weights.array().sqrt();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sq.asDiagonal() * m,
                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(d - 1) < 1e-12 * s(0))
    throw std::runtime_error("weighted_truncated_svd: rank below requested d");
  WeightedSvd out;
  out.f_d = sq.cwiseInverse().asDiagonal() * svd.matrixU().leftCols(d);
  out.sigma = s.head(d);
  out.b_d = svd.matrixV().leftCols(d);
  return out;
}

Eigen::VectorXd weighted_singular_values(const Eigen::MatrixXd& m,
                                         const Eigen::VectorXd& weights) {
  Eigen::VectorXd sq = weights.array().sqrt();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(sq.asDiagonal() * m);
  return svd.singularValues();
}

namespace {

struct SchurBlock {
  int start;   // 0-based position in t
  int size;    // 1 or 2
  double re;   // eigenvalue real part
  double im;   // |imaginary part| (0 for 1x1 blocks)
};

std::vector<SchurBlock> scan_blocks(const Eigen::MatrixXd& t) {
  const int n = static_cast<int>(t.rows());
  std::vector<SchurBlock> blocks;
  int i = 0;
  while (i < n) {
    if (i + 1 < n && t(i + 1, i) != 0.0) {
      double a = t(i, i), b = t(i, i + 1), c = t(i + 1, i), dd = t(i + 1, i + 1);
      double disc = 0.25 * (a - dd) * (a - dd) + b * c;
      double re = 0.5 * (a + dd);
      // Standardized 2x2 Schur blocks carry complex pairs (disc < 0); guard
      // anyway so a pathological block cannot produce a NaN sort key.
      double im = disc < 0.0 ? std::sqrt(-disc) : 0.0;
      blocks.push_back({i, 2, re, im});
      i += 2;
    } else {
      blocks.push_back({i, 1, t(i, i), 0.0});
      i += 1;
    }
  }
  return blocks;
}

// True when lhs should be ordered before rhs: larger real part, then larger
// |Im|, then original position.
bool block_before(const SchurBlock& lhs, const SchurBlock& rhs) {
  if (lhs.re != rhs.re) return lhs.re > rhs.re;
  if (lhs.im != rhs.im) return lhs.im > rhs.im;
  return lhs.start < rhs.start;
}

}  // namespace

OrderedSchur ordered_real_schur(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols())
    throw std::invalid_argument("ordered_real_schur: matrix must be square");
  const int n = static_cast<int>(m.rows());
  Eigen::RealSchur<Eigen::MatrixXd> schur(m);
  if (schur.info() != Eigen::Success)
    throw std::runtime_error("ordered_real_schur: Schur iteration failed");
  OrderedSchur out;
  out.t = schur.matrixT();
  out.q = schur.matrixU();

  // Selection sort on diagonal blocks; dtrexc moves one block at a time and
  // shifts the rest, so the block layout is rescanned after every move.
  int pos = 0;
  while (pos < n) {
    auto blocks = scan_blocks(out.t);
    const SchurBlock* best = nullptr;
    for (const auto& blk : blocks) {
      if (blk.start < pos) continue;
      if (!best || block_before(blk, *best)) best = &blk;
    }
    if (!best) break;
    if (best->start != pos) {
      lapack_int ifst = best->start + 1;  // LAPACK is 1-based
      lapack_int ilst = pos + 1;
      lapack_int info =
          LAPACKE_dtrexc(LAPACK_COL_MAJOR, 'V', n, out.t.data(), n,
                         out.q.data(), n, &ifst, &ilst);
      if (info != 0)
        throw std::runtime_error("ordered_real_schur: dtrexc failed, info=" +
                                 std::to_string(info));
    }
    pos += best->size;
  }

  double scale = m.norm();
  if (scale > 0.0 &&
      (out.q * out.t * out.q.transpose() - m).norm() / scale > tol::structural)
    throw std::runtime_error("ordered_real_schur: reordering lost accuracy");

  for (const auto& blk : scan_blocks(out.t)) {
    if (blk.size == 1) {
      out.eigenvalues.emplace_back(blk.re, 0.0);
    } else {
      out.eigenvalues.emplace_back(blk.re, blk.im);
      out.eigenvalues.emplace_back(blk.re, -blk.im);
    }
  }
  return out;
}

SpectralSplit spectral_split(const Eigen::MatrixXd& m, int d) {
  const int n = static_cast<int>(m.rows());
  if (d < 1 || d > n) throw std::invalid_argument("spectral_split: bad d");
  OrderedSchur schur = ordered_real_schur(m);
  SpectralSplit split;
  split.eigenvalues = schur.eigenvalues;
  split.gap_at_d =
      d == n || schur.eigenvalues[d - 1].real() >
                    schur.eigenvalues[d].real() + tol::structural;
  split.block_safe_at_d = true;
  for (const auto& blk : scan_blocks(schur.t))
    if (blk.size == 2 && blk.start == d - 1) split.block_safe_at_d = false;
  return split;
}

Subspace top_d_invariant_subspace(const Eigen::MatrixXd& m, int d,
                                  bool* gap_warning) {
  const int n = static_cast<int>(m.rows());
  if (d < 1 || d > n)
    throw std::invalid_argument("top_d_invariant_subspace: bad d");
  OrderedSchur schur = ordered_real_schur(m);
  for (const auto& blk : scan_blocks(schur.t)) {
    if (blk.size == 2 && blk.start == d - 1)
      throw std::runtime_error(
          "no real top-d invariant subspace: a complex-conjugate pair "
          "straddles position d=" +
          std::to_string(d) + "; nearest safe dimensions are " +
          std::to_string(d - 1) + " and " + std::to_string(d + 1));
  }
  if (gap_warning) {
    *gap_warning =
        d < n && std::abs(schur.eigenvalues[d - 1].real() -
                          schur.eigenvalues[d].real()) <= tol::structural;
  }
  return Subspace{schur.q.leftCols(d)};
}

bool is_invariant_subspace(const Eigen::MatrixXd& phi,
                           const Eigen::MatrixXd& m, double tol) {
  Eigen::MatrixXd q = orthonormal_basis(phi);
  Eigen::MatrixXd mphi = m * phi;
  double denom = mphi.norm();
  if (denom == 0.0) return true;  // zero image lies in every subspace
  return (mphi - q * (q.transpose() * mphi)).norm() / denom < tol;
}

double normalized_subspace_distance(const Eigen::MatrixXd& a,
                                    const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("normalized_subspace_distance: dim mismatch");
  const int d = static_cast<int>(a.cols());
  Eigen::MatrixXd qa = orthonormal_basis(a, /*allow_rank_drop=*/true);
  Eigen::MatrixXd qb = orthonormal_basis(b, /*allow_rank_drop=*/true);
  double overlap = (qa.transpose() * qb).squaredNorm();  // Tr(P_a P_b)
  return std::clamp(1.0 - overlap / d, 0.0, 1.0);
}

double sin_theta_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols())
    throw std::invalid_argument("sin_theta_distance: dimension mismatch");
  Eigen::MatrixXd qa = orthonormal_basis(a);
  Eigen::MatrixXd qb = orthonormal_basis(b);
  // ||(I - P_a) Q_b||_2 = max sin(theta); avoids the cancellation in
  // sqrt(1 - cos^2) near zero angles.
  Eigen::MatrixXd residual = qb - qa * (qa.transpose() * qb);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(residual);
  return std::min(svd.singularValues()(0), 1.0);
}

double sin_theta_distance(const Subspace& a, const Subspace& b) {
  return sin_theta_distance(a.basis, b.basis);
}

Eigen::MatrixXd oblique_projection(const Eigen::MatrixXd& phi,
                                   const Eigen::MatrixXd& x) {
  if (phi.rows() != x.rows() || phi.cols() != x.cols())
    throw std::invalid_argument("oblique_projection: shape mismatch");
  Eigen::MatrixXd cross = x.transpose() * phi;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(cross);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 0.0 || s(0) / s(s.size() - 1) >= 1e12)
    throw std::runtime_error(
        "oblique_projection: cross-Gram X^T Phi is near-singular");
  return phi * cross.partialPivLu().solve(x.transpose());
}

}  // namespace repdyn
