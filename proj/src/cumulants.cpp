#include "repdyn/cumulants.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "repdyn/constants.hpp"
#include "repdyn/matrix_io.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/subspace.hpp"

namespace repdyn {

std::string family_name(CumulantFamily family) {
  switch (family) {
    case CumulantFamily::GAUSSIAN: return "gaussian";
    case CumulantFamily::NORMALIZED_GAUSSIAN: return "normalized_gaussian";
    case CumulantFamily::HAAR: return "haar";
    case CumulantFamily::INDICATOR: return "indicator";
    case CumulantFamily::SVD_RIGHT: return "svd_right";
    case CumulantFamily::INVARIANT_ORTHO: return "invariant_ortho";
    case CumulantFamily::IDENTITY: return "identity";
    case CumulantFamily::CUSTOM: return "custom";
  }
  throw std::logic_error("family_name: unknown family");
}

CumulantFamily family_from_name(const std::string& name) {
  for (auto f : {CumulantFamily::GAUSSIAN, CumulantFamily::NORMALIZED_GAUSSIAN,
                 CumulantFamily::HAAR, CumulantFamily::INDICATOR,
                 CumulantFamily::SVD_RIGHT, CumulantFamily::INVARIANT_ORTHO,
                 CumulantFamily::IDENTITY, CumulantFamily::CUSTOM})
    if (family_name(f) == name) return f;
  throw std::invalid_argument("unknown cumulant family: " + name);
}

void CumulantMatrix::validate() const {
  const int t = tasks();
  if (t < 1) throw std::invalid_argument("cumulants: need at least one task");
  for (int j = 0; j < t; ++j)
    if (g.col(j).lpNorm<Eigen::Infinity>() == 0.0)
      throw std::invalid_argument("cumulants: all-zero column " +
                                  std::to_string(j));
  if (family == CumulantFamily::HAAR ||
      family == CumulantFamily::INVARIANT_ORTHO) {
    Eigen::MatrixXd gram = g.transpose() * g;
    if ((gram - Eigen::MatrixXd::Identity(t, t)).norm() > tol::spectral)
      throw std::invalid_argument("cumulants: columns are not orthonormal");
  }
  if (family == CumulantFamily::NORMALIZED_GAUSSIAN) {
    for (int j = 0; j < t; ++j)
      if (std::abs(g.col(j).norm() - 1.0) > tol::structural)
        throw std::invalid_argument("cumulants: column norm is not 1");
  }
  if (family == CumulantFamily::INDICATOR) {
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < t; ++j)
        if (g(i, j) != 0.0 && g(i, j) != 1.0)
          throw std::invalid_argument("cumulants: indicator entry not in {0,1}");
  }
}

CumulantMatrix sample_gaussian(std::uint64_t seed, int s, int t) {
  if (t < 1) throw std::invalid_argument("sample_gaussian: T >= 1");
  Rng rng(seed);
  return {rng.gaussian_matrix(s, t), CumulantFamily::GAUSSIAN};
}

CumulantMatrix sample_normalized_gaussian(std::uint64_t seed, int s, int t) {
  if (t < 1) throw std::invalid_argument("sample_normalized_gaussian: T >= 1");
  Rng rng(seed);
  Eigen::MatrixXd g = rng.gaussian_matrix(s, t);
  for (int j = 0; j < t; ++j) g.col(j) /= g.col(j).norm();
  return {g, CumulantFamily::NORMALIZED_GAUSSIAN};
}

CumulantMatrix sample_haar(std::uint64_t seed, int s, int t) {
  if (t < 1) throw std::invalid_argument("sample_haar: T >= 1");
  if (t > s) throw std::invalid_argument("sample_haar: need T <= S");
  Rng rng(seed);
  Eigen::MatrixXd a = rng.gaussian_matrix(s, t);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(s, t);
  Eigen::MatrixXd r = qr.matrixQR().topRows(t).triangularView<Eigen::Upper>();
  // Sign correction makes the distribution exactly Haar and the output a
  // deterministic function of the Gaussian draw.
  for (int j = 0; j < t; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return {q, CumulantFamily::HAAR};
}

CumulantMatrix sample_indicator(std::uint64_t seed, int s, int t) {
  if (t < 1) throw std::invalid_argument("sample_indicator: T >= 1");
  Rng rng(seed);
  Eigen::MatrixXd g(s, t);
  for (int j = 0; j < t; ++j) {
    do {
      for (int i = 0; i < s; ++i) g(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    } while (g.col(j).sum() == 0.0);
  }
  return {g, CumulantFamily::INDICATOR};
}

CumulantMatrix mc_optimal_cumulants(const TabularMDP& mdp, int t) {
  if (t > mdp.n_states())
    throw std::invalid_argument("mc_optimal_cumulants: need T <= S");
  auto sr = successor_representation(mdp);
  WeightedSvd svd = weighted_truncated_svd(sr.matrix, mdp.state_weights, t);
  return {svd.b_d, CumulantFamily::SVD_RIGHT};
}

CumulantMatrix td_optimal_cumulants(const TabularMDP& mdp, int t) {
  if (t > mdp.n_states())
    throw std::invalid_argument("td_optimal_cumulants: need T <= S");
  auto sr = successor_representation(mdp);
  Subspace top = top_d_invariant_subspace(sr.matrix, t);
  return {top.basis, CumulantFamily::INVARIANT_ORTHO};
}

CumulantMatrix sample_cumulants(CumulantFamily family, std::uint64_t seed,
                                const TabularMDP& mdp, int t) {
  const int s = mdp.n_states();
  switch (family) {
    case CumulantFamily::GAUSSIAN: return sample_gaussian(seed, s, t);
    case CumulantFamily::NORMALIZED_GAUSSIAN:
      return sample_normalized_gaussian(seed, s, t);
    case CumulantFamily::HAAR: return sample_haar(seed, s, t);
    case CumulantFamily::INDICATOR: return sample_indicator(seed, s, t);
    case CumulantFamily::SVD_RIGHT: return mc_optimal_cumulants(mdp, t);
    case CumulantFamily::INVARIANT_ORTHO: return td_optimal_cumulants(mdp, t);
    case CumulantFamily::IDENTITY:
      if (t != s)
        throw std::invalid_argument("identity cumulants require T == S");
      return {Eigen::MatrixXd::Identity(s, s), CumulantFamily::IDENTITY};
    case CumulantFamily::CUSTOM:
      throw std::invalid_argument("custom cumulants cannot be sampled");
  }
  throw std::logic_error("sample_cumulants: unknown family");
}

double random_cumulant_bound(const Eigen::VectorXd& singular_values, int d,
                             int t) {
  const int n = static_cast<int>(singular_values.size());
  if (d < 1 || d > n) throw std::invalid_argument("random_cumulant_bound: bad d");
  const int p = t - d;
  if (p < 2)
    throw std::invalid_argument(
        "random_cumulant_bound: oversampling p = T - d must be >= 2");
  double sigma_d = singular_values(d - 1);
  if (!(sigma_d > 0.0))
    throw std::invalid_argument("random_cumulant_bound: sigma_d must be > 0");
  double sigma_next = d < n ? singular_values(d) : 0.0;
  double tail = 0.0;
  for (int j = d; j < n; ++j) tail += singular_values(j) * singular_values(j);
  return std::sqrt(static_cast<double>(d) / (p - 1)) * sigma_next / sigma_d +
         std::numbers::e * std::sqrt(static_cast<double>(t)) / p *
             std::sqrt(tail) / sigma_d;
}

EmpiricalSinTheta empirical_sin_theta(const TabularMDP& mdp, int d, int t,
                                      int n_seeds, CumulantFamily family,
                                      std::uint64_t base_seed) {
  auto sr = successor_representation(mdp);
  WeightedSvd ref = weighted_truncated_svd(sr.matrix, mdp.state_weights, d);
  Eigen::MatrixXd f_d = orthonormal_basis(ref.f_d);
  EmpiricalSinTheta out;
  out.per_seed.reserve(n_seeds);
  double sum = 0.0;
  for (int i = 0; i < n_seeds; ++i) {
    CumulantMatrix g =
        sample_cumulants(family, derive_seed(base_seed, i), mdp, t);
    WeightedSvd hat =
        weighted_truncated_svd(sr.matrix * g.g, mdp.state_weights, d);
    double dist = sin_theta_distance(orthonormal_basis(hat.f_d), f_d);
    out.per_seed.push_back(dist);
    sum += dist;
  }
  out.mean = sum / n_seeds;
  return out;
}

std::string write_cumulant_text(const CumulantMatrix& g) {
  return family_name(g.family) + "\n" + write_matrix_text(g.g);
}

}  // namespace repdyn
