#include "repdyn/evaluation.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "repdyn/constants.hpp"
#include "repdyn/matrix_io.hpp"

namespace repdyn {

namespace {

Eigen::MatrixXd half_weight(const Eigen::VectorXd& xi,
                            const Eigen::MatrixXd& a) {
  return xi.array().sqrt().matrix().asDiagonal() * a;
}

Eigen::MatrixXd bellman_operator(const TabularMDP& mdp) {
  const int s = mdp.n_states();
  return Eigen::MatrixXd::Identity(s, s) - mdp.discount * mdp.transition;
}

}  // namespace

double td_eval_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp) {
  const int s = mdp.n_states();
  auto sr = successor_representation(mdp);
  Eigen::MatrixXd w = lstd_weights(phi, mdp, Eigen::MatrixXd::Identity(s, s));
  return half_weight(mdp.state_weights, phi * w - sr.matrix).squaredNorm();
}

double mc_eval_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp) {
  auto sr = successor_representation(mdp);
  Eigen::MatrixXd a = half_weight(mdp.state_weights, sr.matrix);
  Eigen::MatrixXd q = orthonormal_basis(half_weight(mdp.state_weights, phi));
  return (a - q * (q.transpose() * a)).squaredNorm();
}

double residual_eval_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp) {
  auto sr = successor_representation(mdp);
  Eigen::MatrixXd a = half_weight(mdp.state_weights, sr.matrix);
  Eigen::MatrixXd q =
      orthonormal_basis(half_weight(mdp.state_weights, bellman_operator(mdp) * phi));
  return (a - (a * q) * q.transpose()).squaredNorm();
}

double eval_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                  Rule rule) {
  switch (rule) {
    case Rule::TD: return td_eval_error(phi, mdp);
    case Rule::MC: return mc_eval_error(phi, mdp);
    case Rule::RESIDUAL: return residual_eval_error(phi, mdp);
  }
  throw std::logic_error("eval_error: unknown rule");
}

std::string eval_report_csv_header() {
  return "method,d,error,reference_distance";
}

std::string eval_report_csv_row(const EvalReport& report) {
  std::string row = rule_name(report.method) + "," +
                    std::to_string(report.d) + "," +
                    format_double(report.error) + ",";
  if (report.reference_distance) row += format_double(*report.reference_distance);
  return row;
}

namespace {

struct RestartResult {
  Eigen::MatrixXd basis;
  double error = std::numeric_limits<double>::infinity();
};

// Local descent on the TD error over orthonormal bases: central-difference
// gradient, backtracking step, re-orthonormalization after every move.
RestartResult descend_td_error(const TabularMDP& mdp, Eigen::MatrixXd phi) {
  RestartResult result;
  try {
    result.error = td_eval_error(phi, mdp);
  } catch (const std::exception&) {
    return result;  // infeasible start, infinite error
  }
  result.basis = phi;

  const int s = static_cast<int>(phi.rows());
  const int d = static_cast<int>(phi.cols());
  const double h = 1e-6;
  double step = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd grad(s, d);
    Eigen::MatrixXd probe = result.basis;
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < s; ++i) {
        const double base = result.basis(i, j);
        probe(i, j) = base + h;
        double up = td_eval_error(probe, mdp);
        probe(i, j) = base - h;
        double down = td_eval_error(probe, mdp);
        probe(i, j) = base;
        grad(i, j) = (up - down) / (2.0 * h);
      }
    }
    if (grad.norm() < 1e-14) break;

    bool improved = false;
    double rel = 0.0;
    for (int trial = 0; trial < 40 && !improved; ++trial) {
      try {
        Eigen::MatrixXd cand = orthonormal_basis(result.basis - step * grad);
        double cand_error = td_eval_error(cand, mdp);
        if (cand_error < result.error) {
          rel = (result.error - cand_error) /
                std::max(result.error, std::numeric_limits<double>::min());
          result.basis = cand;
          result.error = cand_error;
          step *= 1.5;
          improved = true;
          break;
        }
      } catch (const std::exception&) {
        // fall through to a smaller step
      }
      step *= 0.5;
    }
    if (!improved || rel < 1e-10) break;
  }
  return result;
}

}  // namespace

OptimalRepresentation optimal_representation(const TabularMDP& mdp, int d,
                                             Rule method, int restarts,
                                             std::uint64_t seed) {
  if (d < 1 || d > mdp.n_states())
    throw std::invalid_argument("optimal_representation: bad d");
  auto sr = successor_representation(mdp);

  if (method == Rule::MC) {
    WeightedSvd svd = weighted_truncated_svd(sr.matrix, mdp.state_weights, d);
    Subspace sub{orthonormal_basis(svd.f_d)};
    return {sub, mc_eval_error(sub.basis, mdp), true};
  }
  if (method == Rule::RESIDUAL) {
    WeightedSvd svd = weighted_truncated_svd(sr.matrix, mdp.state_weights, d);
    Eigen::MatrixXd target =
        mdp.state_weights.array().rsqrt().matrix().asDiagonal() * svd.b_d;
    Eigen::MatrixXd phi = bellman_operator(mdp).partialPivLu().solve(target);
    Subspace sub{orthonormal_basis(phi)};
    return {sub, residual_eval_error(sub.basis, mdp), true};
  }

  if (restarts < 1)
    throw std::invalid_argument("optimal_representation: restarts >= 1");
  const int s = mdp.n_states();
  std::vector<RestartResult> results(restarts);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= restarts) return;
      Eigen::MatrixXd init;
      if (i == 0) {
        init = orthonormal_basis(
            weighted_truncated_svd(sr.matrix, mdp.state_weights, d).f_d);
      } else if (i == 1) {
        try {
          init = top_d_invariant_subspace(sr.matrix, d).basis;
        } catch (const std::exception&) {
          Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
          init = orthonormal_basis(rng.gaussian_matrix(s, d));
        }
      } else {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        init = orthonormal_basis(rng.gaussian_matrix(s, d));
      }
      results[i] = descend_td_error(mdp, init);
    }
  };
  unsigned n_threads = std::max(1u, std::min<unsigned>(
      std::thread::hardware_concurrency(), static_cast<unsigned>(restarts)));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  int best = -1;
  for (int i = 0; i < restarts; ++i)
    if (best < 0 || results[i].error < results[best].error) best = i;
  if (!std::isfinite(results[best].error))
    throw std::runtime_error("optimal_representation: every restart failed");
  return {Subspace{results[best].basis}, results[best].error, false};
}

RotatingReport rotating_value_error_constancy(const TabularMDP& mdp,
                                              double alpha, int steps,
                                              int snapshot_every,
                                              std::uint64_t seed) {
  if (mdp.n_states() != 3)
    throw std::invalid_argument(
        "rotating_value_error_constancy expects the 3-state cycle");
  TrainConfig config;
  config.rule = Rule::TD;
  config.alpha = alpha;
  config.steps = steps;
  config.snapshot_every = snapshot_every;
  config.weight_mode = WeightMode::IMPLICIT;
  config.seed = seed;
  TrainLog log = train(mdp, Eigen::MatrixXd::Identity(3, 3), 2, config);

  RotatingReport report;
  report.errors.reserve(log.snapshots.size());
  report.min_sigma_ratio = std::numeric_limits<double>::infinity();
  for (const auto& snap : log.snapshots) {
    report.errors.push_back(td_eval_error(snap.phi, mdp));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(snap.phi);
    report.min_sigma_ratio = std::min(
        report.min_sigma_ratio,
        svd.singularValues()(1) / svd.singularValues()(0));
  }

  const std::size_t n = log.snapshots.size();
  const std::size_t half = n / 2;
  report.max_error = -std::numeric_limits<double>::infinity();
  report.min_error = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = half; i < n; ++i) {
    report.max_error = std::max(report.max_error, report.errors[i]);
    report.min_error = std::min(report.min_error, report.errors[i]);
    sum += report.errors[i];
  }
  report.mean_error = sum / static_cast<double>(n - half);

  report.min_consecutive_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = half; i + 1 < n; ++i)
    report.min_consecutive_distance = std::min(
        report.min_consecutive_distance,
        normalized_subspace_distance(log.snapshots[i].phi,
                                     log.snapshots[i + 1].phi));

  report.log = std::move(log);
  return report;
}

Eigen::VectorXd sample_l1_ball(Rng& rng, int s) {
  Eigen::VectorXd x(s);
  for (int i = 0; i < s; ++i) x(i) = -std::log(1.0 - rng.uniform());
  x /= x.sum();
  for (int i = 0; i < s; ++i)
    if (rng.bernoulli(0.5)) x(i) = -x(i);
  return std::pow(rng.uniform(), 1.0 / s) * x;
}

Eigen::MatrixXd sample_l1_ball_matrix(Rng& rng, int s, int n) {
  Eigen::MatrixXd out(s, n);
  for (int j = 0; j < n; ++j) out.col(j) = sample_l1_ball(rng, s);
  return out;
}

Eigen::MatrixXd value_error_operator(const Eigen::MatrixXd& phi,
                                     const TabularMDP& mdp, Rule rule) {
  const int s = mdp.n_states();
  auto sr = successor_representation(mdp);
  Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(s, s);
  Eigen::MatrixXd weight_op;
  switch (rule) {
    case Rule::TD: weight_op = lstd_weights(phi, mdp, identity); break;
    case Rule::MC: weight_op = mc_weights(phi, mdp, sr.matrix); break;
    case Rule::RESIDUAL: weight_op = residual_weights(phi, mdp, identity); break;
    default: throw std::logic_error("value_error_operator: unknown rule");
  }
  return half_weight(mdp.state_weights, phi * weight_op - sr.matrix);
}

double mean_squared_value_error(const Eigen::MatrixXd& error_op,
                                const Eigen::MatrixXd& samples) {
  if (samples.cols() < 1)
    throw std::invalid_argument("mean_squared_value_error: no samples");
  return (error_op * samples).squaredNorm() /
         static_cast<double>(samples.cols());
}

double sampled_value_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                           Rule rule, int n_samples, Rng& rng) {
  return mean_squared_value_error(
      value_error_operator(phi, mdp, rule),
      sample_l1_ball_matrix(rng, mdp.n_states(), n_samples));
}

}  // namespace repdyn
