#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "repdyn/evaluation.hpp"
#include "repdyn/mdp.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/subspace.hpp"

using namespace repdyn;

namespace {

Eigen::MatrixXd bellman(const TabularMDP& mdp) {
  const int s = mdp.n_states();
  return Eigen::MatrixXd::Identity(s, s) - mdp.discount * mdp.transition;
}

Eigen::MatrixXd half_weight(const TabularMDP& mdp, const Eigen::MatrixXd& a) {
  return mdp.state_weights.array().sqrt().matrix().asDiagonal() * a;
}

double svd_tail(const TabularMDP& mdp, int d) {
  Eigen::VectorXd sigma = weighted_singular_values(
      successor_representation(mdp).matrix, mdp.state_weights);
  double tail = 0.0;
  for (int j = d; j < sigma.size(); ++j) tail += sigma(j) * sigma(j);
  return tail;
}

}  // namespace

TEST_CASE("full-rank representations have zero evaluation error") {
  TabularMDP mdp = random_reversible_mdp(1, 8);
  Eigen::MatrixXd full = Eigen::MatrixXd::Identity(8, 8);
  CHECK(td_eval_error(full, mdp) < 1e-16);
  CHECK(mc_eval_error(full, mdp) < 1e-16);
  CHECK(residual_eval_error(full, mdp) < 1e-16);
}

TEST_CASE("td estimate is the oblique Galerkin projection of the SR") {
  TabularMDP mdp = random_reversible_mdp(2, 10);
  Rng rng(3);
  Eigen::MatrixXd phi = orthonormal_basis(rng.gaussian_matrix(10, 3));
  auto sr = successor_representation(mdp);
  Eigen::MatrixXd x = bellman(mdp).transpose() *
                      (mdp.state_weights.asDiagonal() * phi);
  Eigen::MatrixXd projected = oblique_projection(phi, x) * sr.matrix;
  double oracle = half_weight(mdp, projected - sr.matrix).squaredNorm();
  CHECK(td_eval_error(phi, mdp) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("mc error at the top singular basis equals the tail energy") {
  TabularMDP mdp = random_reversible_mdp(4, 12);
  for (int d : {2, 4}) {
    Eigen::MatrixXd f_d = orthonormal_basis(
        weighted_truncated_svd(successor_representation(mdp).matrix,
                               mdp.state_weights, d)
            .f_d);
    CHECK(mc_eval_error(f_d, mdp) ==
          doctest::Approx(svd_tail(mdp, d)).epsilon(1e-8));
  }
}

TEST_CASE("td error dominates mc error pointwise") {
  TabularMDP mdp = random_reversible_mdp(5, 10);
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd phi = orthonormal_basis(rng.gaussian_matrix(10, 3));
    double mc = mc_eval_error(phi, mdp);
    CHECK(td_eval_error(phi, mdp) >= mc - 1e-9 * (1.0 + mc));
  }
}

TEST_CASE("evaluation errors are basis invariant") {
  TabularMDP mdp = random_reversible_mdp(7, 10);
  Rng rng(8);
  Eigen::MatrixXd phi = orthonormal_basis(rng.gaussian_matrix(10, 3));
  Eigen::MatrixXd mix =
      Eigen::MatrixXd::Identity(3, 3) + 0.4 * rng.gaussian_matrix(3, 3);
  for (Rule rule : {Rule::MC, Rule::TD, Rule::RESIDUAL}) {
    double a = eval_error(phi, mdp, rule);
    double b = eval_error(phi * mix, mdp, rule);
    CHECK(std::abs(a - b) / a < 1e-8);
  }
}

TEST_CASE("csv report formatting") {
  CHECK(eval_report_csv_header() == "method,d,error,reference_distance");
  EvalReport r;
  r.method = Rule::TD;
  r.d = 3;
  r.error = 0.25;
  CHECK(eval_report_csv_row(r) == "td,3,0.25,");
  r.method = Rule::RESIDUAL;
  r.reference_distance = 0.5;
  CHECK(eval_report_csv_row(r) == "residual,3,0.25,0.5");
}

TEST_CASE("optimal representations: closed forms are certified and tight") {
  TabularMDP mdp = random_reversible_mdp(9, 12);
  const int d = 3;

  OptimalRepresentation mc = optimal_representation(mdp, d, Rule::MC);
  CHECK(mc.certified);
  mc.subspace.validate();
  CHECK(mc.error == doctest::Approx(svd_tail(mdp, d)).epsilon(1e-8));

  OptimalRepresentation res = optimal_representation(mdp, d, Rule::RESIDUAL);
  CHECK(res.certified);
  res.subspace.validate();
  CHECK(res.error == doctest::Approx(svd_tail(mdp, d)).epsilon(1e-8));

  // A handful of random candidates never beat the closed forms.
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd phi = orthonormal_basis(rng.gaussian_matrix(12, d));
    CHECK(mc_eval_error(phi, mdp) >= mc.error - 1e-10);
    CHECK(residual_eval_error(phi, mdp) >= res.error - 1e-10);
  }
}

TEST_CASE("td optimum search is at least as good as its svd seed") {
  TabularMDP mdp = random_reversible_mdp(11, 10);
  const int d = 2;
  Eigen::MatrixXd f_d = orthonormal_basis(
      weighted_truncated_svd(successor_representation(mdp).matrix,
                             mdp.state_weights, d)
          .f_d);
  OptimalRepresentation td = optimal_representation(mdp, d, Rule::TD, 6, 0);
  CHECK_FALSE(td.certified);
  td.subspace.validate();
  CHECK(td.error <= td_eval_error(f_d, mdp) * (1.0 + 1e-9) + 1e-12);
  // Search is deterministic.
  OptimalRepresentation again = optimal_representation(mdp, d, Rule::TD, 6, 0);
  CHECK(td.error == again.error);
  CHECK((td.subspace.basis - again.subspace.basis).norm() == 0.0);
}

TEST_CASE("rotating run reports flat errors and a moving subspace") {
  CHECK_THROWS_AS(
      rotating_value_error_constancy(random_reversible_mdp(12, 5), 0.05, 10, 5),
      std::invalid_argument);

  TabularMDP cycle = make_three_state_cycle(0.9);
  RotatingReport report =
      rotating_value_error_constancy(cycle, 0.08, 20000, 100, 0);
  CHECK(report.errors.size() == report.log.snapshots.size());
  CHECK(report.max_error >= report.mean_error);
  CHECK(report.mean_error >= report.min_error);
  CHECK((report.max_error - report.min_error) / report.mean_error < 1e-4);
  CHECK(report.min_consecutive_distance > 1e-4);
  CHECK(report.min_sigma_ratio > 1e-6);
}

TEST_CASE("l1 ball sampler: support, determinism, second moments") {
  const int s = 5;
  Rng rng(13);
  for (int i = 0; i < 100; ++i)
    CHECK(sample_l1_ball(rng, s).lpNorm<1>() <= 1.0 + 1e-12);

  Rng a(14), b(14);
  CHECK((sample_l1_ball_matrix(a, s, 7) - sample_l1_ball_matrix(b, s, 7))
            .norm() == 0.0);

  // E[x x^T] = 2 / ((S+1)(S+2)) I for the uniform l1-ball law.
  const int n = 40000;
  Rng rng2(15);
  Eigen::MatrixXd xs = sample_l1_ball_matrix(rng2, s, n);
  Eigen::MatrixXd second = xs * xs.transpose() / double(n);
  double want = 2.0 / ((s + 1.0) * (s + 2.0));
  for (int i = 0; i < s; ++i) {
    CHECK(second(i, i) == doctest::Approx(want).epsilon(0.05));
    for (int j = 0; j < s; ++j)
      if (i != j) CHECK(std::abs(second(i, j)) < 0.05 * want);
  }
}

TEST_CASE("sampled value error tracks the closed forms") {
  TabularMDP mdp = random_reversible_mdp(16, 9);
  Rng rng(17);
  Eigen::MatrixXd phi = orthonormal_basis(rng.gaussian_matrix(9, 3));
  const double c = 2.0 / ((9 + 1.0) * (9 + 2.0));

  Eigen::MatrixXd shared = sample_l1_ball_matrix(rng, 9, 20000);
  for (Rule rule : {Rule::MC, Rule::TD, Rule::RESIDUAL}) {
    double closed = eval_error(phi, mdp, rule);
    double sampled =
        mean_squared_value_error(value_error_operator(phi, mdp, rule), shared);
    CHECK(sampled == doctest::Approx(c * closed).epsilon(0.08));
  }

  CHECK_THROWS_AS(
      mean_squared_value_error(Eigen::MatrixXd::Identity(3, 3),
                               Eigen::MatrixXd(3, 0)),
      std::invalid_argument);
}
