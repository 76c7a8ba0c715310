#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "repdyn/learning.hpp"
#include "repdyn/mdp.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/subspace.hpp"

namespace repdyn {

// Downstream policy-evaluation error functionals. Each one measures, up to
// the constant induced by the isotropic reward law, the expected squared
// weighted value error of the representation when weights are fit by the
// corresponding rule with tabular reward targets.

// ||Xi^{1/2} (Phi * lstd_weights(Phi, I) - SR)||_F^2
double td_eval_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp);

// ||P_perp(Xi^{1/2} Phi) * Xi^{1/2} SR||_F^2
double mc_eval_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp);

// ||Xi^{1/2} SR * P_perp(Xi^{1/2} L Phi)||_F^2
double residual_eval_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp);

double eval_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp, Rule rule);

struct EvalReport {
  Rule method = Rule::TD;
  int d = 0;
  double error = 0.0;
  std::optional<double> reference_distance;
};

// CSV row "method,d,error,reference_distance" (blank when absent), floats
// with 17 significant digits.
std::string eval_report_csv_header();
std::string eval_report_csv_row(const EvalReport& report);

struct OptimalRepresentation {
  Subspace subspace;
  double error = 0.0;
  bool certified = false;  // closed form (true) vs numerical search (false)
};

// Best d-dimensional representation for the given rule. MC and RESIDUAL are
// closed forms from the weighted SVD of the SR; TD runs a restarted local
// search (restart 0 = SVD candidate, restart 1 = invariant-subspace candidate
// when it exists, the rest seeded random) and returns the best found.
OptimalRepresentation optimal_representation(const TabularMDP& mdp, int d,
                                             Rule method, int restarts = 32,
                                             std::uint64_t seed = 0);

struct RotatingReport {
  double max_error = 0.0;   // over second-half snapshots
  double min_error = 0.0;
  double mean_error = 0.0;
  double min_consecutive_distance = 0.0;  // second half, adjacent snapshots
  double min_sigma_ratio = 0.0;           // sigma_2 / sigma_1 over snapshots
  std::vector<double> errors;             // per snapshot, full trajectory
  TrainLog log;
};

// TD flow on a 3-state cycle with d = 2 and identity cumulants: the subspace
// keeps rotating while the value error stays flat.
RotatingReport rotating_value_error_constancy(const TabularMDP& mdp,
                                              double alpha = 0.08,
                                              int steps = 100000,
                                              int snapshot_every = 100,
                                              std::uint64_t seed = 0);

// Uniform sample from the unit l1 ball (normalized exponentials, random
// signs, radius U^{1/S}).
Eigen::VectorXd sample_l1_ball(Rng& rng, int s);
Eigen::MatrixXd sample_l1_ball_matrix(Rng& rng, int s, int n);

// Xi^{1/2} (Phi * W_rule - SR): squared norm of its action on a reward is
// that reward's squared weighted value error.
Eigen::MatrixXd value_error_operator(const Eigen::MatrixXd& phi,
                                     const TabularMDP& mdp, Rule rule);

// Mean of ||op * r||^2 over the sample columns.
double mean_squared_value_error(const Eigen::MatrixXd& error_op,
                                const Eigen::MatrixXd& samples);

double sampled_value_error(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                           Rule rule, int n_samples, Rng& rng);

}  // namespace repdyn
