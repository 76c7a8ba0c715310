#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "repdyn/mdp.hpp"

namespace repdyn {

enum class Rule { MC, TD, RESIDUAL };

std::string rule_name(Rule rule);
Rule rule_from_name(const std::string& name);
enum class WeightMode {
  IMPLICIT,  // W re-solved in closed form every step (representation flow)
  COUPLED,   // W updated by its own gradient step, simultaneously with Phi
};

// Closed-form weight solutions for a fixed representation.
// lstd: W = (Phi^T Xi L Phi)^{-1} Phi^T Xi G, L = I - gamma P.
Eigen::MatrixXd lstd_weights(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                             const Eigen::MatrixXd& g);
// mc: Xi-weighted least squares of targets on Phi.
Eigen::MatrixXd mc_weights(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                           const Eigen::MatrixXd& targets);
// residual: Xi-weighted least squares of G on L Phi.
Eigen::MatrixXd residual_weights(const Eigen::MatrixXd& phi,
                                 const TabularMDP& mdp,
                                 const Eigen::MatrixXd& g);

// Losses the rules descend. TD and residual share the Bellman-residual form
// ||Xi^{1/2}(L Phi W - G)||_F^2; MC regresses on fixed targets Psi = SR G.
double bellman_residual_loss(const Eigen::MatrixXd& phi,
                             const Eigen::MatrixXd& w, const TabularMDP& mdp,
                             const Eigen::MatrixXd& g);
double mc_loss(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w,
               const Eigen::MatrixXd& targets, const Eigen::VectorXd& xi);

// One simultaneous coupled update of (Phi, W). All steps use the true
// gradients of their losses (the stop-gradient target held fixed for TD), so
// step = -alpha * gradient including the factor 2.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> td_semi_gradient_step(
    const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w, const TabularMDP& mdp,
    const Eigen::MatrixXd& g, double alpha);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> mc_gradient_step(
    const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w, const TabularMDP& mdp,
    const Eigen::MatrixXd& g, double alpha);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> residual_gradient_step(
    const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w, const TabularMDP& mdp,
    const Eigen::MatrixXd& g, double alpha);

// One explicit-Euler step of the implicit-weight dynamics
// Phi' = Phi - alpha * F(Phi), F(Phi) = 2 Xi (L Phi W* - G) W*^T with
// W* = lstd_weights(Phi). Propagates invertibility failure.
Eigen::MatrixXd td_flow_step(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                             const Eigen::MatrixXd& g, double alpha);
Eigen::MatrixXd mc_flow_step(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                             const Eigen::MatrixXd& g, double alpha);
Eigen::MatrixXd residual_flow_step(const Eigen::MatrixXd& phi,
                                   const TabularMDP& mdp,
                                   const Eigen::MatrixXd& g, double alpha);

struct TrainConfig {
  Rule rule = Rule::TD;
  double alpha = 0.08;
  long steps = 100000;
  int n_step = 1;
  WeightMode weight_mode = WeightMode::IMPLICIT;
  std::uint64_t seed = 0;
  long snapshot_every = 100;
  Eigen::MatrixXd init_phi;  // when non-empty, replaces the random init
};

struct TrainSnapshot {
  long step;
  double loss;
  Eigen::MatrixXd phi;
};

struct TrainLog {
  std::vector<TrainSnapshot> snapshots;  // ordered by step, includes step 0
  Eigen::MatrixXd final_phi;
  Eigen::MatrixXd final_w;
  bool diverged = false;
};

// Full training loop: Phi0 has iid N(0, 1/S) entries (seeded); the configured
// rule runs for config.steps or until the loss diverges (> 1e12 or
// non-finite), which is logged, not thrown.
TrainLog train(const TabularMDP& mdp, const Eigen::MatrixXd& g, int d,
               const TrainConfig& config);

// n-step operator pair: L_n = I - gamma^n P^n, G_n = sum_{k<n} gamma^k P^k G.
struct NStepOperator {
  Eigen::MatrixXd l_n;
  Eigen::MatrixXd g_n;
};

NStepOperator n_step_operator(const TabularMDP& mdp, const Eigen::MatrixXd& g,
                              int n);

}  // namespace repdyn
