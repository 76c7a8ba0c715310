#include "repdyn/learning.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "repdyn/constants.hpp"
#include "repdyn/rng.hpp"

namespace repdyn {

std::string rule_name(Rule rule) {
  switch (rule) {
    case Rule::MC: return "mc";
    case Rule::TD: return "td";
    case Rule::RESIDUAL: return "residual";
  }
  throw std::logic_error("rule_name: unknown rule");
}

Rule rule_from_name(const std::string& name) {
  if (name == "mc") return Rule::MC;
  if (name == "td") return Rule::TD;
  if (name == "residual") return Rule::RESIDUAL;
  throw std::invalid_argument("unknown rule: " + name);
}

namespace {

Eigen::MatrixXd bellman_operator(const TabularMDP& mdp) {
  const int s = mdp.n_states();
  return Eigen::MatrixXd::Identity(s, s) - mdp.discount * mdp.transition;
}

// Solve a w = rhs with an invertibility check; the failure message reports
// the condition number so callers can see how degenerate the system was.
Eigen::MatrixXd checked_solve(const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& rhs, const char* who) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  double smin = s(s.size() - 1);
  if (!(smin > 0.0) || s(0) / smin >= 1e12)
    throw std::runtime_error(
        std::string(who) + ": system matrix is not invertible (condition " +
        (smin > 0.0 ? std::to_string(s(0) / smin) : "inf") + ")");
  return a.partialPivLu().solve(rhs);
}

double weighted_sq_norm(const Eigen::MatrixXd& r, const Eigen::VectorXd& xi) {
  return (r.array().square().colwise() * xi.array()).sum();
}

}  // namespace

Eigen::MatrixXd lstd_weights(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                             const Eigen::MatrixXd& g) {
  Eigen::MatrixXd xiphi = mdp.state_weights.asDiagonal() * phi;
  Eigen::MatrixXd a = xiphi.transpose() * (bellman_operator(mdp) * phi);
  return checked_solve(a, xiphi.transpose() * g, "lstd_weights");
}

Eigen::MatrixXd mc_weights(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                           const Eigen::MatrixXd& targets) {
  Eigen::MatrixXd xiphi = mdp.state_weights.asDiagonal() * phi;
  Eigen::MatrixXd a = xiphi.transpose() * phi;
  return checked_solve(a, xiphi.transpose() * targets, "mc_weights");
}

Eigen::MatrixXd residual_weights(const Eigen::MatrixXd& phi,
                                 const TabularMDP& mdp,
                                 const Eigen::MatrixXd& g) {
  Eigen::MatrixXd lphi = bellman_operator(mdp) * phi;
  Eigen::MatrixXd xilphi = mdp.state_weights.asDiagonal() * lphi;
  Eigen::MatrixXd a = xilphi.transpose() * lphi;
  return checked_solve(a, xilphi.transpose() * g, "residual_weights");
}

double bellman_residual_loss(const Eigen::MatrixXd& phi,
                             const Eigen::MatrixXd& w, const TabularMDP& mdp,
                             const Eigen::MatrixXd& g) {
  return weighted_sq_norm(bellman_operator(mdp) * phi * w - g,
                          mdp.state_weights);
}

double mc_loss(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w,
               const Eigen::MatrixXd& targets, const Eigen::VectorXd& xi) {
  return weighted_sq_norm(phi * w - targets, xi);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> td_semi_gradient_step(
    const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w, const TabularMDP& mdp,
    const Eigen::MatrixXd& g, double alpha) {
  Eigen::MatrixXd r = bellman_operator(mdp) * phi * w - g;
  Eigen::MatrixXd xir = mdp.state_weights.asDiagonal() * r;
  return {phi - 2.0 * alpha * xir * w.transpose(),
          w - 2.0 * alpha * phi.transpose() * xir};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> mc_gradient_step(
    const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w, const TabularMDP& mdp,
    const Eigen::MatrixXd& g, double alpha) {
  Eigen::MatrixXd targets = gvf_targets(successor_representation(mdp), g);
  Eigen::MatrixXd r = phi * w - targets;
  Eigen::MatrixXd xir = mdp.state_weights.asDiagonal() * r;
  return {phi - 2.0 * alpha * xir * w.transpose(),
          w - 2.0 * alpha * phi.transpose() * xir};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> residual_gradient_step(
    const Eigen::MatrixXd& phi, const Eigen::MatrixXd& w, const TabularMDP& mdp,
    const Eigen::MatrixXd& g, double alpha) {
  Eigen::MatrixXd l = bellman_operator(mdp);
  Eigen::MatrixXd lphi = l * phi;
  Eigen::MatrixXd xir = mdp.state_weights.asDiagonal() * (lphi * w - g);
  return {phi - 2.0 * alpha * l.transpose() * (xir * w.transpose()),
          w - 2.0 * alpha * lphi.transpose() * xir};
}

Eigen::MatrixXd td_flow_step(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                             const Eigen::MatrixXd& g, double alpha) {
  Eigen::MatrixXd w = lstd_weights(phi, mdp, g);
  Eigen::MatrixXd r = bellman_operator(mdp) * phi * w - g;
  return phi - 2.0 * alpha * mdp.state_weights.asDiagonal() * r * w.transpose();
}

Eigen::MatrixXd mc_flow_step(const Eigen::MatrixXd& phi, const TabularMDP& mdp,
                             const Eigen::MatrixXd& g, double alpha) {
  Eigen::MatrixXd targets = gvf_targets(successor_representation(mdp), g);
  Eigen::MatrixXd w = mc_weights(phi, mdp, targets);
  Eigen::MatrixXd r = phi * w - targets;
  return phi - 2.0 * alpha * mdp.state_weights.asDiagonal() * r * w.transpose();
}

Eigen::MatrixXd residual_flow_step(const Eigen::MatrixXd& phi,
                                   const TabularMDP& mdp,
                                   const Eigen::MatrixXd& g, double alpha) {
  Eigen::MatrixXd l = bellman_operator(mdp);
  Eigen::MatrixXd w = residual_weights(phi, mdp, g);
  Eigen::MatrixXd xir = mdp.state_weights.asDiagonal() * (l * phi * w - g);
  return phi - 2.0 * alpha * l.transpose() * (xir * w.transpose());
}

NStepOperator n_step_operator(const TabularMDP& mdp, const Eigen::MatrixXd& g,
                              int n) {
  if (n < 1) throw std::invalid_argument("n_step_operator: n >= 1");
  const int s = mdp.n_states();
  NStepOperator out;
  out.g_n = g;
  Eigen::MatrixXd pk = Eigen::MatrixXd::Identity(s, s);
  for (int k = 1; k < n; ++k) {
    pk = mdp.discount * mdp.transition * pk;
    out.g_n += pk * g;
  }
  pk = mdp.discount * mdp.transition * pk;  // gamma^n P^n
  out.l_n = Eigen::MatrixXd::Identity(s, s) - pk;
  return out;
}

TrainLog train(const TabularMDP& mdp, const Eigen::MatrixXd& g, int d,
               const TrainConfig& config) {
  if (config.alpha <= 0.0) throw std::invalid_argument("train: alpha > 0");
  if (config.steps < 0) throw std::invalid_argument("train: steps >= 0");
  if (config.snapshot_every < 1)
    throw std::invalid_argument("train: snapshot_every >= 1");
  const int s = mdp.n_states();
  const int t_cols = static_cast<int>(g.cols());
  const Eigen::VectorXd& xi = mdp.state_weights;

  NStepOperator op = n_step_operator(mdp, g, config.n_step);
  const Eigen::MatrixXd& l = op.l_n;
  const Eigen::MatrixXd& geff = op.g_n;
  Eigen::MatrixXd targets;  // MC regression targets, L_n^{-1} G_n
  if (config.rule == Rule::MC) targets = l.partialPivLu().solve(geff);

  Eigen::MatrixXd phi;
  if (config.init_phi.size() != 0) {
    if (config.init_phi.rows() != s || config.init_phi.cols() != d)
      throw std::invalid_argument("train: init_phi must be S x d");
    phi = config.init_phi;
  } else {
    Rng rng(config.seed);
    phi = rng.gaussian_matrix(s, d) / std::sqrt(static_cast<double>(s));
  }
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, t_cols);

  // One iteration of the configured dynamics; returns the loss at the
  // incoming state and overwrites (phi, w).
  Eigen::MatrixXd lphi(s, d), xiphi(s, d), a(d, d), r(s, t_cols), xir(s, t_cols);
  auto solve_weights = [&](const Eigen::MatrixXd& mat,
                           const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
    return mat.partialPivLu().solve(rhs);
  };
  auto implicit_w = [&]() -> Eigen::MatrixXd {
    xiphi.noalias() = xi.asDiagonal() * phi;
    switch (config.rule) {
      case Rule::TD:
        lphi.noalias() = l * phi;
        a.noalias() = xiphi.transpose() * lphi;
        return solve_weights(a, xiphi.transpose() * geff);
      case Rule::MC:
        a.noalias() = xiphi.transpose() * phi;
        return solve_weights(a, xiphi.transpose() * targets);
      case Rule::RESIDUAL: {
        lphi.noalias() = l * phi;
        Eigen::MatrixXd xilphi = xi.asDiagonal() * lphi;
        a.noalias() = xilphi.transpose() * lphi;
        return solve_weights(a, xilphi.transpose() * geff);
      }
    }
    throw std::logic_error("train: unknown rule");
  };
  auto loss_at = [&](const Eigen::MatrixXd& wt) {
    if (config.rule == Rule::MC)
      return weighted_sq_norm(phi * wt - targets, xi);
    return weighted_sq_norm(l * phi * wt - geff, xi);
  };
  auto do_step = [&]() -> double {
    // implicit_w() leaves lphi evaluated at the current phi for TD/RESIDUAL,
    // so the residual below can reuse it.
    bool lphi_fresh = false;
    if (config.weight_mode == WeightMode::IMPLICIT) {
      w = implicit_w();
      lphi_fresh = config.rule != Rule::MC;
    }
    double loss;
    switch (config.rule) {
      case Rule::TD:
      case Rule::RESIDUAL:
        if (!lphi_fresh) lphi.noalias() = l * phi;
        r.noalias() = lphi * w;
        r -= geff;
        break;
      case Rule::MC:
        r.noalias() = phi * w;
        r -= targets;
        break;
    }
    loss = weighted_sq_norm(r, xi);
    xir.noalias() = xi.asDiagonal() * r;
    Eigen::MatrixXd wgrad;
    if (config.weight_mode == WeightMode::COUPLED) {
      if (config.rule == Rule::RESIDUAL)
        wgrad = 2.0 * lphi.transpose() * xir;
      else
        wgrad = 2.0 * phi.transpose() * xir;
    }
    if (config.rule == Rule::RESIDUAL)
      phi -= 2.0 * config.alpha * l.transpose() * (xir * w.transpose());
    else
      phi -= 2.0 * config.alpha * xir * w.transpose();
    if (config.weight_mode == WeightMode::COUPLED) w -= config.alpha * wgrad;
    return loss;
  };

  TrainLog log;
  auto snapshot = [&](long step) {
    Eigen::MatrixXd wt =
        config.weight_mode == WeightMode::IMPLICIT ? implicit_w() : w;
    log.snapshots.push_back({step, loss_at(wt), phi});
  };
  snapshot(0);
  for (long step = 1; step <= config.steps; ++step) {
    double loss = do_step();
    if (!std::isfinite(loss) || loss > divergence_threshold ||
        !phi.allFinite()) {
      log.diverged = true;
      log.snapshots.push_back({step, loss, phi});
      break;
    }
    if (step % config.snapshot_every == 0 || step == config.steps)
      snapshot(step);
  }
  log.final_phi = phi;
  log.final_w = config.weight_mode == WeightMode::IMPLICIT && !log.diverged
                    ? implicit_w()
                    : w;
  return log;
}

}  // namespace repdyn
