#include "repdyn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>
#include <stdexcept>

#include "repdyn/constants.hpp"
#include "repdyn/cumulants.hpp"
#include "repdyn/evaluation.hpp"
#include "repdyn/learning.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/subspace.hpp"

namespace repdyn {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

double opnorm(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues()(0);
}

Eigen::MatrixXd orth_gaussian(std::uint64_t seed, int s, int d) {
  Rng rng(seed);
  return orthonormal_basis(rng.gaussian_matrix(s, d));
}

double weighted_sq(const Eigen::MatrixXd& r, const Eigen::VectorXd& xi) {
  return (r.array().square().colwise() * xi.array()).sum();
}

Eigen::MatrixXd bellman_operator(const TabularMDP& mdp) {
  const int s = mdp.n_states();
  return Eigen::MatrixXd::Identity(s, s) - mdp.discount * mdp.transition;
}

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

// Eigenvectors of a real-spectrum transition matrix, sorted by decreasing
// eigenvalue (the instability checks start training at a chosen subset).
Eigen::MatrixXd sorted_real_eigenvectors(const Eigen::MatrixXd& p) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(p);
  const int n = static_cast<int>(p.rows());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return es.eigenvalues()(a).real() > es.eigenvalues()(b).real();
  });
  Eigen::MatrixXd v(n, n);
  for (int i = 0; i < n; ++i) v.col(i) = es.eigenvectors().col(order[i]).real();
  return v;
}

// Plain training loop over the supplied TD step (so a broken step surfaces
// here rather than inside train()).
Eigen::MatrixXd td_train_with_step(const TdStepFn& step, const TabularMDP& mdp,
                                   const Eigen::MatrixXd& g, int d,
                                   double alpha, long steps,
                                   std::uint64_t seed, bool* diverged) {
  Rng rng(seed);
  const int s = mdp.n_states();
  Eigen::MatrixXd phi =
      rng.gaussian_matrix(s, d) / std::sqrt(static_cast<double>(s));
  *diverged = false;
  for (long i = 0; i < steps; ++i) {
    phi = step(phi, mdp, g, alpha);
    if (!phi.allFinite() || phi.norm() > 1e9) {
      *diverged = true;
      return phi;
    }
  }
  return phi;
}

std::vector<TabularMDP> standard_instances() {
  std::vector<TabularMDP> out;
  out.push_back(make_three_state_cycle());
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    out.push_back(random_reversible_mdp(seed, 20));
  for (std::uint64_t seed = 1; seed <= 3; ++seed)
    out.push_back(random_symmetric_mdp(seed, 20));
  out.push_back(make_four_room(0.8));
  return out;
}

CheckResult check_generator_validity() {
  auto instances = standard_instances();
  for (const auto& mdp : instances) mdp.validate();
  return {true, std::to_string(instances.size()) + " instances valid"};
}

CheckResult check_sr_row_sums() {
  double worst = 0.0;
  for (const auto& mdp : standard_instances()) {
    auto sr = successor_representation(mdp);
    double expect = 1.0 / (1.0 - mdp.discount);
    worst = std::max(
        worst, (sr.matrix.rowwise().sum().array() - expect).abs().maxCoeff());
  }
  return {worst < tol::spectral, "max |row sum - 1/(1-gamma)| = " + fmt(worst)};
}

CheckResult check_symmetric_sr_spectrum() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    TabularMDP mdp = random_symmetric_mdp(seed, 20);
    auto sr = successor_representation(mdp);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (sr.matrix + sr.matrix.transpose()));
    double lo = 1.0 / (1.0 + mdp.discount);
    double hi = 1.0 / (1.0 - mdp.discount);
    worst = std::max(worst, lo - es.eigenvalues().minCoeff());
    worst = std::max(worst, es.eigenvalues().maxCoeff() - hi);
  }
  return {worst < tol::spectral,
          "max spectral excursion outside [1/(1+g), 1/(1-g)] = " + fmt(worst)};
}

CheckResult check_generator_determinism() {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    TabularMDP a = random_reversible_mdp(seed, 17);
    TabularMDP b = random_reversible_mdp(seed, 17);
    if (!bitwise_equal(a.transition, b.transition) ||
        !bitwise_equal(a.state_weights, b.state_weights))
      return {false, "reversible generator differs at seed " +
                         std::to_string(seed)};
    TabularMDP c = random_symmetric_mdp(seed, 17);
    TabularMDP d = random_symmetric_mdp(seed, 17);
    if (!bitwise_equal(c.transition, d.transition) ||
        !bitwise_equal(c.state_weights, d.state_weights))
      return {false,
              "symmetric generator differs at seed " + std::to_string(seed)};
  }
  TabularMDP fr1 = make_four_room(0.8);
  TabularMDP fr2 = make_four_room(0.8);
  if (!bitwise_equal(fr1.transition, fr2.transition))
    return {false, "four-room builder differs between calls"};
  return {true, "repeated generation is bit-identical"};
}

CheckResult check_distance_basis_invariance() {
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(derive_seed(200, trial));
    const int s = 12, d = 1 + trial % 4;
    Eigen::MatrixXd a = rng.gaussian_matrix(s, d);
    Eigen::MatrixXd b = rng.gaussian_matrix(s, d);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) +
                        0.3 * rng.gaussian_matrix(d, d);
    double base = normalized_subspace_distance(a, b);
    double mixed = normalized_subspace_distance(a * m, b);
    worst = std::max(worst, std::abs(base - mixed));
  }
  return {worst < tol::structural, "max |d(AM,B) - d(A,B)| = " + fmt(worst)};
}

CheckResult check_invariant_subspace_residual() {
  int count = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(derive_seed(210, trial));
    Eigen::MatrixXd m = rng.gaussian_matrix(12, 12);
    int want = 1 + trial % 5;
    for (int d = want; d >= 1; --d) {
      SpectralSplit split = spectral_split(m, d);
      if (!split.block_safe_at_d) continue;
      Subspace q = top_d_invariant_subspace(m, d);
      if (!is_invariant_subspace(q.basis, m, tol::spectral))
        return {false, "invariance violated at trial " + std::to_string(trial)};
      ++count;
      break;
    }
  }
  return {true, std::to_string(count) + " invariant subspaces verified"};
}

CheckResult check_symmetric_svd_invariant_agreement() {
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(derive_seed(220, trial));
    Eigen::MatrixXd a = rng.gaussian_matrix(12, 12);
    Eigen::MatrixXd m = a.transpose() * a / 12.0 +
                        0.1 * Eigen::MatrixXd::Identity(12, 12);
    Subspace inv = top_d_invariant_subspace(m, 3);
    Eigen::VectorXd xi = Eigen::VectorXd::Constant(12, 1.0 / 12.0);
    WeightedSvd svd = weighted_truncated_svd(m, xi, 3);
    worst = std::max(
        worst, sin_theta_distance(inv.basis, orthonormal_basis(svd.f_d)));
  }
  return {worst < tol::spectral,
          "max sin-theta between top invariant and top SVD subspace = " +
              fmt(worst)};
}

CheckResult check_distance_zero_agreement() {
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(derive_seed(230, trial));
    const int s = 10, d = 2;
    Eigen::MatrixXd a = rng.gaussian_matrix(s, d);
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d) +
                        0.3 * rng.gaussian_matrix(d, d);
    Eigen::MatrixXd b = rng.gaussian_matrix(s, d);
    double nsd_same = normalized_subspace_distance(a, a * m);
    double sin_same = sin_theta_distance(orthonormal_basis(a),
                                         orthonormal_basis(a * m));
    double nsd_diff = normalized_subspace_distance(a, b);
    double sin_diff = sin_theta_distance(orthonormal_basis(a),
                                         orthonormal_basis(b));
    bool same_agree = (nsd_same < tol::structural) &&
                      (sin_same < tol::structural);
    bool diff_agree = (nsd_diff > tol::structural) &&
                      (sin_diff > tol::structural);
    if (!same_agree || !diff_agree)
      return {false, "zero sets disagree at trial " + std::to_string(trial) +
                         ": nsd " + fmt(nsd_same) + "/" + fmt(nsd_diff) +
                         " sin " + fmt(sin_same) + "/" + fmt(sin_diff)};
  }
  return {true, "both distances vanish exactly together on 10 trials"};
}

CheckResult check_schur_reordering() {
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(derive_seed(240, trial));
    Eigen::MatrixXd m = rng.gaussian_matrix(12, 12);
    OrderedSchur schur = ordered_real_schur(m);
    double residual =
        (schur.q * schur.t * schur.q.transpose() - m).norm() / m.norm();
    worst = std::max(worst, residual);
    for (std::size_t i = 1; i < schur.eigenvalues.size(); ++i)
      if (schur.eigenvalues[i - 1].real() <
          schur.eigenvalues[i].real() - tol::structural)
        return {false, "eigenvalue order violated at trial " +
                           std::to_string(trial)};
  }
  return {worst < tol::structural,
          "max reordering residual |QTQ' - M|/|M| = " + fmt(worst)};
}

struct SharedTdRun {
  std::once_flag flag;
  TabularMDP mdp;
  Eigen::MatrixXd phi;
  bool diverged = false;
  std::string error;
};

void ensure_td_run(const std::shared_ptr<SharedTdRun>& run,
                   const TdStepFn& step) {
  std::call_once(run->flag, [&] {
    try {
      run->mdp = random_reversible_mdp(11, 15);
      Eigen::MatrixXd g = Eigen::MatrixXd::Identity(15, 15);
      run->phi = td_train_with_step(step, run->mdp, g, 3, 0.08, 40000, 101,
                                    &run->diverged);
    } catch (const std::exception& e) {
      run->error = e.what();
      run->diverged = true;
    }
  });
}

CheckResult check_td_fixed_point(const std::shared_ptr<SharedTdRun>& run,
                                 const TdStepFn& step) {
  ensure_td_run(run, step);
  if (!run->error.empty()) return {false, "training failed: " + run->error};
  if (run->diverged) return {false, "TD training diverged"};
  auto sr = successor_representation(run->mdp);
  // G = I, so the critical-point operator L^{-1} G G' Xi reduces to SR Xi.
  Eigen::MatrixXd m = sr.matrix * run->mdp.state_weights.asDiagonal();
  bool ok = is_invariant_subspace(run->phi, m, 1e-4);
  return {ok, std::string("trained subspace invariant under SR Xi: ") +
                  (ok ? "yes" : "no")};
}

CheckResult check_td_transition_invariance(
    const std::shared_ptr<SharedTdRun>& run, const TdStepFn& step) {
  ensure_td_run(run, step);
  if (!run->error.empty()) return {false, "training failed: " + run->error};
  if (run->diverged) return {false, "TD training diverged"};
  bool ok = is_invariant_subspace(run->phi, run->mdp.transition, 1e-4);
  return {ok, std::string("trained subspace invariant under P: ") +
                  (ok ? "yes" : "no")};
}

CheckResult check_symmetric_td_mc_agreement() {
  TabularMDP mdp = random_symmetric_mdp(21, 20);
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(20, 20);
  TrainConfig config;
  config.alpha = 0.08;
  config.steps = 30000;
  config.snapshot_every = config.steps;
  config.seed = 31;
  config.rule = Rule::TD;
  TrainLog td = train(mdp, g, 3, config);
  config.rule = Rule::MC;
  TrainLog mc = train(mdp, g, 3, config);
  if (td.diverged || mc.diverged) return {false, "training diverged"};
  double dist = normalized_subspace_distance(td.final_phi, mc.final_phi);
  return {dist < 1e-2, "TD-vs-MC subspace distance = " + fmt(dist)};
}

CheckResult check_td_instability_escape() {
  int reached = 0;
  const int n_seeds = 5;
  double worst_escape = std::numeric_limits<double>::infinity();
  double worst_reach = 0.0;
  for (int i = 0; i < n_seeds; ++i) {
    TabularMDP mdp = random_reversible_mdp(41 + i, 12);
    Eigen::MatrixXd v = sorted_real_eigenvectors(mdp.transition);
    Eigen::MatrixXd init = v.middleCols(1, 3);  // eigenvectors 2..4
    Rng rng(derive_seed(45, i));
    Eigen::MatrixXd noise = rng.gaussian_matrix(12, 3);
    Eigen::MatrixXd phi0 = init + 1e-6 / noise.norm() * noise;
    TrainConfig config;
    config.rule = Rule::TD;
    config.alpha = 0.08;
    config.steps = 120000;
    config.snapshot_every = config.steps;
    config.init_phi = phi0;
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(12, 12);
    TrainLog log = train(mdp, g, 3, config);
    if (log.diverged) continue;
    auto sr = successor_representation(mdp);
    double escape = normalized_subspace_distance(log.final_phi, init);
    double reach = normalized_subspace_distance(
        log.final_phi, top_d_invariant_subspace(sr.matrix, 3).basis);
    worst_escape = std::min(worst_escape, escape);
    worst_reach = std::max(worst_reach, reach);
    if (escape > 0.1 && reach < 1e-2) ++reached;
  }
  return {reached == n_seeds,
          std::to_string(reached) + "/" + std::to_string(n_seeds) +
              " seeds escaped (min escape " + fmt(worst_escape) +
              ", max residual " + fmt(worst_reach) + ")"};
}

CheckResult check_step_loss_decrease() {
  TabularMDP mdp = random_reversible_mdp(51, 10);
  Rng grng(52);
  Eigen::MatrixXd g = grng.gaussian_matrix(10, 4);
  auto sr = successor_representation(mdp);
  Eigen::MatrixXd targets = sr.matrix * g;
  const double alpha = 1e-4;
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < 10; ++t) {
    Rng rng(derive_seed(53, t));
    Eigen::MatrixXd phi = rng.gaussian_matrix(10, 3) / std::sqrt(10.0);
    Eigen::MatrixXd w = 0.1 * rng.gaussian_matrix(3, 4);

    // TD: the frozen-target loss must decrease across one step.
    Eigen::MatrixXd frozen =
        g + mdp.discount * mdp.transition * (phi * w);
    double before = weighted_sq(phi * w - frozen, mdp.state_weights);
    auto [phi_td, w_td] = td_semi_gradient_step(phi, w, mdp, g, alpha);
    double after = weighted_sq(phi_td * w_td - frozen, mdp.state_weights);
    worst = std::max(worst, after - before);

    before = mc_loss(phi, w, targets, mdp.state_weights);
    auto [phi_mc, w_mc] = mc_gradient_step(phi, w, mdp, g, alpha);
    after = mc_loss(phi_mc, w_mc, targets, mdp.state_weights);
    worst = std::max(worst, after - before);

    before = bellman_residual_loss(phi, w, mdp, g);
    auto [phi_rg, w_rg] = residual_gradient_step(phi, w, mdp, g, alpha);
    after = bellman_residual_loss(phi_rg, w_rg, mdp, g);
    worst = std::max(worst, after - before);
  }
  return {worst < 0.0, "max one-step loss change = " + fmt(worst)};
}

CheckResult check_nstep_invariance() {
  TabularMDP mdp = random_symmetric_mdp(61, 15);
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(15, 15);
  double worst_ok = 1.0;
  for (int n = 2; n <= 3; ++n) {
    TrainConfig config;
    config.rule = Rule::TD;
    config.alpha = 0.08;
    config.steps = 40000;
    config.snapshot_every = config.steps;
    config.seed = 62;
    config.n_step = n;
    TrainLog log = train(mdp, g, 3, config);
    if (log.diverged) return {false, "n-step training diverged"};
    NStepOperator op = n_step_operator(mdp, g, n);
    Eigen::MatrixXd ln_inv =
        op.l_n.partialPivLu().solve(Eigen::MatrixXd::Identity(15, 15));
    if (!is_invariant_subspace(log.final_phi, ln_inv, 1e-4))
      return {false, "trained subspace not invariant at n = " +
                         std::to_string(n)};
  }
  return {true, "n in {2,3}: trained subspaces invariant under L_n^{-1}"};
}

CheckResult check_nstep_telescoping() {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i) {
    TabularMDP mdp = random_reversible_mdp(71 + i, 12);
    Rng rng(derive_seed(72, i));
    Eigen::MatrixXd g = rng.gaussian_matrix(12, 3);
    auto sr = successor_representation(mdp);
    Eigen::MatrixXd ref = sr.matrix * g;
    for (int n = 2; n <= 3; ++n) {
      NStepOperator op = n_step_operator(mdp, g, n);
      Eigen::MatrixXd lhs = op.l_n.partialPivLu().solve(op.g_n);
      worst = std::max(worst, (lhs - ref).norm() / ref.norm());
    }
  }
  return {worst < tol::spectral,
          "max |L_n^{-1}G_n - L^{-1}G| / |L^{-1}G| = " + fmt(worst)};
}

CheckResult check_sampler_determinism() {
  const int s = 14, t = 5;
  TabularMDP mdp = random_reversible_mdp(81, s);
  for (auto family :
       {CumulantFamily::GAUSSIAN, CumulantFamily::NORMALIZED_GAUSSIAN,
        CumulantFamily::HAAR, CumulantFamily::INDICATOR}) {
    CumulantMatrix a = sample_cumulants(family, 82, mdp, t);
    CumulantMatrix b = sample_cumulants(family, 82, mdp, t);
    if (!bitwise_equal(a.g, b.g))
      return {false, family_name(family) + " sampler not deterministic"};
    a.validate();
  }
  return {true, "4 sampler families bit-identical across repeated draws"};
}

CheckResult check_random_bound_fourroom() {
  TabularMDP mdp = make_four_room(0.8);
  Eigen::VectorXd sigma =
      weighted_singular_values(successor_representation(mdp).matrix,
                               mdp.state_weights);
  const int d = 5, n_seeds = 30;
  std::string margins;
  for (int t : {10, 20, 40, 80}) {
    EmpiricalSinTheta emp =
        empirical_sin_theta(mdp, d, t, n_seeds, CumulantFamily::GAUSSIAN, 0);
    double var = 0.0;
    for (double x : emp.per_seed) var += (x - emp.mean) * (x - emp.mean);
    double se = std::sqrt(var / (n_seeds - 1)) / std::sqrt(double(n_seeds));
    double bound = random_cumulant_bound(sigma, d, t);
    if (emp.mean + se > bound)
      return {false, "bound violated at T = " + std::to_string(t) + ": " +
                         fmt(emp.mean + se) + " > " + fmt(bound)};
    margins += (margins.empty() ? "" : " ") + fmt(bound - emp.mean - se);
  }
  return {true, "bound margins at T in {10,20,40,80}: " + margins};
}

// Range-finder residual upper bound: with A = U S V', Y = A Omega,
// Omega_1 = V_1' Omega full row rank, the rank-d part of A obeys
// |(I - P_Y) A_d|^2 <= |S_2 Omega_2 pinv(Omega_1)|^2.
CheckResult check_rangefinder_upper_bound() {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    Rng rng(derive_seed(1000, i));
    const int s = 12;
    Eigen::MatrixXd a = rng.gaussian_matrix(s, s);
    const int d = 1 + i % 8;
    const int ell = d + i % (s - d + 1);
    Eigen::MatrixXd omega = rng.gaussian_matrix(s, ell);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd u1 = svd.matrixU().leftCols(d);
    Eigen::MatrixXd v1 = svd.matrixV().leftCols(d);
    Eigen::MatrixXd v2 = svd.matrixV().rightCols(s - d);
    Eigen::VectorXd sig = svd.singularValues();
    Eigen::MatrixXd a_d =
        u1 * sig.head(d).asDiagonal() * v1.transpose();
    Eigen::MatrixXd omega1 = v1.transpose() * omega;
    Eigen::MatrixXd omega2 = v2.transpose() * omega;
    Eigen::MatrixXd pinv1 =
        omega1.completeOrthogonalDecomposition().pseudoInverse();
    Eigen::MatrixXd q = orthonormal_basis(a * omega, true);
    double lhs = opnorm(a_d - q * (q.transpose() * a_d));
    double rhs = opnorm(
        Eigen::MatrixXd(sig.tail(s - d).asDiagonal()) * omega2 * pinv1);
    worst = std::max(worst, lhs * lhs - rhs * rhs);
  }
  return {worst <= tol::structural,
          "max lhs^2 - rhs^2 over 100 draws = " + fmt(worst)};
}

// Projector lower bound: |(I - P_Y) A_k| >= |(I - P_Y) P_{A_k}| sigma_k for
// any Y.
CheckResult check_rangefinder_lower_bound() {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    Rng rng(derive_seed(1100, i));
    const int s = 12;
    Eigen::MatrixXd a = rng.gaussian_matrix(s, s);
    const int k = 1 + i % 8;
    const int t = 1 + i % s;
    Eigen::MatrixXd y = rng.gaussian_matrix(s, t);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::MatrixXd uk = svd.matrixU().leftCols(k);
    Eigen::MatrixXd a_k = uk * svd.singularValues().head(k).asDiagonal() *
                          svd.matrixV().leftCols(k).transpose();
    Eigen::MatrixXd q = orthonormal_basis(y, true);
    Eigen::MatrixXd proj_k = uk * uk.transpose();
    double lhs = opnorm(a_k - q * (q.transpose() * a_k));
    double rhs = opnorm(proj_k - q * (q.transpose() * proj_k)) *
                 svd.singularValues()(k - 1);
    worst = std::max(worst, rhs - lhs);
  }
  return {worst <= tol::structural,
          "max rhs - lhs over 100 draws = " + fmt(worst)};
}

CheckResult check_bound_monotone() {
  double worst = -std::numeric_limits<double>::infinity();
  {
    TabularMDP mdp = make_four_room(0.8);
    Eigen::VectorXd sigma = weighted_singular_values(
        successor_representation(mdp).matrix, mdp.state_weights);
    const int d = 5;
    double prev = random_cumulant_bound(sigma, d, d + 2);
    for (int t = d + 3; t <= mdp.n_states(); ++t) {
      double cur = random_cumulant_bound(sigma, d, t);
      worst = std::max(worst, cur - prev);
      prev = cur;
    }
  }
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    TabularMDP mdp = random_reversible_mdp(seed, 20);
    Eigen::VectorXd sigma = weighted_singular_values(
        successor_representation(mdp).matrix, mdp.state_weights);
    const int d = 3;
    double prev = random_cumulant_bound(sigma, d, d + 2);
    for (int t = d + 3; t <= 20; ++t) {
      double cur = random_cumulant_bound(sigma, d, t);
      worst = std::max(worst, cur - prev);
      prev = cur;
    }
  }
  return {worst <= 1e-12, "max increase across consecutive T = " + fmt(worst)};
}

CheckResult check_mc_optimum_dominates() {
  double worst = std::numeric_limits<double>::infinity();
  std::vector<TabularMDP> instances = {random_reversible_mdp(91, 12),
                                       random_symmetric_mdp(92, 12)};
  for (const auto& mdp : instances) {
    OptimalRepresentation opt = optimal_representation(mdp, 3, Rule::MC);
    for (int t = 0; t < 100; ++t) {
      Eigen::MatrixXd phi = orth_gaussian(derive_seed(93, t), 12, 3);
      worst = std::min(worst, mc_eval_error(phi, mdp) - opt.error);
    }
  }
  return {worst >= -1e-12,
          "min (random error - optimal error) = " + fmt(worst)};
}

CheckResult check_eval_basis_invariance() {
  TabularMDP mdp = random_reversible_mdp(96, 12);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd phi = orth_gaussian(derive_seed(97, t), 12, 3);
    Rng rng(derive_seed(98, t));
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3) +
                        0.3 * rng.gaussian_matrix(3, 3);
    for (Rule rule : {Rule::TD, Rule::MC, Rule::RESIDUAL}) {
      double base = eval_error(phi, mdp, rule);
      double mixed = eval_error(phi * m, mdp, rule);
      worst = std::max(worst, std::abs(base - mixed) / base);
    }
  }
  return {worst < tol::spectral, "max relative change under Phi -> Phi M = " +
                                     fmt(worst)};
}

CheckResult check_symmetric_optima_coincide() {
  TabularMDP mdp = random_symmetric_mdp(99, 10);
  OptimalRepresentation mc = optimal_representation(mdp, 2, Rule::MC);
  OptimalRepresentation td =
      optimal_representation(mdp, 2, Rule::TD, 8, 0);
  double dist = normalized_subspace_distance(mc.subspace.basis,
                                             td.subspace.basis);
  double cross = td_eval_error(mc.subspace.basis, mdp);
  bool ok = dist < 1e-2 && cross <= td.error * (1.0 + 1e-6) + 1e-12;
  return {ok, "optima distance = " + fmt(dist) +
                  ", TD error at MC optimum - searched = " +
                  fmt(cross - td.error)};
}

CheckResult check_sampled_error_consistency() {
  const int s = 16, n_samples = 10000;
  std::vector<TabularMDP> instances;
  std::vector<Eigen::MatrixXd> phis;
  for (int i = 0; i < 3; ++i) {
    instances.push_back(random_reversible_mdp(111 + i, s));
    phis.push_back(orth_gaussian(114 + i, s, 3));
  }
  Rng rng(derive_seed(117, 0));
  Eigen::MatrixXd samples = sample_l1_ball_matrix(rng, s, n_samples);
  double worst = 0.0;
  for (Rule rule : {Rule::TD, Rule::MC, Rule::RESIDUAL}) {
    std::vector<double> closed, sampled;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      closed.push_back(eval_error(phis[i], instances[i], rule));
      sampled.push_back(mean_squared_value_error(
          value_error_operator(phis[i], instances[i], rule), samples));
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < closed.size(); ++i) {
      num += sampled[i] * closed[i];
      den += closed[i] * closed[i];
    }
    double constant = num / den;
    for (std::size_t i = 0; i < closed.size(); ++i)
      worst = std::max(worst, std::abs(sampled[i] - constant * closed[i]) /
                                  (constant * closed[i]));
  }
  return {worst <= 0.02,
          "max relative deviation from fitted proportionality = " + fmt(worst)};
}

CheckResult check_rotating_constancy() {
  TabularMDP mdp = make_three_state_cycle();
  RotatingReport report =
      rotating_value_error_constancy(mdp, 0.08, 100000, 100, 0);
  double spread = (report.max_error - report.min_error) / report.mean_error;
  bool ok = spread < 1e-6 && report.min_consecutive_distance > 1e-3 &&
            report.min_sigma_ratio > 1e-6;
  return {ok, "value-error spread = " + fmt(spread) +
                  ", min consecutive subspace distance = " +
                  fmt(report.min_consecutive_distance)};
}

}  // namespace

std::vector<VerifyCheck> verify_checks(const VerifyOptions& options) {
  TdStepFn step = options.td_step_override;
  if (!step)
    step = [](const Eigen::MatrixXd& phi, const TabularMDP& mdp,
              const Eigen::MatrixXd& g, double alpha) {
      return td_flow_step(phi, mdp, g, alpha);
    };
  auto shared_td = std::make_shared<SharedTdRun>();

  std::vector<VerifyCheck> checks;
  checks.push_back({"generator-validity", "mdp", check_generator_validity});
  checks.push_back({"sr-row-sums", "mdp", check_sr_row_sums});
  checks.push_back(
      {"symmetric-sr-spectrum", "mdp", check_symmetric_sr_spectrum});
  checks.push_back(
      {"generator-determinism", "mdp", check_generator_determinism});
  checks.push_back({"distance-basis-invariance", "subspace",
                    check_distance_basis_invariance});
  checks.push_back({"invariant-subspace-residual", "subspace",
                    check_invariant_subspace_residual});
  checks.push_back({"symmetric-svd-invariant-agreement", "subspace",
                    check_symmetric_svd_invariant_agreement});
  checks.push_back(
      {"distance-zero-agreement", "subspace", check_distance_zero_agreement});
  checks.push_back(
      {"schur-reordering-preserves-matrix", "subspace", check_schur_reordering});
  checks.push_back({"td-fixed-point", "learning",
                    [shared_td, step] { return check_td_fixed_point(shared_td, step); }});
  checks.push_back({"td-transition-invariance", "learning",
                    [shared_td, step] {
                      return check_td_transition_invariance(shared_td, step);
                    }});
  checks.push_back({"symmetric-td-mc-agreement", "learning",
                    check_symmetric_td_mc_agreement});
  checks.push_back(
      {"td-instability-escape", "learning", check_td_instability_escape});
  checks.push_back({"step-loss-decrease", "learning", check_step_loss_decrease});
  checks.push_back({"nstep-invariance", "learning", check_nstep_invariance});
  checks.push_back({"nstep-telescoping", "learning", check_nstep_telescoping});
  checks.push_back(
      {"sampler-determinism", "cumulants", check_sampler_determinism});
  checks.push_back(
      {"random-bound-fourroom", "cumulants", check_random_bound_fourroom});
  checks.push_back(
      {"rangefinder-upper-bound", "bounds", check_rangefinder_upper_bound});
  checks.push_back(
      {"rangefinder-lower-bound", "bounds", check_rangefinder_lower_bound});
  checks.push_back({"bound-monotone", "bounds", check_bound_monotone});
  checks.push_back(
      {"mc-optimum-dominates", "evaluation", check_mc_optimum_dominates});
  checks.push_back(
      {"eval-basis-invariance", "evaluation", check_eval_basis_invariance});
  checks.push_back({"symmetric-optima-coincide", "evaluation",
                    check_symmetric_optima_coincide});
  checks.push_back({"sampled-error-consistency", "evaluation",
                    check_sampled_error_consistency});
  checks.push_back(
      {"rotating-constancy", "evaluation", check_rotating_constancy});
  return checks;
}

int run_verify(const VerifyOptions& options, std::ostream& out) {
  std::vector<VerifyCheck> checks = verify_checks(options);
  std::size_t name_width = 0;
  for (const auto& check : checks)
    name_width = std::max(name_width, check.name.size());

  int ran = 0, passed = 0;
  out << "verification report\n";
  for (const auto& check : checks) {
    if (!options.filter.empty() && check.category != options.filter &&
        check.name != options.filter)
      continue;
    ++ran;
    CheckResult result;
    try {
      result = check.run();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    if (result.pass) ++passed;
    out << (result.pass ? "[ PASS ] " : "[ FAIL ] ") << check.name
        << std::string(name_width - check.name.size() + 2, ' ') << "("
        << check.category << ")  " << result.detail << "\n";
  }
  if (ran == 0) {
    out << "no checks match filter '" << options.filter << "'\n";
    return 2;
  }
  out << passed << "/" << ran << " checks passed\n";
  return passed == ran ? 0 : 1;
}

}  // namespace repdyn
