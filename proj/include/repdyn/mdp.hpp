#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace repdyn {

// Policy-induced tabular MDP: row-stochastic P^pi, discount, state weights.
struct TabularMDP {
  Eigen::MatrixXd transition;   // S x S
  double discount;              // gamma in [0, 1)
  Eigen::VectorXd state_weights;  // xi, strictly positive, sums to 1

  int n_states() const { return static_cast<int>(transition.rows()); }
  // Throws std::invalid_argument when any type invariant is violated.
  void validate() const;
};

struct SuccessorRepresentation {
  Eigen::MatrixXd matrix;  // (I - gamma P)^{-1}
  const TabularMDP* source;
};

SuccessorRepresentation successor_representation(const TabularMDP& mdp);

// Psi = SR * G, one GVF value function per cumulant column.
Eigen::MatrixXd gvf_targets(const SuccessorRepresentation& sr,
                            const Eigen::MatrixXd& g);

TabularMDP make_three_state_cycle(double gamma = 0.9);

// Detailed-balance chain: P(i,j) = K(i,j) mu(j) / sum_k K(i,k) mu(k) with
// symmetric positive K, so the spectrum is real. mu follows a power law in
// the state index, which keeps the top invariant and top singular subspaces
// of the SR visibly apart (near-uniform mu makes them nearly coincide).
TabularMDP random_reversible_mdp(std::uint64_t seed, int s, double gamma = 0.9);

// Symmetric doubly-stochastic chain via symmetric Sinkhorn balancing.
// Throws std::runtime_error after 1e4 iterations x 10 resamples.
TabularMDP random_symmetric_mdp(std::uint64_t seed, int s, double gamma = 0.9);

// Canonical 13x13 four-room gridworld (104 open cells). Policy is an
// epsilon-mixture: uniform random with probability epsilon, otherwise greedy
// to the goal (BFS distance, ties broken up < down < left < right); blocked
// moves stay in place.
TabularMDP make_four_room(double epsilon, double gamma = 0.9);

// The ASCII layout ('#' wall, '.' open, 'G' goal) the builder runs on; also
// shipped as data/four_room.txt so the state count is auditable.
const std::string& four_room_layout();

}  // namespace repdyn
