#include "repdyn/mdp.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>
#include <vector>

#include "repdyn/constants.hpp"
#include "repdyn/rng.hpp"

namespace repdyn {

void TabularMDP::validate() const {
  const int s = n_states();
  if (s < 2) throw std::invalid_argument("mdp: need at least 2 states");
  if (transition.cols() != s)
    throw std::invalid_argument("mdp: transition matrix must be square");
  if (!(discount >= 0.0 && discount < 1.0))
    throw std::invalid_argument("mdp: discount must lie in [0, 1)");
  if (state_weights.size() != s)
    throw std::invalid_argument("mdp: state_weights length mismatch");
  for (int i = 0; i < s; ++i) {
    double row = 0.0;
    for (int j = 0; j < s; ++j) {
      double p = transition(i, j);
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("mdp: transition entry outside [0, 1]");
      row += p;
    }
    if (std::abs(row - 1.0) > tol::structural)
      throw std::invalid_argument("mdp: transition row does not sum to 1");
    if (!(state_weights(i) > 0.0))
      throw std::invalid_argument("mdp: state weights must be positive");
  }
  if (std::abs(state_weights.sum() - 1.0) > tol::structural)
    throw std::invalid_argument("mdp: state weights must sum to 1");
}

SuccessorRepresentation successor_representation(const TabularMDP& mdp) {
  const int s = mdp.n_states();
  Eigen::MatrixXd l =
      Eigen::MatrixXd::Identity(s, s) - mdp.discount * mdp.transition;
  Eigen::MatrixXd sr = l.partialPivLu().solve(Eigen::MatrixXd::Identity(s, s));
  double resid = (l * sr - Eigen::MatrixXd::Identity(s, s)).norm() /
                 std::sqrt(static_cast<double>(s));
  if (resid > tol::iterative)
    throw std::runtime_error("successor_representation: singular system");
  return {sr, &mdp};
}

Eigen::MatrixXd gvf_targets(const SuccessorRepresentation& sr,
                            const Eigen::MatrixXd& g) {
  if (g.rows() != sr.matrix.rows())
    throw std::invalid_argument("gvf_targets: cumulant row count mismatch");
  return sr.matrix * g;
}

TabularMDP make_three_state_cycle(double gamma) {
  TabularMDP mdp;
  mdp.transition = Eigen::MatrixXd::Zero(3, 3);
  mdp.transition(0, 1) = 1.0;
  mdp.transition(1, 2) = 1.0;
  mdp.transition(2, 0) = 1.0;
  mdp.discount = gamma;
  mdp.state_weights = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  return mdp;
}

TabularMDP random_reversible_mdp(std::uint64_t seed, int s, double gamma) {
  if (s < 2) throw std::invalid_argument("random_reversible_mdp: S >= 2");
  Rng rng(seed);
  // Power-law stationary weights with mild log-noise.
  double expo = rng.uniform(1.5, 2.5);
  Eigen::VectorXd mu(s);
  for (int i = 0; i < s; ++i)
    mu(i) = std::pow((i + 1.0) / s, expo) * std::exp(rng.uniform(-0.3, 0.3));
  // Symmetric positive kernel with band decay length S/5.
  Eigen::MatrixXd a(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j) a(i, j) = 0.5 + rng.uniform();
  double rho = std::exp(-5.0 / s);
  Eigen::MatrixXd k(s, s);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < s; ++j)
      k(i, j) = 0.5 * (a(i, j) + a(j, i)) * std::pow(rho, std::abs(i - j));
  TabularMDP mdp;
  mdp.transition.resize(s, s);
  for (int i = 0; i < s; ++i) {
    double z = 0.0;
    for (int j = 0; j < s; ++j) z += k(i, j) * mu(j);
    for (int j = 0; j < s; ++j) mdp.transition(i, j) = k(i, j) * mu(j) / z;
  }
  mdp.discount = gamma;
  mdp.state_weights = Eigen::VectorXd::Constant(s, 1.0 / s);
  return mdp;
}

TabularMDP random_symmetric_mdp(std::uint64_t seed, int s, double gamma) {
  if (s < 2) throw std::invalid_argument("random_symmetric_mdp: S >= 2");
  Rng rng(seed);
  double rho = std::exp(-5.0 / s);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Eigen::MatrixXd a(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) a(i, j) = 0.5 + rng.uniform();
    Eigen::MatrixXd m(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        m(i, j) = 0.5 * (a(i, j) + a(j, i)) * std::pow(rho, std::abs(i - j));
    // Symmetric Sinkhorn: m <- D^{-1/2} m D^{-1/2} preserves symmetry and
    // drives all row sums to 1.
    bool converged = false;
    for (int it = 0; it < 10000; ++it) {
      Eigen::VectorXd rows = m.rowwise().sum();
      if ((rows.array() - 1.0).abs().maxCoeff() < 1e-13) {
        converged = true;
        break;
      }
      Eigen::VectorXd d = rows.array().sqrt().inverse();
      m = d.asDiagonal() * m * d.asDiagonal();
    }
    if (!converged) continue;
    TabularMDP mdp;
    mdp.transition = m;
    mdp.discount = gamma;
    mdp.state_weights = Eigen::VectorXd::Constant(s, 1.0 / s);
    return mdp;
  }
  throw std::runtime_error(
      "random_symmetric_mdp: Sinkhorn failed to converge after 10 resamples");
}

namespace {

const char* const kFourRoomLayout =
    "#############\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#...........#\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "##.####.....#\n"
    "#.....###.###\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#...........#\n"
    "#.....#....G#\n"
    "#############\n";

}  // namespace

const std::string& four_room_layout() {
  static const std::string layout = kFourRoomLayout;
  return layout;
}

TabularMDP make_four_room(double epsilon, double gamma) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("make_four_room: epsilon must lie in [0, 1]");
  std::vector<std::string> grid;
  {
    std::string row;
    for (char c : four_room_layout()) {
      if (c == '\n') {
        grid.push_back(row);
        row.clear();
      } else {
        row += c;
      }
    }
  }
  const int rows = static_cast<int>(grid.size());
  const int cols = static_cast<int>(grid[0].size());
  std::map<std::pair<int, int>, int> index;
  std::vector<std::pair<int, int>> cells;
  std::pair<int, int> goal{-1, -1};
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (grid[r][c] != '#') {
        index[{r, c}] = static_cast<int>(cells.size());
        cells.push_back({r, c});
        if (grid[r][c] == 'G') goal = {r, c};
      }
  const int s = static_cast<int>(cells.size());
  if (goal.first < 0) throw std::runtime_error("four-room layout has no goal");

  // Action order up < down < left < right is the greedy tie-break order.
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  auto land = [&](std::pair<int, int> rc, int a) {
    int nr = rc.first + dr[a], nc = rc.second + dc[a];
    if (grid[nr][nc] == '#') return rc;
    return std::make_pair(nr, nc);
  };

  // BFS distances to the goal over open cells.
  std::map<std::pair<int, int>, int> dist;
  std::deque<std::pair<int, int>> queue{goal};
  dist[goal] = 0;
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    for (int a = 0; a < 4; ++a) {
      auto v = land(u, a);
      if (!dist.count(v)) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  if (static_cast<int>(dist.size()) != s)
    throw std::runtime_error("four-room layout is not connected");

  TabularMDP mdp;
  mdp.transition = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < s; ++i) {
    auto rc = cells[i];
    int best = 0;
    for (int a = 1; a < 4; ++a)
      if (dist[land(rc, a)] < dist[land(rc, best)]) best = a;
    for (int a = 0; a < 4; ++a)
      mdp.transition(i, index[land(rc, a)]) += epsilon / 4.0;
    mdp.transition(i, index[land(rc, best)]) += 1.0 - epsilon;
  }
  mdp.discount = gamma;
  mdp.state_weights = Eigen::VectorXd::Constant(s, 1.0 / s);
  return mdp;
}

}  // namespace repdyn
