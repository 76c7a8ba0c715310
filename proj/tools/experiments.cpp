#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>
#include <vector>

#include "csv.hpp"
#include "repdyn/constants.hpp"
#include "repdyn/cumulants.hpp"
#include "repdyn/evaluation.hpp"
#include "repdyn/learning.hpp"
#include "repdyn/matrix_io.hpp"
#include "repdyn/mdp.hpp"
#include "repdyn/rng.hpp"
#include "repdyn/subspace.hpp"
#include "repdyn/verify.hpp"
#include "svg.hpp"

namespace repdyn {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) {
    pool.emplace_back([&, j] {
      try {
        for (;;) {
          int i = next.fetch_add(1);
          if (i >= n) return;
          fn(i);
        }
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

Eigen::MatrixXd bellman_operator(const TabularMDP& mdp) {
  const int s = mdp.n_states();
  return Eigen::MatrixXd::Identity(s, s) - mdp.discount * mdp.transition;
}

// Instance builder shared by the experiment commands. Random generators get
// a per-stream seed; fixed constructions ignore it.
TabularMDP build_mdp(const Config& config, std::uint64_t instance_seed) {
  const std::string generator =
      config.get_string("mdp.generator", "reversible");
  const int s = config.get_int("mdp.states", 50);
  const double gamma = config.get_double("mdp.gamma", default_gamma);
  if (generator == "reversible")
    return random_reversible_mdp(instance_seed, s, gamma);
  if (generator == "symmetric")
    return random_symmetric_mdp(instance_seed, s, gamma);
  if (generator == "cycle") return make_three_state_cycle(gamma);
  if (generator == "four_room")
    return make_four_room(config.get_double("mdp.epsilon", 0.8), gamma);
  if (generator == "file") {
    const std::string path = config.get_string("mdp.path", "");
    if (path.empty())
      throw std::invalid_argument("mdp.generator = file requires mdp.path");
    MdpText text = read_mdp_text(read_file(path));
    TabularMDP mdp{text.p, text.gamma, text.xi};
    mdp.validate();
    return mdp;
  }
  throw std::invalid_argument("unknown mdp.generator '" + generator + "'");
}

void write_output(const std::string& dir, const std::string& name,
                  const std::string& content) {
  std::filesystem::create_directories(dir);
  std::string path = (std::filesystem::path(dir) / name).string();
  write_file(path, content);
  std::cout << "wrote " << path << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    std::string item = comma == std::string::npos
                           ? s.substr(start)
                           : s.substr(start, comma - start);
    std::size_t b = item.find_first_not_of(" \t");
    if (b != std::string::npos) {
      std::size_t e = item.find_last_not_of(" \t");
      out.push_back(item.substr(b, e - b + 1));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct MeanBand {
  double mean = kNan;
  double lo = kNan;
  double hi = kNan;
  int n = 0;
};

// Mean with normal-approximation 95% interval over the finite entries.
MeanBand mean_band(const std::vector<double>& values) {
  MeanBand out;
  double sum = 0.0;
  int n = 0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  if (n == 0) return out;
  out.n = n;
  out.mean = sum / n;
  if (n == 1) {
    out.lo = out.hi = out.mean;
    return out;
  }
  double var = 0.0;
  for (double v : values)
    if (std::isfinite(v)) var += (v - out.mean) * (v - out.mean);
  double se = std::sqrt(var / (n - 1)) / std::sqrt(static_cast<double>(n));
  out.lo = out.mean - 1.96 * se;
  out.hi = out.mean + 1.96 * se;
  return out;
}

}  // namespace

int cmd_convergence(const CommandContext& ctx) {
  const Config& c = ctx.config;
  const int d = c.get_int("train.d", 3);
  const double alpha = c.get_double("train.alpha", 0.08);
  const long steps = c.get_long("train.steps", 100000);
  const long snapshot_every = c.get_long("train.snapshot_every", 100);
  const int n_seeds = c.get_int("experiment.n_seeds", 30);
  const std::string family_tag = c.get_string("cumulants.family", "identity");
  const CumulantFamily family = family_from_name(family_tag);
  if (n_seeds < 1) throw std::invalid_argument("experiment.n_seeds >= 1");

  struct SeedOutput {
    std::vector<std::vector<std::string>> rows;
    bool no_invariant = false;
    std::string invariant_error;
  };
  std::vector<SeedOutput> outputs(n_seeds);

  parallel_for(n_seeds, ctx.jobs, [&](int i) {
    TabularMDP mdp = build_mdp(c, derive_seed(ctx.seed, i));
    const int s = mdp.n_states();
    const int t_default = family == CumulantFamily::IDENTITY ? s : 2 * d;
    const int t = c.get_int("cumulants.tasks", t_default);
    CumulantMatrix g =
        sample_cumulants(family, derive_seed(ctx.seed, 1000 + i), mdp, t);
    auto sr = successor_representation(mdp);
    Eigen::MatrixXd svd_basis = orthonormal_basis(
        weighted_truncated_svd(sr.matrix * g.g, mdp.state_weights, d).f_d);
    bool inv_ok = true;
    Eigen::MatrixXd inv_basis;
    try {
      inv_basis = top_d_invariant_subspace(
                      sr.matrix * g.g * g.g.transpose() *
                          mdp.state_weights.asDiagonal(),
                      d)
                      .basis;
    } catch (const std::exception& e) {
      inv_ok = false;
      outputs[i].no_invariant = true;
      outputs[i].invariant_error = e.what();
    }

    for (Rule rule : {Rule::MC, Rule::TD, Rule::RESIDUAL}) {
      TrainConfig tc;
      tc.rule = rule;
      tc.alpha = alpha;
      tc.steps = steps;
      tc.snapshot_every = snapshot_every;
      tc.seed = derive_seed(ctx.seed, 2000 + i);
      TrainLog log = train(mdp, g.g, d, tc);
      for (const auto& snap : log.snapshots) {
        double dist_svd = normalized_subspace_distance(snap.phi, svd_basis);
        double dist_inv =
            inv_ok ? normalized_subspace_distance(snap.phi, inv_basis) : kNan;
        outputs[i].rows.push_back({csv_cell(static_cast<long>(i)),
                                   rule_name(rule),
                                   csv_cell(snap.step),
                                   csv_cell(dist_svd),
                                   csv_cell(dist_inv),
                                   csv_cell(snap.loss)});
      }
    }
  });

  CsvWriter csv({"seed", "rule", "step", "dist_svd", "dist_inv", "loss"});
  for (const auto& output : outputs)
    for (const auto& row : output.rows) csv.add_row(row);
  write_output(ctx.out_dir, "convergence.csv", csv.str());

  // The plot is built from the CSV alone.
  CsvTable table = parse_csv(csv.str());
  const int col_rule = table.column("rule");
  const int col_step = table.column("step");
  const int col_svd = table.column("dist_svd");
  const int col_inv = table.column("dist_inv");

  PlotSpec plot;
  plot.title = "distance to reference subspaces (mean, 95% CI over seeds)";
  plot.x_label = "training step";
  plot.y_label = "normalized subspace distance";
  for (Rule rule : {Rule::MC, Rule::TD, Rule::RESIDUAL}) {
    for (int metric = 0; metric < 2; ++metric) {
      const int col = metric == 0 ? col_svd : col_inv;
      std::map<long, std::vector<double>> by_step;
      for (const auto& row : table.rows) {
        if (row[col_rule] != rule_name(rule)) continue;
        by_step[std::stol(row[col_step])].push_back(csv_double(row[col]));
      }
      Series series;
      series.label = rule_name(rule) +
                     std::string(metric == 0 ? ": to top-d singular"
                                             : ": to top-d invariant");
      for (const auto& [step, values] : by_step) {
        MeanBand mb = mean_band(values);
        series.x.push_back(static_cast<double>(step));
        series.y.push_back(mb.mean);
        series.band_lo.push_back(mb.lo);
        series.band_hi.push_back(mb.hi);
      }
      plot.series.push_back(std::move(series));
    }
  }
  int skipped = 0;
  for (const auto& output : outputs)
    if (output.no_invariant) ++skipped;
  if (skipped > 0)
    plot.annotations.push_back(
        std::to_string(skipped) + "/" + std::to_string(n_seeds) +
        " seeds lack a real top-d invariant subspace (excluded from that "
        "curve)");
  write_output(ctx.out_dir, "convergence.svg", render_plots({plot}));
  return 0;
}

int cmd_random_cumulants(const CommandContext& ctx) {
  const Config& c = ctx.config;
  const int d = c.get_int("train.d", 5);
  const int n_seeds = c.get_int("experiment.n_seeds", 30);
  std::vector<std::string> family_tags = split_list(c.get_string(
      "sweep.families",
      "gaussian,normalized_gaussian,haar,indicator,svd_right"));
  std::vector<std::string> t_cells = split_list(
      c.get_string("sweep.t_grid", "5,10,20,40,80"));
  std::vector<int> t_grid;
  for (const auto& cell : t_cells) t_grid.push_back(std::stoi(cell));

  Config mdp_config = c;
  if (!c.has("mdp.generator")) mdp_config.set("mdp.generator", "four_room");
  TabularMDP mdp = build_mdp(mdp_config, derive_seed(ctx.seed, 0));
  const int s = mdp.n_states();
  auto sr = successor_representation(mdp);
  Eigen::MatrixXd f_d_basis = orthonormal_basis(
      weighted_truncated_svd(sr.matrix, mdp.state_weights, d).f_d);
  Eigen::VectorXd sigma =
      weighted_singular_values(sr.matrix, mdp.state_weights);
  Eigen::PartialPivLU<Eigen::MatrixXd> l_lu(bellman_operator(mdp));
  Eigen::MatrixXd gg_weight = mdp.state_weights.asDiagonal();

  struct Task {
    int family_index;
    int t;
    int seed;
  };
  std::vector<Task> tasks;
  for (int f = 0; f < static_cast<int>(family_tags.size()); ++f)
    for (int t : t_grid)
      for (int seed = 0; seed < n_seeds; ++seed) tasks.push_back({f, t, seed});

  struct TaskResult {
    double dist[3] = {kNan, kNan, kNan};  // mc, td, residual
    std::string failure[3];
  };
  std::vector<TaskResult> results(tasks.size());

  parallel_for(static_cast<int>(tasks.size()), ctx.jobs, [&](int idx) {
    const Task& task = tasks[idx];
    CumulantFamily family = family_from_name(family_tags[task.family_index]);
    std::uint64_t stream = static_cast<std::uint64_t>(task.family_index) *
                               1000000ULL +
                           static_cast<std::uint64_t>(task.t) * 1000ULL +
                           static_cast<std::uint64_t>(task.seed);
    CumulantMatrix g;
    try {
      g = sample_cumulants(family, derive_seed(ctx.seed, stream), mdp, task.t);
    } catch (const std::exception& e) {
      for (int r = 0; r < 3; ++r) results[idx].failure[r] = e.what();
      return;
    }
    // Converged representations in closed form, one per rule.
    try {
      Eigen::MatrixXd phi = orthonormal_basis(
          weighted_truncated_svd(sr.matrix * g.g, mdp.state_weights, d).f_d);
      results[idx].dist[0] = sin_theta_distance(phi, f_d_basis);
    } catch (const std::exception& e) {
      results[idx].failure[0] = e.what();
    }
    try {
      Eigen::MatrixXd phi =
          top_d_invariant_subspace(
              sr.matrix * g.g * g.g.transpose() * gg_weight, d)
              .basis;
      results[idx].dist[1] = sin_theta_distance(phi, f_d_basis);
    } catch (const std::exception& e) {
      results[idx].failure[1] = e.what();
    }
    try {
      Eigen::MatrixXd top_g =
          weighted_truncated_svd(g.g, mdp.state_weights, d).f_d;
      Eigen::MatrixXd phi = orthonormal_basis(l_lu.solve(top_g));
      results[idx].dist[2] = sin_theta_distance(phi, f_d_basis);
    } catch (const std::exception& e) {
      results[idx].failure[2] = e.what();
    }
  });

  CsvWriter csv({"family", "T", "seed", "rule", "dist"});
  const char* rule_tags[3] = {"mc", "td", "residual"};
  for (std::size_t idx = 0; idx < tasks.size(); ++idx)
    for (int r = 0; r < 3; ++r)
      csv.add_row({family_tags[tasks[idx].family_index],
                   csv_cell(static_cast<long>(tasks[idx].t)),
                   csv_cell(static_cast<long>(tasks[idx].seed)), rule_tags[r],
                   csv_cell(results[idx].dist[r])});
  write_output(ctx.out_dir, "cumulants.csv", csv.str());

  // Failure annotations per rule and family/T cell.
  std::map<std::string, std::map<std::pair<int, int>, int>> skipped;
  for (std::size_t idx = 0; idx < tasks.size(); ++idx)
    for (int r = 0; r < 3; ++r)
      if (!results[idx].failure[r].empty())
        skipped[rule_tags[r]]
               [{tasks[idx].family_index, tasks[idx].t}] += 1;

  CsvTable table = parse_csv(csv.str());
  const int col_family = table.column("family");
  const int col_t = table.column("T");
  const int col_rule = table.column("rule");
  const int col_dist = table.column("dist");

  for (int r = 0; r < 3; ++r) {
    PlotSpec plot;
    plot.title = std::string(rule_tags[r]) +
                 " rule: distance to top-d SR subspace vs task count";
    plot.x_label = "number of cumulant tasks T";
    plot.y_label = "sin-theta distance";
    for (int f = 0; f < static_cast<int>(family_tags.size()); ++f) {
      Series series;
      series.label = family_tags[f];
      for (int t : t_grid) {
        std::vector<double> values;
        for (const auto& row : table.rows) {
          if (row[col_family] != family_tags[f] || row[col_rule] != rule_tags[r])
            continue;
          if (std::stoi(row[col_t]) != t) continue;
          values.push_back(csv_double(row[col_dist]));
        }
        MeanBand mb = mean_band(values);
        series.x.push_back(t);
        series.y.push_back(mb.mean);
        series.band_lo.push_back(mb.lo);
        series.band_hi.push_back(mb.hi);
      }
      plot.series.push_back(std::move(series));
    }
    Series bound;
    bound.label = "gaussian analytic bound";
    for (int t : t_grid)
      if (t - d >= 2) {
        bound.x.push_back(t);
        bound.y.push_back(random_cumulant_bound(sigma, d, t));
      }
    plot.series.push_back(std::move(bound));
    for (const auto& [cell, count] : skipped[rule_tags[r]])
      plot.annotations.push_back(
          family_tags[cell.first] + " at T=" + std::to_string(cell.second) +
          ": " + std::to_string(count) + "/" + std::to_string(n_seeds) +
          " seeds skipped (no real top-d subspace or rank deficiency)");
    write_output(ctx.out_dir,
                 std::string("cumulants_") + rule_tags[r] + ".svg",
                 render_plots({plot}));
  }
  (void)s;
  return 0;
}

int cmd_rotating(const CommandContext& ctx) {
  const Config& c = ctx.config;
  const double gamma = c.get_double("mdp.gamma", default_gamma);
  const double alpha = c.get_double("train.alpha", 0.08);
  const int steps = c.get_int("train.steps", 100000);
  const int snapshot_every = c.get_int("train.snapshot_every", 100);
  TabularMDP mdp = make_three_state_cycle(gamma);

  RotatingReport report = rotating_value_error_constancy(
      mdp, alpha, steps, snapshot_every, ctx.seed);

  // Coordinates of the learned plane: unit normal of span(Phi), expressed in
  // the orthogonal complement basis of the all-ones direction.
  const Eigen::Vector3d b1 = Eigen::Vector3d(1, 1, 1).normalized();
  const Eigen::Vector3d b2 = Eigen::Vector3d(2, -1, -1).normalized();
  const Eigen::Vector3d b3 = Eigen::Vector3d(0, 1, -1).normalized();

  CsvWriter csv({"step", "coord_x", "coord_y", "value_error"});
  for (std::size_t i = 0; i < report.log.snapshots.size(); ++i) {
    const auto& snap = report.log.snapshots[i];
    Eigen::MatrixXd q = orthonormal_basis(snap.phi);
    Eigen::Vector3d u = q.col(0), v = q.col(1);
    Eigen::Vector3d n = u.cross(v).normalized();
    double along = n.dot(b1);
    double x = n.dot(b2), y = n.dot(b3);
    bool flip = along < -1e-12 ||
                (std::abs(along) <= 1e-12 &&
                 (x < -1e-12 || (std::abs(x) <= 1e-12 && y < 0.0)));
    if (flip) {
      x = -x;
      y = -y;
    }
    csv.add_row({csv_cell(snap.step), csv_cell(x), csv_cell(y),
                 csv_cell(report.errors[i])});
  }
  write_output(ctx.out_dir, "rotating.csv", csv.str());

  std::string invariant_note;
  try {
    top_d_invariant_subspace(mdp.transition, 2);
    invariant_note = "top-2 invariant subspace of P exists";
  } catch (const std::exception& e) {
    invariant_note = std::string("top-2 invariant subspace request: ") +
                     e.what();
  }
  std::cout << invariant_note << "\n";

  CsvTable table = parse_csv(csv.str());
  const int col_step = table.column("step");
  const int col_x = table.column("coord_x");
  const int col_y = table.column("coord_y");
  const int col_err = table.column("value_error");

  PlotSpec plane;
  plane.title = "plane normal trajectory (all-ones complement coordinates)";
  plane.x_label = "e2 coordinate";
  plane.y_label = "e3 coordinate";
  plane.fixed_range = true;
  plane.x_min = -1.15;
  plane.x_max = 1.15;
  plane.y_min = -1.15;
  plane.y_max = 1.15;
  Series circle;
  circle.label = "unit circle";
  for (int i = 0; i <= 128; ++i) {
    double a = 2.0 * M_PI * i / 128.0;
    circle.x.push_back(std::cos(a));
    circle.y.push_back(std::sin(a));
  }
  plane.series.push_back(std::move(circle));
  Series trajectory;
  trajectory.label = "subspace normal";
  for (const auto& row : table.rows) {
    trajectory.x.push_back(csv_double(row[col_x]));
    trajectory.y.push_back(csv_double(row[col_y]));
  }
  plane.series.push_back(std::move(trajectory));
  plane.annotations.push_back(invariant_note);

  PlotSpec errors;
  errors.title = "value error along the trajectory";
  errors.x_label = "training step";
  errors.y_label = "TD evaluation error";
  Series err_series;
  err_series.label = "value error";
  for (const auto& row : table.rows) {
    err_series.x.push_back(csv_double(row[col_step]));
    err_series.y.push_back(csv_double(row[col_err]));
  }
  errors.series.push_back(std::move(err_series));
  double spread =
      (report.max_error - report.min_error) / report.mean_error;
  errors.annotations.push_back("second-half relative spread = " +
                               format_double(spread));
  errors.annotations.push_back(
      "min consecutive subspace distance (second half) = " +
      format_double(report.min_consecutive_distance));

  write_output(ctx.out_dir, "rotating.svg", render_plots({plane, errors}));
  return 0;
}

int cmd_verify(const CommandContext& ctx, const std::string& filter) {
  (void)ctx;
  VerifyOptions options;
  options.filter = filter;
  return run_verify(options, std::cout);
}

}  // namespace repdyn
