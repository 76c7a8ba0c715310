#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "config.hpp"
#include "experiments.hpp"

namespace {

std::uint64_t parse_seed_env(const char* text) {
  errno = 0;
  char* end = nullptr;
  unsigned long long value = std::strtoull(text, &end, 10);
  if (end == text || *end != '\0' || errno == ERANGE)
    throw std::invalid_argument(
        "REPDYN_SEED must be an unsigned integer, got '" +
        std::string(text) + "'");
  return static_cast<std::uint64_t>(value);
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* sub, CommonArgs* args) {
  sub->add_option("--config", args->config_path, "configuration file");
  sub->add_option("--jobs", args->jobs, "worker threads")
      ->check(CLI::PositiveNumber);
  sub->add_option("--out", args->out_dir, "output directory");
  sub->add_option("--seed", args->seed, "master seed");
}

repdyn::CommandContext make_context(CLI::App* sub, const CommonArgs& args) {
  repdyn::CommandContext ctx;
  if (!args.config_path.empty())
    ctx.config = repdyn::load_config(args.config_path);

  if (sub->count("--seed") > 0) {
    ctx.seed = args.seed;
  } else if (const char* env = std::getenv("REPDYN_SEED")) {
    ctx.seed = parse_seed_env(env);
  } else {
    ctx.seed = ctx.config.get_uint64("experiment.seed", 0);
  }

  if (sub->count("--jobs") > 0) {
    ctx.jobs = args.jobs;
  } else {
    int fallback =
        std::max(1u, std::thread::hardware_concurrency());
    ctx.jobs = ctx.config.get_int("experiment.jobs", fallback);
  }
  if (ctx.jobs < 1)
    throw std::invalid_argument("experiment.jobs must be >= 1");

  if (sub->count("--out") > 0) {
    ctx.out_dir = args.out_dir;
  } else {
    ctx.out_dir = ctx.config.get_string("experiment.out", "out");
  }
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"representation-learning dynamics on tabular MDPs"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string filter;

  CLI::App* convergence = app.add_subcommand(
      "convergence", "train all three rules and track subspace distances");
  add_common(convergence, &args);

  CLI::App* cumulants = app.add_subcommand(
      "random-cumulants",
      "sweep random cumulant families against the analytic bound");
  add_common(cumulants, &args);

  CLI::App* rotating = app.add_subcommand(
      "rotating", "trace the non-convergent cycle trajectory");
  add_common(rotating, &args);

  CLI::App* verify = app.add_subcommand(
      "verify", "run the self-check suite and report pass/fail");
  add_common(verify, &args);
  verify->add_option("--filter", filter,
                     "only run checks whose category matches");

  CLI11_PARSE(app, argc, argv);

  try {
    if (convergence->parsed())
      return repdyn::cmd_convergence(make_context(convergence, args));
    if (cumulants->parsed())
      return repdyn::cmd_random_cumulants(make_context(cumulants, args));
    if (rotating->parsed())
      return repdyn::cmd_rotating(make_context(rotating, args));
    if (verify->parsed())
      return repdyn::cmd_verify(make_context(verify, args), filter);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
