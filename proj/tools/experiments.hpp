#pragma once

#include <cstdint>
#include <string>

#include "config.hpp"

namespace repdyn {

struct CommandContext {
  Config config;
  std::string out_dir = "out";
  int jobs = 1;
  std::uint64_t seed = 0;
};

int cmd_convergence(const CommandContext& ctx);
int cmd_random_cumulants(const CommandContext& ctx);
int cmd_rotating(const CommandContext& ctx);
int cmd_verify(const CommandContext& ctx, const std::string& filter);

}  // namespace repdyn
