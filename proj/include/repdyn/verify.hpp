#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repdyn/mdp.hpp"

namespace repdyn {

struct CheckResult {
  bool pass = false;
  std::string detail;  // deterministic one-line diagnostic
};

struct VerifyCheck {
  std::string name;
  std::string category;
  std::function<CheckResult()> run;
};

// Signature of one implicit-weight TD step. The suite's TD-dynamics checks go
// through this hook so a deliberately broken step (test fixture) is caught by
// the named fixed-point check.
using TdStepFn = std::function<Eigen::MatrixXd(
    const Eigen::MatrixXd& phi, const TabularMDP& mdp, const Eigen::MatrixXd& g,
    double alpha)>;

struct VerifyOptions {
  // Empty runs everything; otherwise only checks whose category or name
  // equals the filter.
  std::string filter;
  // Defaults to td_flow_step when unset.
  TdStepFn td_step_override;
};

std::vector<VerifyCheck> verify_checks(const VerifyOptions& options);

// Runs the (filtered) suite, streams a deterministic pass/fail table to out,
// and returns 0 iff every check passed (2 when the filter matches nothing).
int run_verify(const VerifyOptions& options, std::ostream& out);

}  // namespace repdyn
