#pragma once

#include <string>

#include <Eigen/Dense>

namespace repdyn {

// Shortest representation that round-trips a double exactly (up to 17
// significant digits). Used for every float we serialize.
std::string format_double(double x);

// Plain-text MDP format: first line "S gamma", then S rows of S entries (P),
// then one row of S entries (xi). Whitespace separated.
struct MdpText {
  Eigen::MatrixXd p;
  double gamma;
  Eigen::VectorXd xi;
};

std::string write_mdp_text(const Eigen::MatrixXd& p, double gamma,
                           const Eigen::VectorXd& xi);
MdpText read_mdp_text(const std::string& text);

std::string write_matrix_text(const Eigen::MatrixXd& m);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace repdyn
