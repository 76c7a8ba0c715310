#include "repdyn/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace repdyn {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string write_matrix_text(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ' ';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string write_mdp_text(const Eigen::MatrixXd& p, double gamma,
                           const Eigen::VectorXd& xi) {
  std::string out = std::to_string(p.rows()) + ' ' + format_double(gamma) + '\n';
  out += write_matrix_text(p);
  out += write_matrix_text(xi.transpose());
  return out;
}

MdpText read_mdp_text(const std::string& text) {
  std::istringstream in(text);
  Eigen::Index s;
  MdpText m;
  if (!(in >> s >> m.gamma) || s <= 0)
    throw std::runtime_error("mdp text: bad header line");
  m.p.resize(s, s);
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = 0; j < s; ++j)
      if (!(in >> m.p(i, j)))
        throw std::runtime_error("mdp text: truncated transition matrix");
  m.xi.resize(s);
  for (Eigen::Index i = 0; i < s; ++i)
    if (!(in >> m.xi(i))) throw std::runtime_error("mdp text: truncated xi row");
  return m;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace repdyn
