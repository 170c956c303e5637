#include "core/serialize.hpp"

#include <istream>
#include <ostream>

#include "core/errors.hpp"
#include "core/textnum.hpp"

namespace beatfuse {

void expect_magic(std::istream& in, const std::string& magic, int version) {
  std::string tag;
  int ver = 0;
  in >> tag >> ver;
  if (!in || tag != magic)
    throw DataError("model file: expected '" + magic + "' header, found '" + tag + "'");
  if (ver != version)
    throw DataError("model file: unsupported " + magic + " version " + std::to_string(ver));
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out << ' ';
    out << format_hex_double(v[i]);
  }
  out << "\n";
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ' ';
      out << format_hex_double(m(r, c));
    }
    out << "\n";
  }
}

Eigen::VectorXd read_vector(std::istream& in, int n) {
  Eigen::VectorXd v(n);
  std::string tok;
  for (int i = 0; i < n; ++i) {
    if (!(in >> tok)) throw DataError("model file: truncated vector");
    v[i] = parse_hex_double(tok);
  }
  return v;
}

Eigen::MatrixXd read_matrix(std::istream& in, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  std::string tok;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (!(in >> tok)) throw DataError("model file: truncated matrix");
      m(r, c) = parse_hex_double(tok);
    }
  return m;
}

}  // namespace beatfuse
