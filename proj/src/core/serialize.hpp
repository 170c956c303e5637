#pragma once

#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace beatfuse {

// Versioned text model format. Parameter values are written as C
// hexfloats so round trips are bit exact.
void expect_magic(std::istream& in, const std::string& magic, int version);

void write_vector(std::ostream& out, const Eigen::VectorXd& v);
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::VectorXd read_vector(std::istream& in, int n);
Eigen::MatrixXd read_matrix(std::istream& in, int rows, int cols);

}  // namespace beatfuse
