// Copyright (c) the maxtomo developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef MAXTOMO_TYPES_HPP
#define MAXTOMO_TYPES_HPP

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace maxtomo {

using Real = double;
using Complex = std::complex<double>;

using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;
using SparseC = Eigen::SparseMatrix<Complex>;

// Physical constants (SI).
inline constexpr Real mu0 = 4.0e-7 * 3.14159265358979323846;
inline constexpr Real eps0 = 8.8541878128e-12;
inline constexpr Real pi = 3.14159265358979323846;

// Error categories map onto CLI exit codes: config = 2, solver = 3,
// optimization = 4.
enum class ErrorKind { Config, Solver, Optimization, Internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_config(const std::string& msg) {
  throw Error(ErrorKind::Config, msg);
}
[[noreturn]] inline void fail_solver(const std::string& msg) {
  throw Error(ErrorKind::Solver, msg);
}
[[noreturn]] inline void fail_internal(const std::string& msg) {
  throw Error(ErrorKind::Internal, msg);
}

}  // namespace maxtomo

#endif  // MAXTOMO_TYPES_HPP
