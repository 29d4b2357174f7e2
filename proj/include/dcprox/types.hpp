#pragma once

#include <Eigen/Dense>
#include <limits>

namespace dcprox {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SolverKind { bppa, ppa, inertial };

inline const char* to_string(SolverKind k) {
  switch (k) {
    case SolverKind::bppa: return "bppa";
    case SolverKind::ppa: return "ppa";
    case SolverKind::inertial: return "inertial";
  }
  return "?";
}

}  // namespace dcprox
