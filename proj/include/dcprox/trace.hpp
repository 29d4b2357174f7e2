#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcprox/types.hpp"

namespace dcprox {

enum class Termination { converged, max_iter, armijo_fail, diverged };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iter: return "max_iter";
    case Termination::armijo_fail: return "armijo_fail";
    case Termination::diverged: return "diverged";
  }
  return "?";
}

/// One solver iteration. Scalar fields mirror the trace CSV columns; the
/// iterate vector itself stays in memory only.
struct IterateRecord {
  int k = 0;
  Vector x;
  double f_x = 0.0;
  double d_norm = 0.0;  // bppa/ppa: |y^k - x^k|; inertial: |z^{k+1} - z^k|
  std::optional<int> m_k;
  std::optional<double> eta_k;
  std::optional<double> grad_residual;
  double sum_d_sq = 0.0;  // running sum of d_norm^2 through this row
  std::optional<double> energy_lo;
  std::optional<double> energy_hi;
  std::optional<double> lyapunov;
  std::optional<double> coupling_norm;  // |alpha x^k + beta y^k|
  double wall_time_s = 0.0;
};

/// Full record of one solver run. The side arrays carry per-iteration data
/// used by offline verification and tests; they are not part of the CSV
/// column contract.
struct Trace {
  std::string problem_label;
  SolverKind solver = SolverKind::bppa;
  std::string config_snapshot;
  std::vector<IterateRecord> records;
  Termination termination = Termination::max_iter;
  std::string diagnostic;

  // bppa/ppa side data
  std::vector<double> lambda_used;  // lambda_k per row
  std::vector<double> f_y;          // f at the subproblem solution per row

  // inertial side data
  std::vector<double> delta_grid;
  std::vector<std::vector<double>> energy_grid;  // E_k at each grid delta
  std::vector<double> dx_norm;                   // |x^{k+1} - x^k| per row
  std::vector<double> dy_norm;                   // |y^{k+1} - y^k| per row
  std::vector<Vector> y_state;                   // inertial y^k per row
};

}  // namespace dcprox
