#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "secrel/conic.hpp"

// Deterministic interior-point solver for ConicProgram: log-barrier
// path following with exact Newton steps. No randomness, no time-dependent
// behavior; identical input yields identical output.

namespace secrel::conic {

enum class SolveStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<double> x;
  double objective = 0.0;

  // Multipliers, indexed like the constraint families. Inequality duals are
  // nonnegative, equality duals free. soc_duals rows are (rhs, norm_rows)
  // in the dual cone; psd_duals are PSD; log_duals weight
  // rate - log2(1+snr) <= 0.
  std::vector<double> lin_duals;
  std::vector<double> lo_duals, hi_duals;
  std::vector<std::vector<double>> soc_duals;
  std::vector<Eigen::MatrixXd> psd_duals;
  std::vector<double> log_duals;

  double gap = 0.0;        // barrier duality gap bound at exit
  int newton_iters = 0;
  std::string message;
};

struct SolveOptions {
  double tol = 1e-9;          // target gap, relative to 1 + |objective|
  double feas_margin = 1e-9;  // strictness margin when vetting warm starts
  int max_newton = 600;
  double t_init = 1.0;
  double t_mult = 12.0;
  double t_max = 1e14;
  std::vector<double> warm_start;  // must be strictly feasible if given
};

// Maximizes prog.objective. Only programs without log constraints can be
// solved from scratch (phase-1); log-constrained programs need a strictly
// feasible warm start.
SolveResult solve(const ConicProgram& prog, const SolveOptions& opt = {});

// Max |stationarity residual| of the returned multipliers; solver
// self-check used by tests and KKT diagnostics.
double kkt_residual(const ConicProgram& prog, const SolveResult& res);

}  // namespace secrel::conic
