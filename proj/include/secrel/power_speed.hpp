#pragma once

#include <vector>

#include "secrel/conic.hpp"
#include "secrel/sca.hpp"
#include "secrel/scenario.hpp"
#include "secrel/solve.hpp"

// Block 1: transmit powers and speed profile on a fixed path. Convex
// restriction with exact log-rate constraints, a rotated-cone epigraph for
// the cubic drag term, and tangent upper bounds for the adversary rates.
// Solved inside a Dinkelbach loop on the energy-efficiency ratio.

namespace secrel {

struct PowerSpeedVars {
  // Solver variable index blocks; -1 entries mean "not present" (endpoint
  // conventions pin those powers to zero).
  std::vector<int> p_b, p_u, v, q;     // q: drag slack, q <= v
  std::vector<int> r_b, zeta;          // achieved BS rate, forwarded rate
  std::vector<int> cum_rb, cum_zeta;   // running sums for the causality rows
  std::vector<int> cube_s, cube_t, inv_q;
  std::vector<int> acc_w;              // epigraph of accel^2 / q per gap
  std::vector<int> t_adv;              // per-slot adversary rate majorant
  int k_end = -1;                      // epigraph of v_N^2 (kinetic tail)
};

struct PowerSpeedModel {
  conic::ConicProgram prog;
  PowerSpeedVars idx;
  std::vector<int> icc_rows;        // lin[] indices of causality rows
  std::vector<int> avg_rows;        // lin[] indices of the two average caps
  double lambda = 0.0;
  double dt = 0.0;                  // slot length; also the objective's bit value
  std::vector<double> dist;         // per-gap displacement of the fixed path
  double energy_const = 0.0;        // lambda-weighted constant energy part
};

// Convex subproblem at a given Dinkelbach lambda, linearized around the
// incumbent powers. The path (positions) is fixed; speeds move within a
// mobility band of +-band meters per gap, reconciled exactly by the caller
// afterwards.
PowerSpeedModel build_power_speed_program(const Trajectory& traj,
                                          const ScenarioConfig& cfg,
                                          double lambda,
                                          const PowerSchedule& incumbent_pow,
                                          const Trajectory& incumbent_traj);

// Strictly feasible start derived from the incumbent.
std::vector<double> power_speed_start(const PowerSpeedModel& m,
                                      const Trajectory& traj,
                                      const ScenarioConfig& cfg,
                                      const PowerSchedule& pow);

struct BlockIterate {
  double lambda = 0.0;
  double F = 0.0;
  double num = 0.0;   // rate-seconds achieved (bits / bandwidth)
  double den = 0.0;   // propulsion energy, J
  int sca_passes = 0;
  int newton_iters = 0;
};

struct PowerSpeedOutcome {
  bool ok = false;
  PowerSchedule pow;
  Trajectory traj;           // same path, reconciled speed/accel
  std::vector<BlockIterate> trace;
  std::string message;
};

// Full block: Dinkelbach outer loop, SCA passes inner, exact speed/accel
// reconciliation at the end. Fails (ok=false) only on solver breakdown or
// an infeasible mobility band.
PowerSpeedOutcome solve_power_speed(const Trajectory& traj,
                                    const ScenarioConfig& cfg,
                                    const PowerSchedule& incumbent_pow);

struct KktReport {
  double max_stationarity = 0.0;   // solver-side residual
  double max_comp_slack = 0.0;     // worst |dual * slack| on named rows
  double sum_icc_duals = 0.0;      // cumulative causality weight
  double min_icc_dual = 0.0;
  bool duals_nonnegative = false;
};

// Multiplier structure of a solved block-1 program.
KktReport kkt_diagnostics(const PowerSpeedModel& m,
                          const conic::SolveResult& res);

}  // namespace secrel
