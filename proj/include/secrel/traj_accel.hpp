#pragma once

#include <vector>

#include "secrel/conic.hpp"
#include "secrel/power_speed.hpp"
#include "secrel/sca.hpp"
#include "secrel/scenario.hpp"
#include "secrel/solve.hpp"

// Block 2: path and acceleration on fixed powers and speeds. Squared link
// distances enter through cone epigraphs, adversary exposure through
// S-procedure LMIs over the uncertainty disks, and the concave rate terms
// through tangent minorants re-expanded each SCA pass. Positions are scaled
// by the flight altitude inside the solver.

namespace secrel {

struct TrajAccelVars {
  std::vector<int> x, y;               // scaled positions
  std::vector<int> a, a_hat;           // accel: progress row / norm-cap side
  std::vector<int> w_user, w_bs;       // squared-distance epigraphs (scaled)
  std::vector<std::vector<int>> z_adv; // [adversary][slot] certified floor
  std::vector<std::vector<int>> eps;   // [adversary][slot] S-procedure mult
  std::vector<int> zeta, r_b;          // forwarded / received rate surrogates
  std::vector<int> cum_rb, cum_zeta;
  std::vector<int> t_adv;              // per-slot adversary majorant
  std::vector<int> e_acc;              // epigraph of max(a^2, a_hat^2)
};

struct TrajAccelModel {
  conic::ConicProgram prog;
  TrajAccelVars idx;
  std::vector<int> icc_rows;
  std::vector<int> zeta_rows, rb_rows;      // rate-tangent rows per slot (-1 none)
  std::vector<std::vector<int>> adv_rows;   // [adversary][slot] tangent rows
  double lambda = 0.0;
  double scale = 1.0;                 // meters per solver length unit
  double obj_const = 0.0;             // speed-only energy, mirrored in prog
};

// Convex subproblem at lambda, linearized around the incumbent trajectory.
TrajAccelModel build_traj_accel_program(const PowerSchedule& pow,
                                        const ScenarioConfig& cfg,
                                        double lambda,
                                        const Trajectory& incumbent);

std::vector<double> traj_accel_start(const TrajAccelModel& m,
                                     const ScenarioConfig& cfg,
                                     const PowerSchedule& pow,
                                     const Trajectory& incumbent);

struct TrajAccelOutcome {
  bool ok = false;
  Trajectory traj;
  std::vector<BlockIterate> trace;
  std::string message;
};

TrajAccelOutcome solve_traj_accel(const PowerSchedule& pow,
                                  const ScenarioConfig& cfg,
                                  const Trajectory& incumbent);

struct TightnessReport {
  double max_w_gap_rel = 0.0;   // epigraph vs true squared distance, user/BS
  double max_z_gap_rel = 0.0;   // certified floor vs true worst-case distance
  int slack_slots = 0;          // slots exempt (no transmit pressure)
  bool ok = false;
};

// Checks that distance epigraphs and certified floors are tight at the
// solution wherever the objective exerts pressure (transmit power above
// the feasibility tolerance).
TightnessReport tightness_diagnostics(const TrajAccelModel& m,
                                      const conic::SolveResult& res,
                                      const PowerSchedule& pow,
                                      const ScenarioConfig& cfg);

}  // namespace secrel
