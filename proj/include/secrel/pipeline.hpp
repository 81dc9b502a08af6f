#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "secrel/power_speed.hpp"
#include "secrel/scenario.hpp"
#include "secrel/traj_accel.hpp"

// End-to-end orchestration: feasible initial solution, the alternating
// two-block ascent on secrecy energy efficiency, the swept circular-path
// baseline, and a brute-force oracle for tiny instances.

namespace secrel {

struct Solution {
  Trajectory traj;
  PowerSchedule pow;
};

// Straight segment above BS toward the user at constant speed, flat powers
// scaled until causality holds. Falls back to a closed polygon at v_min
// when start and goal coincide. Throws when the segment cannot be flown
// within [v_min, v_max] in time T; the message names the minimal feasible T.
Solution init_solution(const ScenarioConfig& cfg);

struct TraceRow {
  int iter = 0;
  double ee = 0.0;             // kbit per Joule, unclamped
  double lambda = 0.0;
  double secrecy_bits = 0.0;
  double energy_J = 0.0;
  int block1_iters = 0;        // Dinkelbach steps taken
  int block2_iters = 0;
  double max_residual = 0.0;   // worst exact-constraint residual
  double wall_ms = 0.0;
};

struct AlgorithmTrace {
  std::vector<TraceRow> rows;
  bool converged = false;
  std::string message;
};

struct RunOptions {
  int max_outer = 12;
  double rel_gain_stop = 1e-3;
};

struct RunResult {
  Solution sol;
  AlgorithmTrace trace;
  SolutionReport report;
};

// Alternating ascent: block 1 (powers, speed) then block 2 (path, accel),
// each under its own Dinkelbach loop, until the efficiency gain stalls.
RunResult run_algorithm1(const ScenarioConfig& cfg, const RunOptions& opt = {});

struct BaselineResult {
  Solution sol;
  SolutionReport report;
  double radius = 0.0;
  double speed = 0.0;
};

// Non-optimized comparator: circular arc around the midpoint between BS and
// user, radius and speed swept on a grid, powers from the initializer
// heuristic; best feasible grid point wins (ties to lower energy).
BaselineResult circular_baseline(const ScenarioConfig& cfg);

struct OracleGrid {
  int pos_steps = 5;      // per axis, per free slot
  int power_levels = 4;
  double pos_span = 400.0;  // half-width of the position box, m
};

struct OracleResult {
  double best_ee = -1e300;
  Solution sol;
  long long evaluated = 0;
  bool found_feasible = false;
};

// Exhaustive search over a tiny instance (N <= 4): slot positions on a
// lattice, power levels on a grid, speeds pinned to the chord lengths.
// Every candidate is screened with the exact constraints. Throws when the
// instance or grid would exceed the enumeration budget.
OracleResult tiny_oracle(const ScenarioConfig& cfg, const OracleGrid& grid);

// Total secrecy bits against adversaries sampled inside their disks
// (n_samples quasi-uniform points each, deterministic in seed), rather than
// the closed-form worst case. Shared by the robustness comparisons.
double sampled_worstcase_bits(const Solution& sol, const ScenarioConfig& cfg,
                              int n_samples, std::uint64_t seed);

// Worst residual over all exact constraints (mobility, bounds, causality,
// power caps); the trace column and the validate subcommand both use it.
double max_exact_residual(const Solution& sol, const ScenarioConfig& cfg);

}  // namespace secrel
