#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

// Scenario description and exact physics for the UAV relay link.
//
// Slot convention: all per-slot arrays are 0-based with index n-1 holding
// slot n. The horizon has N slots of length slot_len() seconds. The UAV
// relays BS -> UAV -> user; eavesdroppers are known only up to disks around
// estimated positions.

namespace secrel {

using Vec2 = Eigen::Vector2d;

struct ToleranceSet {
  double feasibility = 1e-6;   // constraint residuals treated as satisfied
  double dinkelbach = 1e-4;    // |F(lambda)| stop threshold
  double sca = 1e-3;           // relative objective gain stop threshold
  double psd = 1e-8;           // trace-scaled eigenvalue slack for PSD checks
};

struct AdversaryRegion {
  Vec2 est_pos{0.0, 0.0};
  double radius_R = 0.0;   // uncertainty disk radius, meters
};

struct ScenarioConfig {
  Vec2 bs_pos{650.0, 170.0};
  Vec2 user_pos{0.0, 0.0};
  std::vector<AdversaryRegion> adversaries{{{-200.0, 0.0}, 60.0},
                                           {{0.0, 100.0}, 30.0}};

  double altitude_H = 100.0;   // fixed flight altitude, m
  double horizon_T = 100.0;    // mission duration, s
  int slots_N = 50;

  double beta0 = 1e-3;         // channel gain at 1 m
  double noise_power = 1e-13;  // receiver noise, W

  double p_b_max = 10.0;       // BS peak power, W
  double p_b_avg = 5.0;        // BS average power cap, W
  double p_u_max = 1.0;        // UAV peak power, W
  double p_u_avg = 0.5;        // UAV average power cap, W

  double v_min = 3.0;          // stall-side speed floor, m/s
  double v_max = 100.0;
  double a_max = 5.0;          // tangential acceleration bound, m/s^2

  double alpha_u = 9.26e-4;    // parasitic drag coefficient (v^3 term)
  double beta_u = 2250.0;      // induced lift coefficient (1/v term)
  double mass_m = 10.0;        // airframe mass incl. payload, kg
  double gravity_g = 9.8;

  double bandwidth_B = 1e6;    // Hz, reporting only

  ToleranceSet tol{};

  double slot_len() const { return horizon_T / slots_N; }
};

// Throws std::invalid_argument naming the offending field.
void validate_config(const ScenarioConfig& cfg);

// Horizontal path plus scalar speed/acceleration profiles, all length N.
// speed[0] and accel[0] describe slot 1 (used by the mobility recursion for
// the first hop only; bound checks start at slot 2).
struct Trajectory {
  std::vector<Vec2> pos;
  std::vector<double> speed;
  std::vector<double> accel;
};

// p_u[0] = 0 (nothing to forward yet), p_b[N-1] = 0 (nothing left to send).
struct PowerSchedule {
  std::vector<double> p_b;
  std::vector<double> p_u;
};

struct Violation {
  std::string what;   // short tag, e.g. "speed below v_min"
  int slot;           // 1-based slot, 0 when not slot-specific
  double value;
};

std::vector<Violation> check_trajectory(const Trajectory& traj,
                                        const ScenarioConfig& cfg);
std::vector<Violation> check_powers(const PowerSchedule& pow,
                                    const ScenarioConfig& cfg);

// beta0 / (horizontal_dist^2 + H^2)
double channel_gain(const Vec2& uav_pos, const Vec2& target_pos,
                    const ScenarioConfig& cfg);

// log2(1 + p * g / noise), bits/s/Hz. Rejects negative power.
double link_rate(double power_W, double gain, double noise_W);

// Fixed-wing propulsion power for one slot, W:
//   alpha*v^3 + beta/v + beta*a^2/(g^2 v) + kinetic_delta/slot_len
// Rejects speed <= 0.
double propulsion_power(double speed, double accel, double kinetic_delta,
                        const ScenarioConfig& cfg);

struct IccVerdict {
  bool feasible = false;
  double max_violation = 0.0;  // worst prefix deficit, bits/s/Hz-slots
  int worst_slot = 0;          // 1-based slot of the worst prefix
};

// Information causality: the UAV may only forward what it has already
// received, i.e. sum_{j<=n} rates_u[j] <= sum_{j<n} rates_b[j] for every n,
// and rates_u for slot 1 must be zero.
IccVerdict icc_check(const std::vector<double>& rates_b,
                     const std::vector<double>& rates_u, double tol);

struct SolutionReport {
  std::vector<double> r_b;          // BS->UAV rate per slot
  std::vector<double> r_u;          // UAV->user rate per slot
  std::vector<std::vector<double>> r_adv;  // [adversary][slot], worst case
  std::vector<double> r_adv_worst;  // max over adversaries per slot
  std::vector<double> r_secrecy;    // r_u - r_adv_worst, unclamped
  std::vector<double> e_p;          // propulsion power per slot, W

  double secrecy_bits = 0.0;          // B * slot_len * sum r_secrecy
  double secrecy_bits_clamped = 0.0;  // same with per-slot clamp at 0
  double energy_J = 0.0;              // slot_len * sum e_p (slots 2..N)
  double ee_kbit_per_J = 0.0;         // secrecy_bits / energy / 1000
  double ee_clamped_kbit_per_J = 0.0;
};

// Exact (non-linearized) evaluation with worst-case adversary gains.
// With check=true, throws std::invalid_argument on invariant violations.
SolutionReport evaluate_solution(const Trajectory& traj,
                                 const PowerSchedule& pow,
                                 const ScenarioConfig& cfg, bool check = true);

}  // namespace secrel
