#include "secrel/scenario.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "secrel/robust.hpp"

namespace secrel {

namespace {

[[noreturn]] void fail_field(const std::string& field, const std::string& why) {
  throw std::invalid_argument("config field '" + field + "': " + why);
}

}  // namespace

void validate_config(const ScenarioConfig& cfg) {
  if (cfg.slots_N < 3) fail_field("slots_N", "need at least 3 slots");
  if (!(cfg.horizon_T > 0)) fail_field("horizon_T", "must be positive");
  if (!(cfg.altitude_H > 0)) fail_field("altitude_H", "must be positive");
  if (!(cfg.beta0 > 0)) fail_field("beta0", "must be positive");
  if (!(cfg.noise_power > 0)) fail_field("noise_power", "must be positive");
  if (!(cfg.p_b_max > 0)) fail_field("p_b_max", "must be positive");
  if (!(cfg.p_u_max > 0)) fail_field("p_u_max", "must be positive");
  if (!(cfg.p_b_avg > 0 && cfg.p_b_avg <= cfg.p_b_max))
    fail_field("p_b_avg", "must lie in (0, p_b_max]");
  if (!(cfg.p_u_avg > 0 && cfg.p_u_avg <= cfg.p_u_max))
    fail_field("p_u_avg", "must lie in (0, p_u_max]");
  if (!(cfg.v_min > 0)) fail_field("v_min", "must be positive");
  if (!(cfg.v_max > cfg.v_min)) fail_field("v_max", "must exceed v_min");
  if (!(cfg.a_max > 0)) fail_field("a_max", "must be positive");
  if (!(cfg.alpha_u > 0)) fail_field("alpha_u", "must be positive");
  if (!(cfg.beta_u > 0)) fail_field("beta_u", "must be positive");
  if (!(cfg.mass_m > 0)) fail_field("mass_m", "must be positive");
  if (!(cfg.gravity_g > 0)) fail_field("gravity_g", "must be positive");
  if (!(cfg.bandwidth_B > 0)) fail_field("bandwidth_B", "must be positive");
  for (std::size_t a = 0; a < cfg.adversaries.size(); ++a) {
    if (cfg.adversaries[a].radius_R < 0) {
      std::ostringstream os;
      os << "adversaries[" << a << "].radius_R";
      fail_field(os.str(), "must be nonnegative");
    }
  }
  const ToleranceSet& t = cfg.tol;
  if (!(t.feasibility > 0)) fail_field("tol.feasibility", "must be positive");
  if (!(t.dinkelbach > 0)) fail_field("tol.dinkelbach", "must be positive");
  if (!(t.sca > 0)) fail_field("tol.sca", "must be positive");
  if (!(t.psd > 0)) fail_field("tol.psd", "must be positive");
}

std::vector<Violation> check_trajectory(const Trajectory& traj,
                                        const ScenarioConfig& cfg) {
  std::vector<Violation> out;
  const int N = cfg.slots_N;
  if ((int)traj.pos.size() != N || (int)traj.speed.size() != N ||
      (int)traj.accel.size() != N) {
    out.push_back({"trajectory arrays must have length N", 0,
                   (double)traj.pos.size()});
    return out;
  }
  const double dt = cfg.slot_len();
  const double tol = cfg.tol.feasibility;
  for (int n = 1; n < N; ++n) {
    if (traj.speed[n] < cfg.v_min - tol)
      out.push_back({"speed below v_min", n + 1, traj.speed[n]});
    if (traj.speed[n] > cfg.v_max + tol)
      out.push_back({"speed above v_max", n + 1, traj.speed[n]});
    if (std::abs(traj.accel[n]) > cfg.a_max + tol)
      out.push_back({"accel above a_max", n + 1, traj.accel[n]});
  }
  for (int n = 0; n + 1 < N; ++n) {
    const double dist = (traj.pos[n + 1] - traj.pos[n]).norm();
    const double res =
        std::abs(dist - (dt * traj.speed[n] + 0.5 * dt * dt * traj.accel[n]));
    if (res > tol)
      out.push_back({"mobility residual above tolerance", n + 1, res});
  }
  return out;
}

std::vector<Violation> check_powers(const PowerSchedule& pow,
                                    const ScenarioConfig& cfg) {
  std::vector<Violation> out;
  const int N = cfg.slots_N;
  if ((int)pow.p_b.size() != N || (int)pow.p_u.size() != N) {
    out.push_back({"power arrays must have length N", 0, (double)pow.p_b.size()});
    return out;
  }
  const double tol = cfg.tol.feasibility;
  if (std::abs(pow.p_u[0]) > tol)
    out.push_back({"p_u must be zero in slot 1", 1, pow.p_u[0]});
  if (std::abs(pow.p_b[N - 1]) > tol)
    out.push_back({"p_b must be zero in slot N", N, pow.p_b[N - 1]});
  double sum_b = 0.0, sum_u = 0.0;
  for (int n = 0; n < N; ++n) {
    if (pow.p_b[n] < -tol)
      out.push_back({"p_b negative", n + 1, pow.p_b[n]});
    if (pow.p_b[n] > cfg.p_b_max + tol)
      out.push_back({"p_b above p_b_max", n + 1, pow.p_b[n]});
    if (pow.p_u[n] < -tol)
      out.push_back({"p_u negative", n + 1, pow.p_u[n]});
    if (pow.p_u[n] > cfg.p_u_max + tol)
      out.push_back({"p_u above p_u_max", n + 1, pow.p_u[n]});
  }
  // Average caps cover slots 1..N-1; the excluded endpoint power is zero
  // anyway.
  for (int n = 0; n + 1 < N; ++n) {
    sum_b += pow.p_b[n];
    sum_u += pow.p_u[n];
  }
  if (sum_b > (N - 1) * cfg.p_b_avg + tol)
    out.push_back({"mean p_b above p_b_avg", 0, sum_b / (N - 1)});
  if (sum_u > (N - 1) * cfg.p_u_avg + tol)
    out.push_back({"mean p_u above p_u_avg", 0, sum_u / (N - 1)});
  return out;
}

double channel_gain(const Vec2& uav_pos, const Vec2& target_pos,
                    const ScenarioConfig& cfg) {
  const double d2 = (uav_pos - target_pos).squaredNorm();
  return cfg.beta0 / (d2 + cfg.altitude_H * cfg.altitude_H);
}

double link_rate(double power_W, double gain, double noise_W) {
  if (power_W < 0)
    throw std::invalid_argument("link_rate: negative transmit power");
  if (!(gain >= 0) || !(noise_W > 0))
    throw std::invalid_argument("link_rate: bad gain or noise");
  return std::log2(1.0 + power_W * gain / noise_W);
}

double propulsion_power(double speed, double accel, double kinetic_delta,
                        const ScenarioConfig& cfg) {
  if (!(speed > 0))
    throw std::invalid_argument("propulsion_power: speed must be positive");
  const double g2 = cfg.gravity_g * cfg.gravity_g;
  return cfg.alpha_u * speed * speed * speed + cfg.beta_u / speed +
         cfg.beta_u * accel * accel / (g2 * speed) +
         kinetic_delta / cfg.slot_len();
}

IccVerdict icc_check(const std::vector<double>& rates_b,
                     const std::vector<double>& rates_u, double tol) {
  if (rates_b.size() != rates_u.size() || rates_b.empty())
    throw std::invalid_argument("icc_check: rate arrays must match and be nonempty");
  IccVerdict v;
  v.feasible = true;
  double deficit0 = rates_u[0];  // must be ~0: nothing received yet
  if (deficit0 > tol) {
    v.feasible = false;
    v.max_violation = deficit0;
    v.worst_slot = 1;
  }
  double recv = 0.0, sent = 0.0;
  for (std::size_t n = 1; n < rates_u.size(); ++n) {
    recv += rates_b[n - 1];
    sent += rates_u[n];
    const double deficit = sent - recv;
    if (deficit > v.max_violation) {
      v.max_violation = deficit;
      v.worst_slot = (int)n + 1;
    }
    if (deficit > tol) v.feasible = false;
  }
  return v;
}

SolutionReport evaluate_solution(const Trajectory& traj,
                                 const PowerSchedule& pow,
                                 const ScenarioConfig& cfg, bool check) {
  validate_config(cfg);
  if (check) {
    auto vt = check_trajectory(traj, cfg);
    auto vp = check_powers(pow, cfg);
    if (!vt.empty() || !vp.empty()) {
      const Violation& v = vt.empty() ? vp.front() : vt.front();
      std::ostringstream os;
      os << "evaluate_solution: " << v.what << " (slot " << v.slot
         << ", value " << v.value << ")";
      throw std::invalid_argument(os.str());
    }
  }
  const int N = cfg.slots_N;
  const int A = (int)cfg.adversaries.size();
  const double dt = cfg.slot_len();

  SolutionReport rep;
  rep.r_b.assign(N, 0.0);
  rep.r_u.assign(N, 0.0);
  rep.r_adv.assign(A, std::vector<double>(N, 0.0));
  rep.r_adv_worst.assign(N, 0.0);
  rep.r_secrecy.assign(N, 0.0);
  rep.e_p.assign(N, 0.0);

  for (int n = 0; n < N; ++n) {
    if (n + 1 < N)
      rep.r_b[n] = link_rate(pow.p_b[n],
                             channel_gain(traj.pos[n], cfg.bs_pos, cfg),
                             cfg.noise_power);
    if (n >= 1) {
      rep.r_u[n] = link_rate(pow.p_u[n],
                             channel_gain(traj.pos[n], cfg.user_pos, cfg),
                             cfg.noise_power);
      double worst = 0.0;
      for (int a = 0; a < A; ++a) {
        const double g = worstcase_adv_gain(traj.pos[n], cfg.adversaries[a], cfg);
        rep.r_adv[a][n] = link_rate(pow.p_u[n], g, cfg.noise_power);
        worst = std::max(worst, rep.r_adv[a][n]);
      }
      rep.r_adv_worst[n] = worst;
      rep.r_secrecy[n] = rep.r_u[n] - worst;

      // Kinetic term telescopes; slot 2 borrows its predecessor speed.
      const double kd =
          n >= 2 ? 0.5 * cfg.mass_m * (traj.speed[n] * traj.speed[n] -
                                       traj.speed[n - 1] * traj.speed[n - 1])
                 : 0.0;
      rep.e_p[n] = propulsion_power(traj.speed[n], traj.accel[n], kd, cfg);
    }
  }

  double bits = 0.0, bits_cl = 0.0, joules = 0.0;
  for (int n = 1; n < N; ++n) {
    bits += rep.r_secrecy[n];
    bits_cl += std::max(0.0, rep.r_secrecy[n]);
    joules += rep.e_p[n];
  }
  rep.secrecy_bits = cfg.bandwidth_B * dt * bits;
  rep.secrecy_bits_clamped = cfg.bandwidth_B * dt * bits_cl;
  rep.energy_J = dt * joules;
  rep.ee_kbit_per_J = rep.secrecy_bits / rep.energy_J / 1000.0;
  rep.ee_clamped_kbit_per_J = rep.secrecy_bits_clamped / rep.energy_J / 1000.0;
  return rep;
}

}  // namespace secrel
