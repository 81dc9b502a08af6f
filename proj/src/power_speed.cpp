#include "secrel/power_speed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "secrel/robust.hpp"

namespace secrel {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double cap_rate(double p, double gain, double noise) {
  return std::log2(1.0 + p * gain / noise);
}

// Power that makes cap_rate hit `rate` exactly.
double inv_cap(double rate, double gain, double noise) {
  return noise * (std::pow(2.0, rate) - 1.0) / gain;
}

struct SpeedBand {
  double lo = 0.0, hi = 0.0;
};

// Tangent of p -> log2(1 + p g / noise) at pstar; lies above the curve.
sca::AffineBound adv_tangent(double gain, double noise, double pstar) {
  const double kap = gain / noise;
  sca::AffineBound b;
  b.coef = kap / ((1.0 + kap * pstar) * kLn2);
  b.offset = std::log2(1.0 + kap * pstar) - b.coef * pstar;
  return b;
}

// Feasible speed window for slot n (0-based); slots 1..N-2 must span their
// path gap with |accel| <= a_max, the last slot has no gap.
SpeedBand speed_band(int n, int N, const std::vector<double>& dist,
                     const ScenarioConfig& cfg) {
  SpeedBand b{cfg.v_min, cfg.v_max};
  if (n <= N - 2) {
    const double dt = cfg.slot_len();
    const double head = 0.5 * dt * dt * cfg.a_max;
    b.lo = std::max(b.lo, (dist[n] - head) / dt);
    b.hi = std::min(b.hi, (dist[n] + head) / dt);
  }
  if (b.lo > b.hi + 1e-9) {
    std::ostringstream os;
    os << "mobility band empty for slot " << n + 1 << ": gap " << dist[n]
       << " m outside reachable [" << cfg.v_min << ", " << cfg.v_max
       << "] m/s window";
    throw std::invalid_argument(os.str());
  }
  if (b.hi - b.lo < 1e-7) b.lo = b.hi = 0.5 * (b.lo + b.hi);
  return b;
}

std::string tag(const char* base, int slot) {
  std::ostringstream os;
  os << base << "_" << slot;
  return os.str();
}

double eval_expr(const conic::Expr& e, const std::vector<double>& x) {
  double v = e.constant;
  for (const conic::LinTerm& t : e.terms) v += t.coef * x[t.var];
  return v;
}

}  // namespace

PowerSpeedModel build_power_speed_program(const Trajectory& traj,
                                          const ScenarioConfig& cfg,
                                          double lambda,
                                          const PowerSchedule& incumbent_pow,
                                          const Trajectory& incumbent_traj) {
  const int N = cfg.slots_N;
  const int A = (int)cfg.adversaries.size();
  const double dt = cfg.slot_len();
  const double sig = cfg.noise_power;
  const double g2 = cfg.gravity_g * cfg.gravity_g;

  PowerSpeedModel m;
  m.lambda = lambda;
  m.dt = dt;
  m.dist.resize(N - 1);
  for (int n = 0; n + 1 < N; ++n)
    m.dist[n] = (traj.pos[n + 1] - traj.pos[n]).norm();

  std::vector<double> gb(N, 0.0), gu(N, 0.0);
  std::vector<std::vector<double>> ga(A, std::vector<double>(N, 0.0));
  for (int n = 0; n < N; ++n) {
    gb[n] = channel_gain(traj.pos[n], cfg.bs_pos, cfg);
    gu[n] = channel_gain(traj.pos[n], cfg.user_pos, cfg);
    for (int a = 0; a < A; ++a)
      ga[a][n] = worstcase_adv_gain(traj.pos[n], cfg.adversaries[a], cfg);
  }

  conic::ConicProgram& P = m.prog;
  PowerSpeedVars& ix = m.idx;
  ix.p_b.assign(N, -1);
  ix.p_u.assign(N, -1);
  ix.v.assign(N, -1);
  ix.q.assign(N, -1);
  ix.r_b.assign(N, -1);
  ix.zeta.assign(N, -1);
  ix.cum_rb.assign(N, -1);
  ix.cum_zeta.assign(N, -1);
  ix.cube_s.assign(N, -1);
  ix.cube_t.assign(N, -1);
  ix.inv_q.assign(N, -1);
  ix.acc_w.assign(N, -1);
  ix.t_adv.assign(N, -1);

  for (int n = 0; n + 1 < N; ++n)
    ix.p_b[n] = P.add_var(tag("p_b", n + 1), 0.0, cfg.p_b_max);
  for (int n = 1; n < N; ++n)
    ix.p_u[n] = P.add_var(tag("p_u", n + 1), 0.0, cfg.p_u_max);
  for (int n = 1; n < N; ++n) {
    const SpeedBand b = speed_band(n, N, m.dist, cfg);
    ix.v[n] = P.add_var(tag("v", n + 1), b.lo, b.hi);
    ix.q[n] = P.add_var(tag("q", n + 1), 0.5 * cfg.v_min, b.hi);
    ix.inv_q[n] =
        P.add_var(tag("inv_q", n + 1), 1.0 / cfg.v_max, 4.0 / cfg.v_min);
    ix.cube_s[n] =
        P.add_var(tag("cube_s", n + 1), 0.0, 1.1 * cfg.v_max * cfg.v_max);
    ix.cube_t[n] = P.add_var(tag("cube_t", n + 1), 0.0,
                             1.2 * cfg.v_max * cfg.v_max * cfg.v_max);
    if (n + 1 < N)
      ix.acc_w[n] = P.add_var(tag("acc_w", n + 1), 0.0,
                              4.0 * cfg.a_max * cfg.a_max / cfg.v_min);
  }
  double cum_cap = 0.0;
  for (int n = 0; n + 1 < N; ++n) {
    const double cap = cap_rate(cfg.p_b_max, gb[n], sig) + 1.0;
    cum_cap += cap;
    ix.r_b[n] = P.add_var(tag("r_b", n + 1), 0.0, cap);
    ix.cum_rb[n] = P.add_var(tag("cum_rb", n + 1), 0.0, cum_cap);
  }
  // Adversary-rate tangents at the incumbent power; t_adv bounds must cover
  // the tangent range, which can exceed the capacity when pstar is small.
  std::vector<std::vector<sca::AffineBound>> atan(
      A, std::vector<sca::AffineBound>(N));
  for (int n = 1; n < N; ++n) {
    const double pstar = std::clamp(incumbent_pow.p_u[n], 0.0, cfg.p_u_max);
    for (int a = 0; a < A; ++a) atan[a][n] = adv_tangent(ga[a][n], sig, pstar);
  }
  cum_cap = 0.0;
  for (int n = 1; n < N; ++n) {
    const double cap = cap_rate(cfg.p_u_max, gu[n], sig) + 1.0;
    cum_cap += cap;
    ix.zeta[n] = P.add_var(tag("zeta", n + 1), 0.0, cap);
    ix.cum_zeta[n] = P.add_var(tag("cum_zeta", n + 1), 0.0, cum_cap);
    if (A > 0) {
      double acap = 0.0;
      for (int a = 0; a < A; ++a)
        acap = std::max(acap, atan[a][n].at(cfg.p_u_max));
      ix.t_adv[n] = P.add_var(tag("t_adv", n + 1), 0.0, acap + 1.0);
    }
  }
  ix.k_end = P.add_var("k_end", 0.0, 1.1 * cfg.v_max * cfg.v_max + 1.0);

  using conic::Expr;
  // Running-sum definitions keep every causality row two variables wide.
  for (int n = 0; n + 1 < N; ++n) {
    Expr def = Expr::var(ix.cum_rb[n]) - Expr::var(ix.r_b[n]);
    if (n > 0) def -= Expr::var(ix.cum_rb[n - 1]);
    P.add_eq(def, 0.0, tag("cum_rb_def", n + 1));
  }
  for (int n = 1; n < N; ++n) {
    Expr def = Expr::var(ix.cum_zeta[n]) - Expr::var(ix.zeta[n]);
    if (n > 1) def -= Expr::var(ix.cum_zeta[n - 1]);
    P.add_eq(def, 0.0, tag("cum_zeta_def", n + 1));
  }
  for (int n = 1; n < N; ++n) {
    P.add_le(Expr::var(ix.cum_zeta[n]), Expr::var(ix.cum_rb[n - 1]),
             tag("icc", n + 1));
    m.icc_rows.push_back((int)P.lin.size() - 1);
  }

  Expr sum_pb, sum_pu;
  for (int n = 0; n + 1 < N; ++n) sum_pb += Expr::var(ix.p_b[n]);
  // The average cap covers slots 1..N-1; the last UAV slot is peak-capped
  // only, matching the feasibility checker.
  for (int n = 1; n + 1 < N; ++n) sum_pu += Expr::var(ix.p_u[n]);
  P.add_le(sum_pb, (N - 1) * cfg.p_b_avg, "avg_p_b");
  m.avg_rows.push_back((int)P.lin.size() - 1);
  P.add_le(sum_pu, (N - 1) * cfg.p_u_avg, "avg_p_u");
  m.avg_rows.push_back((int)P.lin.size() - 1);

  for (int n = 1; n < N; ++n)
    P.add_le(Expr::var(ix.q[n]), Expr::var(ix.v[n]), tag("q_le_v", n + 1));

  // Worst-case adversary rates are concave in p_u; their tangents at the
  // incumbent power are global upper bounds.
  for (int n = 1; n < N && A > 0; ++n)
    for (int a = 0; a < A; ++a)
      P.add_le(atan[a][n].offset + Expr::var(ix.p_u[n], atan[a][n].coef) -
                   Expr::var(ix.t_adv[n]),
               0.0, tag(("adv" + std::to_string(a) + "_tan").c_str(), n + 1));

  for (int n = 0; n + 1 < N; ++n)
    P.add_log(ix.r_b[n], Expr::var(ix.p_b[n], gb[n] / sig),
              tag("rb_log", n + 1));
  for (int n = 1; n < N; ++n)
    P.add_log(ix.zeta[n], Expr::var(ix.p_u[n], gu[n] / sig),
              tag("zeta_log", n + 1));

  for (int n = 1; n < N; ++n) {
    P.add_rotated_soc(Expr(1.0), Expr::var(ix.inv_q[n]), Expr::var(ix.q[n]),
                      tag("inv_q_cone", n + 1));
    P.add_rotated_soc(Expr::var(ix.v[n]), Expr::var(ix.cube_s[n]), Expr(1.0),
                      tag("cube_s_cone", n + 1));
    P.add_rotated_soc(Expr::var(ix.cube_s[n]), Expr::var(ix.cube_t[n]),
                      Expr::var(ix.v[n]), tag("cube_t_cone", n + 1));
    if (n + 1 < N) {
      // accel is affine in the slot speed on a fixed path
      Expr a_expr =
          Expr(2.0 * m.dist[n] / (dt * dt)) - Expr::var(ix.v[n], 2.0 / dt);
      P.add_rotated_soc(a_expr, Expr::var(ix.acc_w[n]), Expr::var(ix.q[n]),
                        tag("acc_cone", n + 1));
    }
  }
  P.add_rotated_soc(Expr::var(ix.v[N - 1]), Expr::var(ix.k_end), Expr(1.0),
                    "k_end_cone");

  // Objective: secrecy rate-seconds minus lambda * propulsion energy, with
  // the kinetic telescope's -v_2^2 credit linearized at the incumbent.
  Expr obj;
  for (int n = 1; n < N; ++n) {
    obj += Expr::var(ix.zeta[n], dt);
    if (A > 0) obj -= Expr::var(ix.t_adv[n], dt);
  }
  const double lam = lambda;
  for (int n = 1; n < N; ++n) {
    obj -= Expr::var(ix.cube_t[n], lam * dt * cfg.alpha_u);
    obj -= Expr::var(ix.inv_q[n], lam * dt * cfg.beta_u);
    if (n + 1 < N)
      obj -= Expr::var(ix.acc_w[n], lam * dt * cfg.beta_u / g2);
  }
  obj -= Expr::var(ix.k_end, lam * 0.5 * cfg.mass_m);
  const double v1s =
      std::clamp(incumbent_traj.speed[1], cfg.v_min, cfg.v_max);
  const sca::AffineBound ksq = sca::taylor_square_lower(v1s);
  obj += Expr::var(ix.v[1], lam * 0.5 * cfg.mass_m * ksq.coef);
  obj += lam * 0.5 * cfg.mass_m * ksq.offset;
  m.energy_const = lam * 0.5 * cfg.mass_m * ksq.offset;
  P.objective = obj;
  P.validate();
  return m;
}

std::vector<double> power_speed_start(const PowerSpeedModel& m,
                                      const Trajectory& traj,
                                      const ScenarioConfig& cfg,
                                      const PowerSchedule& pow) {
  const int N = cfg.slots_N;
  const int A = (int)cfg.adversaries.size();
  const double sig = cfg.noise_power;
  const conic::ConicProgram& P = m.prog;
  const PowerSpeedVars& ix = m.idx;

  std::vector<double> x(P.num_vars, 0.0);
  auto interior = [&](int var, double want) {
    const double lo = P.lb[var], hi = P.ub[var];
    if (hi - lo < 1e-12) return lo;
    const double margin = 0.02 * (hi - lo);
    return std::clamp(want, lo + margin, hi - margin);
  };

  for (int n = 1; n < N; ++n) {
    const double v = interior(ix.v[n], traj.speed[n]);
    x[ix.v[n]] = v;
    x[ix.q[n]] = std::max(P.lb[ix.q[n]] + 0.01 * cfg.v_min, 0.995 * v);
    x[ix.inv_q[n]] = 1.03 / x[ix.q[n]];
    x[ix.cube_s[n]] = 1.03 * v * v;
    x[ix.cube_t[n]] = 1.03 * x[ix.cube_s[n]] * x[ix.cube_s[n]] / v;
    if (n + 1 < N) {
      const double dt = cfg.slot_len();
      const double a = 2.0 * (m.dist[n] - dt * v) / (dt * dt);
      x[ix.acc_w[n]] = 1.03 * a * a / x[ix.q[n]] + 1e-4;
    }
  }
  x[ix.k_end] = 1.03 * x[ix.v[N - 1]] * x[ix.v[N - 1]] + 1e-4;

  // Blend incumbent powers toward a small strictly feasible level so peak,
  // average, and positivity margins all hold strictly.
  for (int n = 0; n + 1 < N; ++n) {
    const double p = std::clamp(pow.p_b[n], 0.0, cfg.p_b_max);
    x[ix.p_b[n]] = 0.95 * p + 0.05 * 0.4 * cfg.p_b_avg;
  }
  for (int n = 1; n < N; ++n) {
    const double p = std::clamp(pow.p_u[n], 0.0, cfg.p_u_max);
    x[ix.p_u[n]] = 0.95 * p + 0.05 * 0.4 * cfg.p_u_avg;
  }

  double cum = 0.0;
  for (int n = 0; n + 1 < N; ++n) {
    const double gbn = channel_gain(traj.pos[n], cfg.bs_pos, cfg);
    x[ix.r_b[n]] = 0.93 * cap_rate(x[ix.p_b[n]], gbn, sig);
    cum += x[ix.r_b[n]];
    x[ix.cum_rb[n]] = cum;
  }
  double sent = 0.0;
  for (int n = 1; n < N; ++n) {
    const double gun = channel_gain(traj.pos[n], cfg.user_pos, cfg);
    const double budget = x[ix.cum_rb[n - 1]];
    x[ix.zeta[n]] = std::min(0.93 * cap_rate(x[ix.p_u[n]], gun, sig),
                             0.45 * (budget - sent));
    sent += x[ix.zeta[n]];
    x[ix.cum_zeta[n]] = sent;
    if (A > 0) {
      // Must clear the tangent rows, which sit at the incumbent power.
      const double pstar = std::clamp(pow.p_u[n], 0.0, cfg.p_u_max);
      double worst = 0.0;
      for (int a = 0; a < A; ++a) {
        const double g =
            worstcase_adv_gain(traj.pos[n], cfg.adversaries[a], cfg);
        worst = std::max(worst, adv_tangent(g, sig, pstar).at(x[ix.p_u[n]]));
      }
      x[ix.t_adv[n]] = worst + 0.02;
    }
  }
  return x;
}

PowerSpeedOutcome solve_power_speed(const Trajectory& traj,
                                    const ScenarioConfig& cfg,
                                    const PowerSchedule& incumbent_pow) {
  const int N = cfg.slots_N;
  const double dt = cfg.slot_len();
  const double sig = cfg.noise_power;
  PowerSpeedOutcome out;

  struct Cand {
    PowerSchedule pow;
    Trajectory traj;
  };
  Cand cur{incumbent_pow, traj};
  cur.pow.p_u[0] = 0.0;
  cur.pow.p_b[N - 1] = 0.0;

  try {
    SolutionReport rep0 = evaluate_solution(cur.traj, cur.pow, cfg, false);
    const double lambda0 =
        std::max(0.0, rep0.secrecy_bits / cfg.bandwidth_B / rep0.energy_J);

    auto inner = [&](double lambda_raw) -> sca::InnerOutcome<Cand> {
      // Negative ratios would flip the energy surrogate's direction; the
      // parametric subproblem stays meaningful clamped at zero.
      const double lambda = std::max(0.0, lambda_raw);
      BlockIterate bi;
      bi.lambda = lambda;
      double F = 0.0, F_prev = 0.0, num = 0.0, den = 1.0;
      for (int pass = 0; pass < 8; ++pass) {
        PowerSpeedModel model =
            build_power_speed_program(traj, cfg, lambda, cur.pow, cur.traj);
        conic::SolveOptions opt;
        opt.warm_start = power_speed_start(model, cur.traj, cfg, cur.pow);
        conic::SolveResult res = conic::solve(model.prog, opt);
        bi.newton_iters += res.newton_iters;
        if (res.status != conic::SolveStatus::optimal) {
          if (pass == 0)
            throw std::runtime_error("power/speed subproblem: " +
                                     std::string(to_string(res.status)) +
                                     (res.message.empty() ? "" : ", ") +
                                     res.message);
          break;
        }
        const PowerSpeedVars& ix = model.idx;
        Cand next = cur;
        next.traj.speed[0] = model.dist[0] / dt;
        next.traj.accel[0] = 0.0;
        for (int n = 1; n < N; ++n) {
          const double v = res.x[ix.v[n]];
          next.traj.speed[n] = v;
          next.traj.accel[n] =
              n + 1 < N ? 2.0 * (model.dist[n] - dt * v) / (dt * dt) : 0.0;
        }
        for (int n = 0; n < N; ++n) {
          next.pow.p_b[n] =
              n + 1 < N ? inv_cap(res.x[ix.r_b[n]],
                                  channel_gain(traj.pos[n], cfg.bs_pos, cfg),
                                  sig)
                        : 0.0;
          next.pow.p_u[n] =
              n >= 1 ? inv_cap(res.x[ix.zeta[n]],
                               channel_gain(traj.pos[n], cfg.user_pos, cfg),
                               sig)
                     : 0.0;
        }
        SolutionReport rep = evaluate_solution(next.traj, next.pow, cfg, false);
        cur = next;
        F = res.objective;
        num = rep.secrecy_bits / cfg.bandwidth_B;
        den = rep.energy_J;
        ++bi.sca_passes;
        if (pass > 0 && std::abs(F - F_prev) <= 1e-4 * (1.0 + std::abs(F)))
          break;
        F_prev = F;
      }
      bi.F = F;
      bi.num = num;
      bi.den = den;
      out.trace.push_back(bi);
      return {F, num, den, cur};
    };

    sca::DinkelbachRun<Cand> run = sca::dinkelbach_loop<Cand>(
        inner, lambda0, cfg.tol.dinkelbach, 25);
    out.ok = true;
    out.pow = run.best.pow;
    out.traj = run.best.traj;
    if (!run.converged) out.message = "dinkelbach iteration cap reached";
  } catch (const std::exception& e) {
    out.ok = false;
    out.message = e.what();
    out.pow = cur.pow;
    out.traj = cur.traj;
  }
  return out;
}

KktReport kkt_diagnostics(const PowerSpeedModel& m,
                          const conic::SolveResult& res) {
  KktReport r;
  double cmax = 1.0;
  for (const conic::LinTerm& t : m.prog.objective.terms)
    cmax = std::max(cmax, std::abs(t.coef));
  r.max_stationarity = conic::kkt_residual(m.prog, res) / cmax;
  bool nonneg = true;
  for (std::size_t i = 0; i < m.prog.lin.size(); ++i) {
    if (m.prog.lin[i].equality) continue;
    const double slack = -eval_expr(m.prog.lin[i].lhs, res.x);
    const double dual = res.lin_duals[i];
    r.max_comp_slack = std::max(r.max_comp_slack, std::abs(dual * slack));
    if (dual < -1e-8) nonneg = false;
  }
  for (int i = 0; i < m.prog.num_vars; ++i)
    if (res.lo_duals[i] < -1e-8 || res.hi_duals[i] < -1e-8) nonneg = false;
  // duals in secrecy-bit units: the objective pays dt per relayed bit
  r.min_icc_dual = m.icc_rows.empty() ? 0.0 : 1e300;
  for (int row : m.icc_rows) {
    r.sum_icc_duals += res.lin_duals[row] / m.dt;
    r.min_icc_dual = std::min(r.min_icc_dual, res.lin_duals[row] / m.dt);
  }
  r.duals_nonnegative = nonneg;
  return r;
}

}  // namespace secrel
