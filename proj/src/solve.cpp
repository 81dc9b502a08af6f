#include "secrel/solve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

// Log-barrier path following over the structured cone families of
// ConicProgram. One Engine instance owns the preprocessed constraint data;
// phase 1 (feasibility, tau relaxation) and phase 2 (optimality) share the
// same Newton machinery.

namespace secrel::conic {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "?";
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Eigen::VectorXd;

constexpr double kLn2 = std::numbers::ln2;

struct Row {
  std::vector<int> v;
  std::vector<double> a;
  double b = 0.0;

  double value(const VectorXd& x) const {
    double s = b;
    for (std::size_t i = 0; i < v.size(); ++i) s += a[i] * x[v[i]];
    return s;
  }
};

Row compact(const Expr& e) {
  std::map<int, double> acc;
  for (const LinTerm& t : e.terms) acc[t.var] += t.coef;
  Row r;
  r.b = e.constant;
  for (auto& [var, coef] : acc) {
    r.v.push_back(var);
    r.a.push_back(coef);
  }
  return r;
}

struct SocPre {
  std::vector<Row> rows;
  Row rhs;
};

struct PsdPre {
  int dim = 0;
  std::vector<Row> entries;       // upper triangle, row-major
  std::vector<int> support;       // union of entry vars
};

struct LogPre {
  int rate = -1;
  Row u;                          // 1 + snr
};

// Dense symmetric scatter helper: H += scale * w w^T over a sparse support.
struct Scatter {
  std::vector<Triplet>* H;
  void rank1(const std::vector<int>& idx, const std::vector<double>& w,
             double scale) {
    for (std::size_t i = 0; i < idx.size(); ++i)
      for (std::size_t j = 0; j < idx.size(); ++j)
        H->emplace_back(idx[i], idx[j], scale * w[i] * w[j]);
  }
};

struct Engine {
  int n = 0;          // solver variables (objective vars, + tau in phase 1)
  int tau = -1;
  VectorXd c;         // maximize c.x
  std::vector<double> lo, hi;       // phase 2 bound barriers
  std::vector<Row> srows;           // slack rows, barrier -ln(row(x))
  std::vector<SocPre> socs;
  std::vector<PsdPre> psds;
  std::vector<LogPre> logs;
  std::vector<Triplet> eq_trip;
  int meq = 0;
  SpMat A;
  VectorXd beq;
  double nu = 0.0;

  void add_eq_row(const Row& r) {
    for (std::size_t i = 0; i < r.v.size(); ++i)
      eq_trip.emplace_back(meq, r.v[i], r.a[i]);
    beq.conservativeResize(meq + 1);
    beq[meq] = -r.b;
    ++meq;
  }

  void finalize() {
    A.resize(meq, n);
    A.setFromTriplets(eq_trip.begin(), eq_trip.end());
    nu = 0.0;
    for (int i = 0; i < (int)lo.size(); ++i) {
      if (lo[i] > -kInf) nu += 1.0;
      if (hi[i] < kInf) nu += 1.0;
    }
    nu += (double)srows.size();
    nu += 2.0 * (double)socs.size();
    for (const PsdPre& p : psds) nu += (double)p.dim;
    nu += 2.0 * (double)logs.size();
  }

  Eigen::MatrixXd psd_matrix(const PsdPre& p, const VectorXd& x) const {
    Eigen::MatrixXd M(p.dim, p.dim);
    int k = 0;
    for (int r = 0; r < p.dim; ++r)
      for (int cidx = r; cidx < p.dim; ++cidx) {
        const double v = p.entries[k++].value(x);
        M(r, cidx) = v;
        M(cidx, r) = v;
      }
    return M;
  }

  bool domain_ok(const VectorXd& x) const {
    for (int i = 0; i < n; ++i) {
      if (lo[i] > -kInf && !(x[i] - lo[i] > 0)) return false;
      if (hi[i] < kInf && !(hi[i] - x[i] > 0)) return false;
    }
    for (const Row& r : srows)
      if (!(r.value(x) > 0)) return false;
    for (const SocPre& s : socs) {
      const double v = s.rhs.value(x);
      if (!(v > 0)) return false;
      double u2 = 0.0;
      for (const Row& r : s.rows) {
        const double u = r.value(x);
        u2 += u * u;
      }
      if (!(v * v - u2 > 0)) return false;
    }
    for (const PsdPre& p : psds) {
      Eigen::LLT<Eigen::MatrixXd> llt(psd_matrix(p, x));
      if (llt.info() != Eigen::Success) return false;
    }
    for (const LogPre& l : logs) {
      const double u = l.u.value(x);
      if (!(u > 0)) return false;
      if (!(std::log(u) - kLn2 * x[l.rate] > 0)) return false;
    }
    return true;
  }

  // Barrier value; grad and Hessian triplets when requested.
  double barrier(const VectorXd& x, VectorXd* g, std::vector<Triplet>* H) const {
    double phi = 0.0;
    Scatter sc{H};
    for (int i = 0; i < n; ++i) {
      if (lo[i] > -kInf) {
        const double s = x[i] - lo[i];
        phi -= std::log(s);
        if (g) (*g)[i] -= 1.0 / s;
        if (H) H->emplace_back(i, i, 1.0 / (s * s));
      }
      if (hi[i] < kInf) {
        const double s = hi[i] - x[i];
        phi -= std::log(s);
        if (g) (*g)[i] += 1.0 / s;
        if (H) H->emplace_back(i, i, 1.0 / (s * s));
      }
    }
    for (const Row& r : srows) {
      const double s = r.value(x);
      phi -= std::log(s);
      if (g)
        for (std::size_t i = 0; i < r.v.size(); ++i)
          (*g)[r.v[i]] -= r.a[i] / s;
      if (H) sc.rank1(r.v, r.a, 1.0 / (s * s));
    }
    for (const SocPre& soc : socs) {
      const double v = soc.rhs.value(x);
      std::vector<double> uvals(soc.rows.size());
      double u2 = 0.0;
      for (std::size_t i = 0; i < soc.rows.size(); ++i) {
        uvals[i] = soc.rows[i].value(x);
        u2 += uvals[i] * uvals[i];
      }
      const double s = v * v - u2;
      phi -= std::log(s);
      // grad s over the union support
      std::map<int, double> ds;
      for (std::size_t i = 0; i < soc.rhs.v.size(); ++i)
        ds[soc.rhs.v[i]] += 2.0 * v * soc.rhs.a[i];
      for (std::size_t r = 0; r < soc.rows.size(); ++r)
        for (std::size_t i = 0; i < soc.rows[r].v.size(); ++i)
          ds[soc.rows[r].v[i]] -= 2.0 * uvals[r] * soc.rows[r].a[i];
      std::vector<int> iv;
      std::vector<double> dv;
      for (auto& [var, val] : ds) {
        iv.push_back(var);
        dv.push_back(val);
        if (g) (*g)[var] -= val / s;
      }
      if (H) {
        sc.rank1(iv, dv, 1.0 / (s * s));
        sc.rank1(soc.rhs.v, soc.rhs.a, -2.0 / s);
        for (const Row& r : soc.rows) sc.rank1(r.v, r.a, 2.0 / s);
      }
    }
    for (const PsdPre& p : psds) {
      const Eigen::MatrixXd M = psd_matrix(p, x);
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      phi -= 2.0 * std::log(llt.matrixL().determinant());
      if (!g && !H) continue;
      const Eigen::MatrixXd Mi = M.inverse();
      std::vector<Eigen::MatrixXd> G(p.support.size(),
                                     Eigen::MatrixXd::Zero(p.dim, p.dim));
      int k = 0;
      for (int r = 0; r < p.dim; ++r)
        for (int cidx = r; cidx < p.dim; ++cidx) {
          const Row& row = p.entries[k++];
          for (std::size_t i = 0; i < row.v.size(); ++i) {
            const auto it = std::lower_bound(p.support.begin(),
                                             p.support.end(), row.v[i]);
            const int si = (int)(it - p.support.begin());
            G[si](r, cidx) += row.a[i];
            if (r != cidx) G[si](cidx, r) += row.a[i];
          }
        }
      std::vector<Eigen::MatrixXd> Q(p.support.size());
      for (std::size_t i = 0; i < p.support.size(); ++i) {
        Q[i] = Mi * G[i];
        if (g) (*g)[p.support[i]] -= Q[i].trace();
      }
      if (H)
        for (std::size_t i = 0; i < p.support.size(); ++i)
          for (std::size_t j = 0; j < p.support.size(); ++j)
            H->emplace_back(p.support[i], p.support[j],
                            (Q[i] * Q[j]).trace());
    }
    for (const LogPre& l : logs) {
      const double u = l.u.value(x);
      const double gl = std::log(u) - kLn2 * x[l.rate];
      phi -= std::log(gl) + std::log(u);
      if (!g && !H) continue;
      std::vector<int> iv = l.u.v;
      std::vector<double> w;  // d(ln u)/dx over support
      for (double a : l.u.a) w.push_back(a / u);
      if (g) {
        for (std::size_t i = 0; i < iv.size(); ++i)
          (*g)[iv[i]] -= w[i] * (1.0 / gl + 1.0);
        (*g)[l.rate] += kLn2 / gl;
      }
      if (H) {
        std::vector<int> iv2 = iv;
        std::vector<double> w2 = w;
        iv2.push_back(l.rate);
        w2.push_back(-kLn2);
        sc.rank1(iv2, w2, 1.0 / (gl * gl));
        sc.rank1(iv, w, 1.0 + 1.0 / gl);
      }
    }
    return phi;
  }
};

struct CenterOutcome {
  bool ok = false;
  bool blew_up = false;
  bool exhausted = false;  // iteration cap hit before the decrement shrank
  bool stalled = false;    // roundoff floor reached; t cannot rise further
  int iters = 0;
  VectorXd w;  // equality multipliers, psi units
};

// Newton centering: minimize -t c.x + barrier(x) subject to A x = beq.
// Infeasible-start Newton for the equality rows; progress is measured on the
// KKT residual norm while the iterate is off the manifold, plain backtracking
// on psi once on it.
CenterOutcome center(const Engine& E, VectorXd& x, double t, int max_iter,
                     Eigen::SparseLU<SpMat>& lu, bool& analyzed,
                     double dec2_stop = 1e-9) {
  CenterOutcome out;
  const int n = E.n, m = E.meq;
  VectorXd w = VectorXd::Zero(m);
  const double beq_scale = m > 0 ? 1.0 + E.beq.cwiseAbs().maxCoeff() : 1.0;
  double best_dec2 = std::numeric_limits<double>::infinity();
  int flat = 0;
  for (int it = 0; it < max_iter; ++it) {
    VectorXd g = -t * E.c;
    std::vector<Triplet> trip;
    E.barrier(x, &g, &trip);
    const std::size_t h_end = trip.size();
    double reg = 1e-11;
    double delta = 0.0;
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, reg);
    for (const Triplet& tr : E.eq_trip) {
      trip.emplace_back(n + tr.row(), tr.col(), tr.value());
      trip.emplace_back(tr.col(), n + tr.row(), tr.value());
    }
    for (int k = 0; k < m; ++k) trip.emplace_back(n + k, n + k, -delta);

    SpMat K(n + m, n + m);
    K.setFromTriplets(trip.begin(), trip.end());
    if (!analyzed) {
      lu.analyzePattern(K);
      analyzed = true;
    }
    lu.factorize(K);
    if (lu.info() != Eigen::Success) {
      // singular without shifts (dependent equality rows or flat directions)
      for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 1e-7);
      reg += 1e-7;
      delta = 1e-9;
      for (int k = 0; k < m; ++k) trip.emplace_back(n + k, n + k, -delta);
      K.setFromTriplets(trip.begin(), trip.end());
      lu.factorize(K);
      if (lu.info() != Eigen::Success) return out;
    }
    const VectorXd r_eq = m > 0 ? VectorXd(E.A * x - E.beq) : VectorXd();
    VectorXd rhs(n + m);
    rhs.head(n) = -g;
    if (m > 0) rhs.tail(m) = -r_eq;
    VectorXd sol = lu.solve(rhs);
    // Refine against the unregularized KKT matrix; this cancels the bias the
    // reg/delta shifts would otherwise leave in the equality residuals.
    // Residuals are accumulated in long double: the factor only needs to be
    // approximately right when the residual itself is computed accurately.
    for (int rp = 0; rp < 3; ++rp) {
      std::vector<long double> acc(n + m);
      for (int i = 0; i < n + m; ++i) acc[i] = rhs[i];
      for (int kk = 0; kk < K.outerSize(); ++kk)
        for (SpMat::InnerIterator kit(K, kk); kit; ++kit)
          acc[kit.row()] -= (long double)kit.value() * (long double)sol[kit.col()];
      for (int i = 0; i < n; ++i) acc[i] += (long double)reg * (long double)sol[i];
      for (int kk = 0; kk < m; ++kk)
        acc[n + kk] -= (long double)delta * (long double)sol[n + kk];
      VectorXd resid(n + m);
      for (int i = 0; i < n + m; ++i) resid[i] = (double)acc[i];
      sol += lu.solve(resid);
    }

    const VectorXd dx = sol.head(n);
    const VectorXd w_new = m > 0 ? VectorXd(sol.tail(m)) : VectorXd();
    out.w = w_new;
    // Newton decrement via dx' H dx (H block only)
    double dec2 = 0.0;
    for (std::size_t k = 0; k < h_end; ++k)
      dec2 += trip[k].value() * dx[trip[k].row()] * dx[trip[k].col()];
    ++out.iters;
    if (!std::isfinite(dec2) || !dx.allFinite()) return out;
    const double eq_norm = m > 0 ? r_eq.cwiseAbs().maxCoeff() : 0.0;
    // the residual cannot be pushed below the roundoff floor of evaluating
    // A x - beq, so "on the manifold" is relative to the row magnitudes
    double eq_scale = beq_scale;
    if (m > 0) {
      std::vector<double> rm(m, 0.0);
      for (const Triplet& tr : E.eq_trip)
        rm[tr.row()] += std::abs(tr.value()) * std::abs(x[tr.col()]);
      for (int k = 0; k < m; ++k)
        eq_scale = std::max(eq_scale, 1.0 + rm[k] + std::abs(E.beq[k]));
    }
    if (0.5 * dec2 <= dec2_stop && eq_norm <= 1e-9 * eq_scale) {
      out.ok = true;
      return out;
    }
    // Roundoff in the KKT solve puts a floor under the decrement at large t;
    // once it stops shrinking and the iterate is well centered, move on.
    flat = dec2 < 0.5 * best_dec2 ? 0 : flat + 1;
    best_dec2 = std::min(best_dec2, dec2);
    if (eq_norm <= 1e-9 * eq_scale) {
      if (flat >= 10 && dec2 <= 1e-4) {
        out.ok = true;
        return out;
      }
      if (flat >= 25 && dec2 <= 0.25) {
        out.ok = true;
        out.stalled = true;
        return out;
      }
    }

    double alpha = 1.0;
    int back = 0;
    while (back < 160 && !E.domain_ok(x + alpha * dx)) {
      alpha *= 0.6;
      ++back;
    }
    if (back == 160) return out;
    if (m > 0 && eq_norm > 1e-9 * eq_scale) {
      // off-manifold: backtrack on the full KKT residual norm
      const double r0 = std::sqrt((g + E.A.transpose() * w).squaredNorm() +
                                  (t * r_eq).squaredNorm());
      const VectorXd dw = w_new - w;
      while (back < 200) {
        const VectorXd xt = x + alpha * dx;
        const VectorXd wt = w + alpha * dw;
        VectorXd gt = -t * E.c;
        E.barrier(xt, &gt, nullptr);
        const double rt =
            std::sqrt((gt + E.A.transpose() * wt).squaredNorm() +
                      (t * (E.A * xt - E.beq)).squaredNorm());
        if (rt <= (1.0 - 0.01 * alpha) * r0 + 1e-12 * r0) break;
        alpha *= 0.6;
        ++back;
      }
      w += alpha * dw;
    } else {
      const double psi0 = -t * E.c.dot(x) + E.barrier(x, nullptr, nullptr);
      while (back < 200) {
        const VectorXd xt = x + alpha * dx;
        const double psit = -t * E.c.dot(xt) + E.barrier(xt, nullptr, nullptr);
        if (psit <= psi0 - 0.01 * alpha * dec2 + 1e-9 * std::abs(psi0)) break;
        alpha *= 0.6;
        ++back;
      }
      if (m > 0) w = w_new;
    }
    x += alpha * dx;
    if (0.5 * dec2 <= dec2_stop && back >= 40) {
      // centered but the line search cannot move; further iterations are moot
      out.ok = true;
      return out;
    }
    if (x.cwiseAbs().maxCoeff() > 1e13) {
      out.blew_up = true;
      return out;
    }
  }
  out.exhausted = true;
  return out;
}

Engine build_engine(const ConicProgram& P, bool phase1) {
  Engine E;
  E.n = P.num_vars + (phase1 ? 1 : 0);
  E.lo.assign(E.n, -kInf);
  E.hi.assign(E.n, kInf);
  E.c = VectorXd::Zero(E.n);
  if (phase1) {
    E.tau = P.num_vars;
    E.lo[E.tau] = -1.0;
    E.c[E.tau] = -1.0;  // maximize -tau
  } else {
    Row obj = compact(P.objective);
    for (std::size_t i = 0; i < obj.v.size(); ++i) E.c[obj.v[i]] = obj.a[i];
  }
  for (int i = 0; i < P.num_vars; ++i) {
    if (P.lb[i] == P.ub[i]) {
      Row r;  // pinned var -> equality row
      r.v = {i};
      r.a = {1.0};
      r.b = -P.lb[i];
      E.add_eq_row(r);
      continue;
    }
    if (phase1) {
      if (P.lb[i] > -kInf) {
        Row r;
        r.v = {i, E.tau};
        r.a = {1.0, 1.0};
        r.b = -P.lb[i];
        E.srows.push_back(r);
      }
      if (P.ub[i] < kInf) {
        Row r;
        r.v = {i, E.tau};
        r.a = {-1.0, 1.0};
        r.b = P.ub[i];
        E.srows.push_back(r);
      }
    } else {
      E.lo[i] = P.lb[i];
      E.hi[i] = P.ub[i];
    }
  }
  for (const LinCon& lcon : P.lin) {
    Row r = compact(lcon.lhs);
    if (lcon.equality) {
      E.add_eq_row(r);
    } else {
      for (double& a : r.a) a = -a;  // slack = -lhs
      r.b = -r.b;
      if (phase1) {
        r.v.push_back(E.tau);
        r.a.push_back(1.0);
      }
      E.srows.push_back(r);
    }
  }
  for (const SocCon& s : P.soc) {
    SocPre pre;
    for (const Expr& e : s.norm_rows) pre.rows.push_back(compact(e));
    pre.rhs = compact(s.rhs);
    if (phase1) {
      pre.rhs.v.push_back(E.tau);
      pre.rhs.a.push_back(1.0);
    }
    E.socs.push_back(std::move(pre));
  }
  for (const PsdCon& p : P.psd) {
    PsdPre pre;
    pre.dim = p.dim;
    int k = 0;
    for (int r = 0; r < p.dim; ++r)
      for (int cc = r; cc < p.dim; ++cc) {
        Row row = compact(p.upper[k++]);
        if (phase1 && r == cc) {
          row.v.push_back(E.tau);
          row.a.push_back(1.0);
        }
        pre.entries.push_back(std::move(row));
      }
    std::vector<int> sup;
    for (const Row& row : pre.entries)
      sup.insert(sup.end(), row.v.begin(), row.v.end());
    std::sort(sup.begin(), sup.end());
    sup.erase(std::unique(sup.begin(), sup.end()), sup.end());
    pre.support = std::move(sup);
    E.psds.push_back(std::move(pre));
  }
  for (const LogCon& l : P.log) {
    LogPre pre;
    pre.rate = l.rate_var;
    pre.u = compact(l.snr);
    pre.u.b += 1.0;
    E.logs.push_back(std::move(pre));
  }
  E.finalize();
  return E;
}

// Starting point for phase 1: bounded vars at the midpoint (or offset from
// the finite side), free vars at zero, then tau large enough to cover every
// violated slack.
VectorXd phase1_start(const ConicProgram& P, const Engine& E) {
  VectorXd x = VectorXd::Zero(E.n);
  for (int i = 0; i < P.num_vars; ++i) {
    const double lo = P.lb[i], hi = P.ub[i];
    if (lo > -kInf && hi < kInf)
      x[i] = 0.5 * (lo + hi);
    else if (lo > -kInf)
      x[i] = lo + 1.0;
    else if (hi < kInf)
      x[i] = hi - 1.0;
  }
  double need = 0.0;
  for (const Row& r : E.srows) {
    const double s = r.value(x) - (r.v.empty() ? 0.0 : 0.0);
    // row already contains tau with coef 1 and x[tau]=0
    need = std::max(need, -s);
  }
  for (const SocPre& s : E.socs) {
    double u2 = 0.0;
    for (const Row& r : s.rows) {
      const double u = r.value(x);
      u2 += u * u;
    }
    need = std::max(need, std::sqrt(u2) - s.rhs.value(x));
  }
  for (const PsdPre& p : E.psds) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(E.psd_matrix(p, x));
    need = std::max(need, -es.eigenvalues().minCoeff());
  }
  x[E.tau] = need + 1.0;
  return x;
}

struct PathOutcome {
  bool ok = false;
  bool blew_up = false;
  double t_final = 1.0;
  int iters = 0;
  VectorXd w;
  std::string message;
};

PathOutcome follow_path(const Engine& E, VectorXd& x, const SolveOptions& opt,
                        const std::function<bool(const VectorXd&)>& early_stop) {
  PathOutcome out;
  Eigen::SparseLU<SpMat> lu;
  bool analyzed = false;
  double t = std::max(1e-3, opt.t_init);
  int budget = opt.max_newton;
  VectorXd x_good, w_good;
  double t_good = -1.0;
  int tries_here = 0;
  for (;;) {
    CenterOutcome co = center(E, x, t, std::min(60, budget), lu, analyzed);
    out.iters += co.iters;
    budget -= co.iters;
    out.w = co.w;
    out.t_final = t;
    if (co.blew_up) {
      out.blew_up = true;
      return out;
    }
    if (early_stop && early_stop(x)) {
      out.ok = true;
      return out;
    }
    if (co.exhausted) {
      ++tries_here;
      // a deep-t stage that cannot center in two chunks is past the KKT
      // accuracy floor; keep the last clean stage instead of burning budget
      if (t >= 1e6 && t_good > 0.0 && tries_here >= 2) {
        x = x_good;
        out.w = w_good;
        out.t_final = t_good;
        out.ok = true;
        return out;
      }
      if (budget <= 0) {
        out.message = "newton budget exhausted";
        return out;
      }
      continue;  // keep centering at the same t
    }
    tries_here = 0;
    if (!co.ok) {
      out.message = "newton centering failed at t=" + std::to_string(t);
      return out;
    }
    if (co.stalled && t >= 1e6) {
      // at deep t the KKT solve has no accuracy left; fall back to the last
      // cleanly centered stage rather than report a half-centered iterate
      if (t_good > 0.0) {
        x = x_good;
        out.w = w_good;
        out.t_final = t_good;
      }
      out.ok = true;
      return out;
    }
    // a low-t stall is just slow centering (flat directions pinned by the
    // diagonal shift); a decrement <= 0.25 is inside the Newton basin, so
    // push the ladder on instead of stopping
    if (!co.stalled) {
      x_good = x;
      w_good = co.w;
      t_good = t;
    }
    const double obj = E.c.dot(x);
    if (E.nu / t <= opt.tol * (1.0 + std::abs(obj)) || t >= opt.t_max) {
      // polish the final center to a much smaller decrement: dual extraction
      // divides the residual gradient by t, so the returned multipliers are
      // only as good as the last Newton stop
      VectorXd x_save = x;
      CenterOutcome po = center(E, x, t, 12, lu, analyzed, 1e-13);
      out.iters += po.iters;
      if (po.ok && !po.stalled) {
        out.w = po.w;
      } else {
        x = x_save;
      }
      out.ok = true;
      return out;
    }
    if (budget <= 0) {
      out.message = "newton budget exhausted";
      return out;
    }
    // never overshoot the rung that meets the gap target: deep t is the
    // worst-conditioned end of the path and every decade costs accuracy
    const double t_need = E.nu / (opt.tol * (1.0 + std::abs(obj)));
    t = std::min(std::min(t * opt.t_mult, 1.2 * t_need), opt.t_max);
  }
}

}  // namespace

SolveResult solve(const ConicProgram& prog, const SolveOptions& opt) {
  SolveResult res;
  try {
    prog.validate();
  } catch (const std::exception& e) {
    res.message = e.what();
    return res;
  }

  Engine E = build_engine(prog, false);
  // Normalize the cost so both the Newton gradients and the relative gap test
  // see a unit-scale objective; everything dual is scaled back on exit.
  const double cscale = std::max(1.0, E.c.cwiseAbs().maxCoeff());
  E.c /= cscale;
  VectorXd x;

  bool have_start = false;
  if (!opt.warm_start.empty()) {
    if ((int)opt.warm_start.size() != prog.num_vars) {
      res.message = "warm start has wrong length";
      return res;
    }
    x = Eigen::Map<const VectorXd>(opt.warm_start.data(), prog.num_vars);
    if (E.domain_ok(x) &&
        (E.meq == 0 ||
         (E.A * x - E.beq).cwiseAbs().maxCoeff() <= 1e-6)) {
      have_start = true;
    }
  }
  if (!have_start) {
    if (!prog.log.empty()) {
      res.message = "log-constrained program requires a strictly feasible warm start";
      return res;
    }
    Engine E1 = build_engine(prog, true);
    VectorXd x1 = phase1_start(prog, E1);
    SolveOptions o1 = opt;
    o1.t_init = 1.0;
    o1.tol = 1e-9;
    o1.t_max = 1e12;
    o1.max_newton = std::max(opt.max_newton, 400);
    auto stop = [&](const VectorXd& xv) { return xv[E1.tau] < -1e-7; };
    PathOutcome p1 = follow_path(E1, x1, o1, stop);
    res.newton_iters += p1.iters;
    if (!p1.ok) {
      res.message = "phase-1 failure: " + p1.message;
      return res;
    }
    if (!(x1[E1.tau] < -1e-7)) {
      res.status = SolveStatus::infeasible;
      res.message = "phase-1 optimum tau >= 0";
      return res;
    }
    x = x1.head(prog.num_vars);
    if (!E.domain_ok(x)) {
      res.message = "phase-1 point rejected by phase-2 domain";
      return res;
    }
  }

  PathOutcome p2 = follow_path(E, x, opt, nullptr);
  res.newton_iters += p2.iters;
  if (p2.blew_up) {
    res.status = SolveStatus::unbounded;
    res.message = "iterates diverged";
    return res;
  }
  if (!p2.ok) {
    res.message = p2.message;
    return res;
  }

  const double t = p2.t_final;
  res.x.assign(x.data(), x.data() + prog.num_vars);
  res.objective = cscale * E.c.dot(x) + prog.objective.constant;
  res.gap = cscale * E.nu / t;

  // Multipliers from the barrier gradient identity at the path end.
  res.lo_duals.assign(prog.num_vars, 0.0);
  res.hi_duals.assign(prog.num_vars, 0.0);
  for (int i = 0; i < prog.num_vars; ++i) {
    if (E.lo[i] > -kInf) res.lo_duals[i] = cscale / (t * (x[i] - E.lo[i]));
    if (E.hi[i] < kInf) res.hi_duals[i] = cscale / (t * (E.hi[i] - x[i]));
  }
  res.lin_duals.assign(prog.lin.size(), 0.0);
  {
    int srow_idx = 0;
    int eq_idx = 0;
    // pinned vars consumed equality slots first
    for (int i = 0; i < prog.num_vars; ++i)
      if (prog.lb[i] == prog.ub[i]) ++eq_idx;
    for (std::size_t k = 0; k < prog.lin.size(); ++k) {
      if (prog.lin[k].equality) {
        res.lin_duals[k] = p2.w.size() > eq_idx ? cscale * p2.w[eq_idx] / t : 0.0;
        ++eq_idx;
      } else {
        const double s = E.srows[srow_idx++].value(x);
        res.lin_duals[k] = cscale / (t * s);
      }
    }
  }
  for (const SocPre& s : E.socs) {
    const double v = s.rhs.value(x);
    double u2 = 0.0;
    std::vector<double> uv;
    for (const Row& r : s.rows) {
      uv.push_back(r.value(x));
      u2 += uv.back() * uv.back();
    }
    const double sl = v * v - u2;
    std::vector<double> z;
    z.push_back(cscale * 2.0 * v / (t * sl));
    for (double u : uv) z.push_back(-cscale * 2.0 * u / (t * sl));
    res.soc_duals.push_back(std::move(z));
  }
  for (const PsdPre& p : E.psds) {
    const Eigen::MatrixXd M = E.psd_matrix(p, x);
    res.psd_duals.push_back(M.inverse() * (cscale / t));
  }
  for (const LogPre& l : E.logs) {
    const double u = l.u.value(x);
    const double gl = std::log(u) - kLn2 * x[l.rate];
    res.log_duals.push_back(cscale * kLn2 / (t * gl));
  }

  const double gap_ok = opt.tol * (1.0 + std::abs(E.c.dot(x)));
  if (E.nu / t <= std::max(gap_ok, E.nu / opt.t_max * 1.000001)) {
    res.status = SolveStatus::optimal;
  } else {
    res.message = "gap target not reached";
  }
  return res;
}

double kkt_residual(const ConicProgram& prog, const SolveResult& res) {
  const int n = prog.num_vars;
  VectorXd r = VectorXd::Zero(n);
  Row obj = compact(prog.objective);
  for (std::size_t i = 0; i < obj.v.size(); ++i) r[obj.v[i]] -= obj.a[i];
  for (int i = 0; i < n; ++i) {
    if (i < (int)res.lo_duals.size()) r[i] -= res.lo_duals[i];
    if (i < (int)res.hi_duals.size()) r[i] += res.hi_duals[i];
  }
  for (std::size_t k = 0; k < prog.lin.size(); ++k) {
    Row row = compact(prog.lin[k].lhs);
    for (std::size_t i = 0; i < row.v.size(); ++i)
      r[row.v[i]] += res.lin_duals[k] * row.a[i];
  }
  for (std::size_t k = 0; k < prog.soc.size(); ++k) {
    const SocCon& s = prog.soc[k];
    const std::vector<double>& z = res.soc_duals[k];
    Row rhs = compact(s.rhs);
    for (std::size_t i = 0; i < rhs.v.size(); ++i)
      r[rhs.v[i]] -= z[0] * rhs.a[i];
    for (std::size_t q = 0; q < s.norm_rows.size(); ++q) {
      Row row = compact(s.norm_rows[q]);
      for (std::size_t i = 0; i < row.v.size(); ++i)
        r[row.v[i]] -= z[q + 1] * row.a[i];
    }
  }
  for (std::size_t k = 0; k < prog.psd.size(); ++k) {
    const PsdCon& p = prog.psd[k];
    const Eigen::MatrixXd& S = res.psd_duals[k];
    int e = 0;
    for (int rr = 0; rr < p.dim; ++rr)
      for (int cc = rr; cc < p.dim; ++cc) {
        Row row = compact(p.upper[e++]);
        const double w = (rr == cc ? 1.0 : 2.0) * S(rr, cc);
        for (std::size_t i = 0; i < row.v.size(); ++i)
          r[row.v[i]] -= w * row.a[i];
      }
  }
  for (std::size_t k = 0; k < prog.log.size(); ++k) {
    const LogCon& l = prog.log[k];
    Row snr = compact(l.snr);
    const double u = 1.0 + snr.value(Eigen::Map<const VectorXd>(
                               res.x.data(), res.x.size()));
    r[l.rate_var] += res.log_duals[k];
    for (std::size_t i = 0; i < snr.v.size(); ++i)
      r[snr.v[i]] -= res.log_duals[k] * snr.a[i] / (u * kLn2);
  }
  return r.cwiseAbs().maxCoeff();
}

}  // namespace secrel::conic
