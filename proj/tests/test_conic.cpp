#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <sstream>

#include "secrel/conic.hpp"
#include "secrel/solve.hpp"

using namespace secrel::conic;

namespace {

double envelope_at(const std::vector<double>& knots, double s) {
  double best = 1e300;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double a = knots[i], b = knots[i + 1];
    const double fa = std::log2(1.0 + a), fb = std::log2(1.0 + b);
    const double k = (fb - fa) / (b - a);
    best = std::min(best, fa + k * (s - a));
  }
  return best;
}

}  // namespace

TEST_CASE("expression algebra") {
  Expr e = 2.0 * Expr::var(0) + Expr::var(1, -1.0) + Expr(3.0);
  e -= Expr::var(0);
  REQUIRE(e.terms.size() == 3);
  CHECK(e.constant == 3.0);
}

TEST_CASE("LP with bounds: optimum, duals, kkt residual") {
  ConicProgram p;
  const int x = p.add_var("x", 0.0, 4.0);
  const int y = p.add_var("y", 0.0, 4.0);
  p.objective = Expr::var(x) + 2.0 * Expr::var(y);
  p.add_le(Expr::var(x) + Expr::var(y), Expr(5.0), "cap");

  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(r.x[y] == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(r.x[x] == doctest::Approx(1.0).epsilon(1e-4));
  // cap dual = 1 (marginal value of one more unit through x)
  CHECK(r.lin_duals[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.hi_duals[y] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(kkt_residual(p, r) < 1e-5);
}

TEST_CASE("LP equality and pinned variables") {
  ConicProgram p;
  const int x = p.add_var("x", 0.0, 10.0);
  const int y = p.add_var("y", 0.0, 10.0);
  const int z = p.add_var("z", 3.0, 3.0);  // pinned via equal bounds
  p.objective = Expr::var(x);
  p.add_eq(Expr::var(x) + Expr::var(y) + Expr::var(z), Expr(7.0), "sum");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x[z] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.objective == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(r.x[y] == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("infeasible and unbounded detection") {
  {
    ConicProgram p;
    const int x = p.add_var("x", 0.0, 1.0);
    p.objective = Expr::var(x);
    p.add_le(Expr(2.0), Expr::var(x), "x>=2");
    CHECK(solve(p).status == SolveStatus::infeasible);
  }
  {
    ConicProgram p;
    const int x = p.add_var("x", 0.0, kInf);
    p.objective = Expr::var(x);
    CHECK(solve(p).status == SolveStatus::unbounded);
  }
}

TEST_CASE("second-order cone toy") {
  ConicProgram p;
  const int x = p.add_var("x");
  const int y = p.add_var("y");
  p.objective = Expr::var(x) + Expr::var(y);
  p.add_soc({Expr::var(x), Expr::var(y)}, Expr(1.0), "ball");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(r.x[x] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-4));
  // dual cone membership
  REQUIRE(r.soc_duals.size() == 1);
  const auto& z = r.soc_duals[0];
  CHECK(z[0] + 1e-9 >=
        std::sqrt(z[1] * z[1] + z[2] * z[2]));
  CHECK(kkt_residual(p, r) < 1e-5);
}

TEST_CASE("rotated cone: geometric mean") {
  ConicProgram p;
  const int u = p.add_var("u", 0.0, kInf);
  const int w1 = p.add_var("w1", 0.0, 2.0);
  const int w2 = p.add_var("w2", 0.0, 8.0);
  p.objective = Expr::var(u);
  p.add_rotated_soc(Expr::var(u), Expr::var(w1), Expr::var(w2), "gm");
  const SolveResult r = solve(p);
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.objective == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("psd blocks") {
  {
    // minimize t with [[x,1],[1,t]] PSD, x <= 4  ->  t = 1/4
    ConicProgram p;
    const int x = p.add_var("x", 0.0, 4.0);
    const int t = p.add_var("t", 0.0, kInf);
    p.objective = -1.0 * Expr::var(t);
    p.add_psd(2, {Expr::var(x), Expr(1.0), Expr::var(t)}, "m");
    const SolveResult r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.objective == doctest::Approx(-0.25).epsilon(1e-5));
    // dual PSD block is PSD
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r.psd_duals[0]);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
  }
  {
    // minimize x with diag(x, x, x-1) PSD  ->  x = 1
    ConicProgram p;
    const int x = p.add_var("x");
    p.objective = -1.0 * Expr::var(x);
    p.add_psd(3,
              {Expr::var(x), Expr(0.0), Expr(0.0), Expr::var(x), Expr(0.0),
               Expr::var(x) - Expr(1.0)},
              "d");
    const SolveResult r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[x] == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("native log constraint with warm start") {
  ConicProgram p;
  const int r = p.add_var("r", -10.0, kInf);
  const int x = p.add_var("x", 0.0, 3.0);
  p.objective = Expr::var(r);
  log_term(p, r, Expr::var(x), "rate");
  SolveOptions opt;
  opt.warm_start = {0.5, 1.0};
  const SolveResult res = solve(p, opt);
  REQUIRE(res.status == SolveStatus::optimal);
  CHECK(res.objective == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res.x[x] == doctest::Approx(3.0).epsilon(1e-4));
  REQUIRE(res.log_duals.size() == 1);
  CHECK(res.log_duals[0] == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(kkt_residual(p, res) < 1e-4);

  // no warm start -> explicit failure, never silent
  const SolveResult bare = solve(p);
  CHECK(bare.status == SolveStatus::numerical_failure);
  CHECK(!bare.message.empty());
}

TEST_CASE("two-channel water filling against closed form") {
  // max r1+r2, r_i <= log2(1+g_i p_i), p1+p2 <= 8; g = 1, 1/4.
  // Interior water level: p1 = 5.5, p2 = 2.5.
  ConicProgram p;
  const int p1 = p.add_var("p1", 0.0, kInf);
  const int p2 = p.add_var("p2", 0.0, kInf);
  const int r1 = p.add_var("r1", -10.0, kInf);
  const int r2 = p.add_var("r2", -10.0, kInf);
  p.objective = Expr::var(r1) + Expr::var(r2);
  log_term(p, r1, Expr::var(p1), "c1");
  log_term(p, r2, 0.25 * Expr::var(p2), "c2");
  p.add_le(Expr::var(p1) + Expr::var(p2), Expr(8.0), "budget");
  SolveOptions opt;
  opt.warm_start = {1.0, 1.0, 0.5, 0.1};
  const SolveResult res = solve(p, opt);
  REQUIRE(res.status == SolveStatus::optimal);
  CHECK(res.x[p1] == doctest::Approx(5.5).epsilon(1e-4));
  CHECK(res.x[p2] == doctest::Approx(2.5).epsilon(1e-4));
  CHECK(res.objective ==
        doctest::Approx(std::log2(6.5) + std::log2(1.625)).epsilon(1e-7));
}

TEST_CASE("dump/parse round trip preserves the solve bitwise") {
  ConicProgram p;
  const int x = p.add_var("x", 0.0, 4.0);
  const int y = p.add_var("y", -kInf, kInf);
  const int u = p.add_var("u", 0.0, 5.0);
  p.objective = Expr::var(x) + 0.3 * Expr::var(y) + Expr::var(u);
  p.add_le(Expr::var(x) + 0.7 * Expr::var(y), Expr(3.3), "l1");
  p.add_eq(Expr::var(y) - 0.1 * Expr::var(x), Expr(0.25), "e1");
  p.add_soc({Expr::var(x) - Expr::var(y)}, Expr::var(u) + Expr(2.0), "s1");
  p.add_psd(2, {Expr::var(x) + Expr(1.0), Expr(0.5), Expr::var(u) + Expr(1.0)},
            "m1");

  std::ostringstream os1;
  p.dump(os1);
  std::istringstream is(os1.str());
  const ConicProgram q = ConicProgram::parse(is);
  std::ostringstream os2;
  q.dump(os2);
  CHECK(os1.str() == os2.str());

  const SolveResult a = solve(p);
  const SolveResult b = solve(q);
  REQUIRE(a.status == SolveStatus::optimal);
  REQUIRE(b.status == SolveStatus::optimal);
  REQUIRE(a.x.size() == b.x.size());
  for (std::size_t i = 0; i < a.x.size(); ++i) CHECK(a.x[i] == b.x[i]);
}

TEST_CASE("random solvable LPs: dual feasibility and complementarity") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int it = 0; it < 50; ++it) {
    const int n = 2 + (int)(std::abs(u(rng)) * 6);
    ConicProgram p;
    for (int i = 0; i < n; ++i)
      p.add_var("v", 0.0, 1.0 + std::abs(u(rng)));
    for (int i = 0; i < n; ++i) p.objective += u(rng) * Expr::var(i);
    const int m = 1 + it % 3;
    for (int k = 0; k < m; ++k) {
      Expr row;
      for (int i = 0; i < n; ++i) row += u(rng) * Expr::var(i);
      // keep the box center feasible with margin
      double at_center = row.constant;
      for (const LinTerm& t : row.terms)
        at_center += t.coef * 0.5 * p.ub[t.var];
      p.add_le(row, Expr(at_center + 0.3), "r");
    }
    const SolveResult r = solve(p);
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(kkt_residual(p, r) < 1e-4);
    for (std::size_t k = 0; k < p.lin.size(); ++k) {
      CHECK(r.lin_duals[k] >= -1e-9);
      double slack = -p.lin[k].lhs.constant;
      for (const LinTerm& t : p.lin[k].lhs.terms)
        slack -= t.coef * r.x[t.var];
      CHECK(r.lin_duals[k] * slack >= -1e-6);
      CHECK(r.lin_duals[k] * slack <= 1e-4 * (1.0 + std::abs(r.objective)));
    }
  }
}

TEST_CASE("piecewise-linear log envelope: certified gap, global bound") {
  ConicProgram p;
  const int r = p.add_var("r", -10.0, kInf);
  const int x = p.add_var("x", 0.0, 1e6);
  p.objective = Expr::var(r);
  const std::vector<double> knots =
      log_term_pwl(p, r, Expr::var(x), 1e6, 1e-4, "env");
  CHECK(knots.front() == 0.0);
  CHECK(knots.back() == doctest::Approx(1e6));
  CHECK(pwl_envelope_gap(knots) <= 1e-4 + 1e-12);

  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double s = std::pow(10.0, 6.0 * u01(rng)) - 1.0 + 1e-9 * u01(rng);
    if (s < 0 || s > 1e6) continue;
    const double env = envelope_at(knots, s);
    const double f = std::log2(1.0 + s);
    CHECK(env <= f + 1e-10);
    CHECK(f - env <= 1e-4 + 1e-10);
  }
}

TEST_CASE("native log and pwl encodings agree") {
  const double cap = 10.0;
  double native_obj, pwl_obj;
  {
    ConicProgram p;
    const int r = p.add_var("r", -10.0, kInf);
    const int x = p.add_var("x", 0.0, cap);
    p.objective = Expr::var(r);
    log_term(p, r, Expr::var(x), "n");
    SolveOptions opt;
    opt.warm_start = {0.1, 1.0};
    const SolveResult res = solve(p, opt);
    REQUIRE(res.status == SolveStatus::optimal);
    native_obj = res.objective;
  }
  {
    ConicProgram p;
    const int r = p.add_var("r", -10.0, kInf);
    const int x = p.add_var("x", 0.0, cap);
    p.objective = Expr::var(r);
    log_term_pwl(p, r, Expr::var(x), cap, 1e-4, "e");
    const SolveResult res = solve(p);
    REQUIRE(res.status == SolveStatus::optimal);
    pwl_obj = res.objective;
  }
  CHECK(native_obj == doctest::Approx(std::log2(11.0)).epsilon(1e-6));
  CHECK(pwl_obj <= native_obj + 1e-8);
  CHECK(native_obj - pwl_obj <= 2e-4);
}
