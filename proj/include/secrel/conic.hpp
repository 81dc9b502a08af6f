#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

// Structured convex program container shared by both optimization blocks:
// linear objective, variable bounds, linear equality/inequality rows,
// second-order cones, small PSD blocks, and exact log-rate constraints
// r <= log2(1 + s(x)) with affine s. Business logic stays out of here; the
// builders in power_speed/traj_accel fill one of these and hand it to
// solve().

namespace secrel::conic {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinTerm {
  int var = -1;
  double coef = 0.0;
};

// Affine expression sum_i coef_i * x_{var_i} + constant.
struct Expr {
  std::vector<LinTerm> terms;
  double constant = 0.0;

  Expr() = default;
  Expr(double c) : constant(c) {}  // NOLINT: implicit by design
  static Expr var(int v, double coef = 1.0) {
    Expr e;
    e.terms.push_back({v, coef});
    return e;
  }
  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr& operator*=(double s);
};
Expr operator+(Expr a, const Expr& b);
Expr operator-(Expr a, const Expr& b);
Expr operator*(double s, Expr a);

struct LinCon {
  Expr lhs;        // lhs <= 0 or lhs == 0
  bool equality = false;
  std::string name;
};

struct SocCon {
  std::vector<Expr> norm_rows;  // ||rows|| <= rhs
  Expr rhs;
  std::string name;
};

struct PsdCon {
  int dim = 0;
  std::vector<Expr> upper;  // row-major upper triangle, dim*(dim+1)/2 entries
  std::string name;
};

struct LogCon {
  int rate_var = -1;  // rate <= log2(1 + snr), snr affine and >= 0
  Expr snr;
  std::string name;
};

struct ConicProgram {
  int num_vars = 0;
  std::vector<double> lb, ub;
  std::vector<std::string> var_names;
  Expr objective;  // maximized
  std::vector<LinCon> lin;
  std::vector<SocCon> soc;
  std::vector<PsdCon> psd;
  std::vector<LogCon> log;

  int add_var(const std::string& name, double lo = -kInf, double hi = kInf);
  void add_le(const Expr& lhs, const Expr& rhs, const std::string& name);
  void add_eq(const Expr& lhs, const Expr& rhs, const std::string& name);
  void add_soc(std::vector<Expr> norm_rows, Expr rhs, const std::string& name);
  // u^2 <= w1 * w2 with w1, w2 >= 0, as ||(2u, w1-w2)|| <= w1+w2.
  void add_rotated_soc(const Expr& u, const Expr& w1, const Expr& w2,
                       const std::string& name);
  void add_psd(int dim, std::vector<Expr> upper, const std::string& name);
  void add_log(int rate_var, const Expr& snr, const std::string& name);

  // Structural checks (index ranges, bound sanity). Throws on violation.
  void validate() const;

  // Text serialization; hexfloat payload so parse(dump(p)) is bitwise
  // faithful.
  void dump(std::ostream& os) const;
  static ConicProgram parse(std::istream& is);
};

// Exact log-rate constraint. Uses the solver's native log support.
void log_term(ConicProgram& prog, int rate_var, const Expr& snr,
              const std::string& name);

// Piecewise-linear alternative: chords of log2(1+s) over [0, snr_max]
// sampled densely enough that the envelope stays within max_gap bits of
// the true curve. Returns the knot list actually used.
std::vector<double> log_term_pwl(ConicProgram& prog, int rate_var,
                                 const Expr& snr, double snr_max,
                                 double max_gap, const std::string& name);

// Largest gap between log2(1+s) and the chord envelope induced by knots.
double pwl_envelope_gap(const std::vector<double>& knots);

}  // namespace secrel::conic
