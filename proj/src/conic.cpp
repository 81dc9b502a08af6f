#include "secrel/conic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace secrel::conic {

Expr& Expr::operator+=(const Expr& o) {
  terms.insert(terms.end(), o.terms.begin(), o.terms.end());
  constant += o.constant;
  return *this;
}

Expr& Expr::operator-=(const Expr& o) {
  for (const LinTerm& t : o.terms) terms.push_back({t.var, -t.coef});
  constant -= o.constant;
  return *this;
}

Expr& Expr::operator*=(double s) {
  for (LinTerm& t : terms) t.coef *= s;
  constant *= s;
  return *this;
}

Expr operator+(Expr a, const Expr& b) { return a += b; }
Expr operator-(Expr a, const Expr& b) { return a -= b; }
Expr operator*(double s, Expr a) { return a *= s; }

int ConicProgram::add_var(const std::string& name, double lo, double hi) {
  if (!(lo <= hi))
    throw std::invalid_argument("add_var: empty bound interval for " + name);
  lb.push_back(lo);
  ub.push_back(hi);
  var_names.push_back(name);
  return num_vars++;
}

void ConicProgram::add_le(const Expr& lhs, const Expr& rhs,
                          const std::string& name) {
  lin.push_back({lhs - rhs, false, name});
}

void ConicProgram::add_eq(const Expr& lhs, const Expr& rhs,
                          const std::string& name) {
  lin.push_back({lhs - rhs, true, name});
}

void ConicProgram::add_soc(std::vector<Expr> norm_rows, Expr rhs,
                           const std::string& name) {
  soc.push_back({std::move(norm_rows), std::move(rhs), name});
}

void ConicProgram::add_rotated_soc(const Expr& u, const Expr& w1,
                                   const Expr& w2, const std::string& name) {
  add_soc({2.0 * u, w1 - w2}, w1 + w2, name);
}

void ConicProgram::add_psd(int dim, std::vector<Expr> upper,
                           const std::string& name) {
  if ((int)upper.size() != dim * (dim + 1) / 2)
    throw std::invalid_argument("add_psd: wrong triangle size for " + name);
  psd.push_back({dim, std::move(upper), name});
}

void ConicProgram::add_log(int rate_var, const Expr& snr,
                           const std::string& name) {
  log.push_back({rate_var, snr, name});
}

namespace {

void check_expr(const Expr& e, int num_vars, const std::string& where) {
  for (const LinTerm& t : e.terms) {
    if (t.var < 0 || t.var >= num_vars)
      throw std::invalid_argument("variable index out of range in " + where);
    if (!std::isfinite(t.coef))
      throw std::invalid_argument("non-finite coefficient in " + where);
  }
  if (!std::isfinite(e.constant))
    throw std::invalid_argument("non-finite constant in " + where);
}

}  // namespace

void ConicProgram::validate() const {
  if ((int)lb.size() != num_vars || (int)ub.size() != num_vars)
    throw std::invalid_argument("bound arrays out of sync");
  check_expr(objective, num_vars, "objective");
  for (const LinCon& c : lin) check_expr(c.lhs, num_vars, c.name);
  for (const SocCon& c : soc) {
    if (c.norm_rows.empty())
      throw std::invalid_argument("empty soc in " + c.name);
    for (const Expr& r : c.norm_rows) check_expr(r, num_vars, c.name);
    check_expr(c.rhs, num_vars, c.name);
  }
  for (const PsdCon& c : psd) {
    if (c.dim < 1 || (int)c.upper.size() != c.dim * (c.dim + 1) / 2)
      throw std::invalid_argument("malformed psd block in " + c.name);
    for (const Expr& e : c.upper) check_expr(e, num_vars, c.name);
  }
  for (const LogCon& c : log) {
    if (c.rate_var < 0 || c.rate_var >= num_vars)
      throw std::invalid_argument("bad rate var in " + c.name);
    check_expr(c.snr, num_vars, c.name);
  }
}

namespace {

void put_num(std::ostream& os, double v) {
  if (v == kInf)
    os << " inf";
  else if (v == -kInf)
    os << " -inf";
  else
    os << ' ' << std::hexfloat << v << std::defaultfloat;
}

double get_num(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::invalid_argument("conic parse: truncated input");
  if (tok == "inf") return kInf;
  if (tok == "-inf") return -kInf;
  std::size_t used = 0;
  double v = std::stod(tok, &used);
  if (used != tok.size())
    throw std::invalid_argument("conic parse: bad number '" + tok + "'");
  return v;
}

void put_expr(std::ostream& os, const Expr& e) {
  os << ' ' << e.terms.size();
  for (const LinTerm& t : e.terms) {
    os << ' ' << t.var;
    put_num(os, t.coef);
  }
  put_num(os, e.constant);
}

Expr get_expr(std::istream& is) {
  std::size_t k = 0;
  if (!(is >> k)) throw std::invalid_argument("conic parse: truncated expr");
  Expr e;
  e.terms.resize(k);
  for (LinTerm& t : e.terms) {
    if (!(is >> t.var)) throw std::invalid_argument("conic parse: bad term");
    t.coef = get_num(is);
  }
  e.constant = get_num(is);
  return e;
}

std::string sanitize(const std::string& s) {
  std::string out = s.empty() ? std::string("_") : s;
  std::replace(out.begin(), out.end(), ' ', '_');
  return out;
}

}  // namespace

void ConicProgram::dump(std::ostream& os) const {
  os << "conic 1\n" << "vars " << num_vars << '\n';
  for (int i = 0; i < num_vars; ++i) {
    os << "var " << i << ' ' << sanitize(var_names[i]);
    put_num(os, lb[i]);
    put_num(os, ub[i]);
    os << '\n';
  }
  os << "obj";
  put_expr(os, objective);
  os << '\n';
  for (const LinCon& c : lin) {
    os << "lin " << (c.equality ? "eq" : "le") << ' ' << sanitize(c.name);
    put_expr(os, c.lhs);
    os << '\n';
  }
  for (const SocCon& c : soc) {
    os << "soc " << sanitize(c.name) << ' ' << c.norm_rows.size();
    for (const Expr& r : c.norm_rows) put_expr(os, r);
    put_expr(os, c.rhs);
    os << '\n';
  }
  for (const PsdCon& c : psd) {
    os << "psd " << sanitize(c.name) << ' ' << c.dim;
    for (const Expr& e : c.upper) put_expr(os, e);
    os << '\n';
  }
  for (const LogCon& c : log) {
    os << "log " << sanitize(c.name) << ' ' << c.rate_var;
    put_expr(os, c.snr);
    os << '\n';
  }
  os << "end\n";
}

ConicProgram ConicProgram::parse(std::istream& is) {
  std::string tag;
  int version = 0;
  if (!(is >> tag >> version) || tag != "conic" || version != 1)
    throw std::invalid_argument("conic parse: bad header");
  ConicProgram p;
  int nv = 0;
  if (!(is >> tag >> nv) || tag != "vars")
    throw std::invalid_argument("conic parse: missing vars");
  while (is >> tag) {
    if (tag == "end") {
      if (p.num_vars != nv)
        throw std::invalid_argument("conic parse: var count mismatch");
      p.validate();
      return p;
    }
    if (tag == "var") {
      int idx;
      std::string name;
      is >> idx >> name;
      double lo = get_num(is), hi = get_num(is);
      if (idx != p.add_var(name, lo, hi))
        throw std::invalid_argument("conic parse: out-of-order var");
    } else if (tag == "obj") {
      p.objective = get_expr(is);
    } else if (tag == "lin") {
      std::string kind, name;
      is >> kind >> name;
      p.lin.push_back({get_expr(is), kind == "eq", name});
    } else if (tag == "soc") {
      std::string name;
      std::size_t k;
      is >> name >> k;
      SocCon c;
      c.name = name;
      for (std::size_t i = 0; i < k; ++i) c.norm_rows.push_back(get_expr(is));
      c.rhs = get_expr(is);
      p.soc.push_back(std::move(c));
    } else if (tag == "psd") {
      std::string name;
      int dim;
      is >> name >> dim;
      PsdCon c;
      c.name = name;
      c.dim = dim;
      for (int i = 0; i < dim * (dim + 1) / 2; ++i)
        c.upper.push_back(get_expr(is));
      p.psd.push_back(std::move(c));
    } else if (tag == "log") {
      std::string name;
      int rv;
      is >> name >> rv;
      p.log.push_back({rv, get_expr(is), name});
    } else {
      throw std::invalid_argument("conic parse: unknown tag '" + tag + "'");
    }
  }
  throw std::invalid_argument("conic parse: missing end");
}

void log_term(ConicProgram& prog, int rate_var, const Expr& snr,
              const std::string& name) {
  prog.add_log(rate_var, snr, name);
}

namespace {

double f_log(double s) { return std::log2(1.0 + s); }

// Peak of log2(1+s) above the chord through (a,f(a)) and (b,f(b)).
double chord_gap(double a, double b) {
  if (!(b > a)) return 0.0;
  const double k = (f_log(b) - f_log(a)) / (b - a);
  const double s_star = 1.0 / (k * std::numbers::ln2) - 1.0;
  if (s_star <= a || s_star >= b) return 0.0;
  return f_log(s_star) - (f_log(a) + k * (s_star - a));
}

}  // namespace

std::vector<double> log_term_pwl(ConicProgram& prog, int rate_var,
                                 const Expr& snr, double snr_max,
                                 double max_gap, const std::string& name) {
  if (!(snr_max > 0) || !(max_gap > 0))
    throw std::invalid_argument("log_term_pwl: snr_max and max_gap must be positive");
  std::vector<double> knots{0.0};
  double a = 0.0;
  while (a < snr_max) {
    // Largest next knot keeping the chord within max_gap.
    double lo = a, hi = snr_max;
    if (chord_gap(a, hi) > max_gap) {
      double step = std::max(1e-9, 0.1 * (1.0 + a));
      hi = std::min(snr_max, a + step);
      while (hi < snr_max && chord_gap(a, hi) <= max_gap) {
        step *= 2.0;
        hi = std::min(snr_max, a + step);
      }
      lo = a;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (chord_gap(a, mid) <= max_gap ? lo : hi) = mid;
      }
      hi = lo;
    }
    if (!(hi > a))
      throw std::invalid_argument("log_term_pwl: knot search stalled");
    knots.push_back(hi);
    a = hi;
  }
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double s0 = knots[i], s1 = knots[i + 1];
    const double k = (f_log(s1) - f_log(s0)) / (s1 - s0);
    // rate <= f(s0) + k (snr - s0)
    std::ostringstream nm;
    nm << name << "_pwl" << i;
    prog.add_le(Expr::var(rate_var) - k * snr,
                Expr(f_log(s0) - k * s0), nm.str());
  }
  return knots;
}

double pwl_envelope_gap(const std::vector<double>& knots) {
  double g = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    g = std::max(g, chord_gap(knots[i], knots[i + 1]));
  return g;
}

}  // namespace secrel::conic
