#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

// Surrogate building blocks shared by both optimization blocks: first-order
// lower bounds used by the successive convex approximation passes, and the
// Dinkelbach update that turns the fractional objective into a sequence of
// parametric subproblems.

namespace secrel::sca {

// Affine function value = offset + coef * arg.
struct AffineBound {
  double offset = 0.0;
  double coef = 0.0;
  double at(double arg) const { return offset + coef * arg; }
};

// Tangent of w -> log2(1 + p / w) at w_star; a global lower bound since the
// map is convex in w. Rejects w_star <= 0, p < 0.
AffineBound taylor_log_lower(double p, double w_star);

// Tangent of x -> x^2 at x_star: -x_star^2 + 2 x_star x <= x^2 everywhere.
AffineBound taylor_square_lower(double x_star);

// Next Dinkelbach parameter. Rejects den <= 0.
double dinkelbach_update(double num, double den);

struct DinkelbachStep {
  double lambda = 0.0;
  double F = 0.0;       // inner optimum of num - lambda * den
  double num = 0.0;     // achieved by the inner candidate
  double den = 0.0;
};

template <typename Candidate>
struct InnerOutcome {
  double F = 0.0;
  double num = 0.0;
  double den = 0.0;
  Candidate candidate{};
};

template <typename Candidate>
struct DinkelbachRun {
  std::vector<DinkelbachStep> steps;
  Candidate best{};
  double lambda_final = 0.0;
  bool converged = false;
};

// Iterates lambda_{k+1} = num_k / den_k until |F| <= tol or max_iter.
// inner(lambda) must return the subproblem optimum and the candidate's true
// numerator/denominator. lambda is nondecreasing when the inner solver is
// exact; small solver gaps can dent that, so no assertion here (the callers
// test it with slack).
template <typename Candidate>
DinkelbachRun<Candidate> dinkelbach_loop(
    const std::function<InnerOutcome<Candidate>(double)>& inner,
    double lambda0, double tol, int max_iter) {
  if (!(tol > 0) || max_iter < 1)
    throw std::invalid_argument("dinkelbach_loop: bad tol or max_iter");
  DinkelbachRun<Candidate> run;
  double lambda = lambda0;
  for (int k = 0; k < max_iter; ++k) {
    InnerOutcome<Candidate> io = inner(lambda);
    run.steps.push_back({lambda, io.F, io.num, io.den});
    run.best = io.candidate;
    run.lambda_final = dinkelbach_update(io.num, io.den);
    if (std::abs(io.F) <= tol) {
      run.converged = true;
      return run;
    }
    lambda = run.lambda_final;
  }
  return run;
}

}  // namespace secrel::sca
