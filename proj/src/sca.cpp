#include "secrel/sca.hpp"

#include <cmath>
#include <numbers>

namespace secrel::sca {

AffineBound taylor_log_lower(double p, double w_star) {
  if (!(w_star > 0))
    throw std::invalid_argument("taylor_log_lower: w_star must be positive");
  if (p < 0)
    throw std::invalid_argument("taylor_log_lower: p must be nonnegative");
  AffineBound b;
  const double f0 = std::log2(1.0 + p / w_star);
  b.coef = -p / (w_star * (w_star + p) * std::numbers::ln2);
  b.offset = f0 - b.coef * w_star;
  return b;
}

AffineBound taylor_square_lower(double x_star) {
  return {-x_star * x_star, 2.0 * x_star};
}

double dinkelbach_update(double num, double den) {
  if (!(den > 0))
    throw std::invalid_argument("dinkelbach_update: denominator must be positive");
  return num / den;
}

}  // namespace secrel::sca
