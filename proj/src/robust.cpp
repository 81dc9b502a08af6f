#include "secrel/robust.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace secrel {

namespace {

// Center + boundary ring + sunflower interior; same layout drives both the
// gain oracle and the PSD cross-check so their verdicts are comparable.
template <typename Fn>
void for_each_disk_point(const AdversaryRegion& adv, int n_samples,
                         std::uint64_t seed, Fn&& fn) {
  if (n_samples < 1)
    throw std::invalid_argument("disk sampling needs n_samples >= 1");
  const double rot =
      2.0 * std::numbers::pi *
      (double)(seed % 1000003ull) / 1000003.0;  // seed-derived phase
  fn(adv.est_pos);
  if (n_samples == 1 || adv.radius_R <= 0) return;

  const int ring = std::max(8, (int)std::ceil(std::sqrt((double)n_samples)));
  const int n_ring = std::min(ring, n_samples - 1);
  for (int i = 0; i < n_ring; ++i) {
    const double th = rot + 2.0 * std::numbers::pi * i / n_ring;
    fn(Vec2(adv.est_pos.x() + adv.radius_R * std::cos(th),
            adv.est_pos.y() + adv.radius_R * std::sin(th)));
  }
  const int n_in = n_samples - 1 - n_ring;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n_in; ++i) {
    const double r = adv.radius_R * std::sqrt((i + 0.5) / n_in);
    const double th = rot + golden * i;
    fn(Vec2(adv.est_pos.x() + r * std::cos(th),
            adv.est_pos.y() + r * std::sin(th)));
  }
}

}  // namespace

double worstcase_adv_gain(const Vec2& uav_pos, const AdversaryRegion& adv,
                          const ScenarioConfig& cfg) {
  const double d = (uav_pos - adv.est_pos).norm();
  const double reach = std::max(0.0, d - adv.radius_R);
  const double H2 = cfg.altitude_H * cfg.altitude_H;
  return cfg.beta0 / (reach * reach + H2);
}

double sample_adv_gain_max(const Vec2& uav_pos, const AdversaryRegion& adv,
                           const ScenarioConfig& cfg, int n_samples,
                           std::uint64_t seed) {
  const double H2 = cfg.altitude_H * cfg.altitude_H;
  double best = 0.0;
  for_each_disk_point(adv, n_samples, seed, [&](const Vec2& p) {
    const double d2 = (uav_pos - p).squaredNorm();
    best = std::max(best, cfg.beta0 / (d2 + H2));
  });
  return best;
}

Eigen::Matrix3d build_sproc_lmi(const Vec2& uav_pos,
                                const AdversaryRegion& adv, double z,
                                double eps, const ScenarioConfig& cfg) {
  if (eps < 0)
    throw std::invalid_argument("build_sproc_lmi: eps must be nonnegative");
  const double dx = adv.est_pos.x() - uav_pos.x();
  const double dy = adv.est_pos.y() - uav_pos.y();
  const double H2 = cfg.altitude_H * cfg.altitude_H;
  const double m = dx * dx + dy * dy + H2 - z - adv.radius_R * adv.radius_R * eps;
  Eigen::Matrix3d M;
  M << eps + 1.0, 0.0, dx,
       0.0, eps + 1.0, dy,
       dx, dy, m;
  return M;
}

SprocCertificate certify_sproc(const Vec2& uav_pos,
                               const AdversaryRegion& adv, double z,
                               const ScenarioConfig& cfg, int n_samples,
                               std::uint64_t seed) {
  const double H2 = cfg.altitude_H * cfg.altitude_H;
  const double slack = cfg.tol.psd * std::max(1.0, std::abs(z));
  SprocCertificate cert;
  cert.worst_margin = std::numeric_limits<double>::infinity();
  for_each_disk_point(adv, n_samples, seed, [&](const Vec2& p) {
    const double margin = (uav_pos - p).squaredNorm() + H2 - z;
    cert.worst_margin = std::min(cert.worst_margin, margin);
    if (margin < -slack) ++cert.violations;
  });
  cert.ok = cert.violations == 0;
  return cert;
}

double min_eigenvalue(const Eigen::Matrix3d& M) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(
      0.5 * (M + M.transpose()));
  return es.eigenvalues().minCoeff();
}

bool is_psd(const Eigen::Matrix3d& M, double tol) {
  return min_eigenvalue(M) >= -tol * std::max(1.0, std::abs(M.trace()));
}

}  // namespace secrel
