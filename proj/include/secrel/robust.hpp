#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "secrel/scenario.hpp"

// Worst-case treatment of disk-bounded adversary positions: closed-form
// worst-case channel gain, the S-procedure certificate matrix used by the
// trajectory block, and sampling cross-checks for both.

namespace secrel {

// Largest channel gain any point of the uncertainty disk can see:
//   d <= R          -> beta0 / H^2
//   d  > R          -> beta0 / ((d - R)^2 + H^2)
// where d = ||uav_pos - est_pos||. Continuous at d == R.
double worstcase_adv_gain(const Vec2& uav_pos, const AdversaryRegion& adv,
                          const ScenarioConfig& cfg);

// Max gain over n_samples quasi-uniform disk points (center, boundary ring,
// sunflower interior). Deterministic for a given seed; never exceeds the
// closed form above.
double sample_adv_gain_max(const Vec2& uav_pos, const AdversaryRegion& adv,
                           const ScenarioConfig& cfg, int n_samples,
                           std::uint64_t seed);

// S-procedure matrix for "every disk point keeps squared link distance
// >= z":
//   [ eps+1    0      xe-x ]
//   [ 0      eps+1    ye-y ]
//   [ xe-x   ye-y     m    ],  m = ||p - pe||^2 + H^2 - z - R^2 eps.
// PSD of this matrix certifies the claim for the whole disk. Rejects
// eps < 0.
Eigen::Matrix3d build_sproc_lmi(const Vec2& uav_pos,
                                const AdversaryRegion& adv, double z,
                                double eps, const ScenarioConfig& cfg);

struct SprocCertificate {
  bool ok = false;
  int violations = 0;
  double worst_margin = 0.0;  // min over samples of dist^2 + H^2 - z
};

// Samples n_samples disk points and checks dist^2 + H^2 >= z - psd_tol
// at each. Used to cross-check PSD verdicts of build_sproc_lmi.
SprocCertificate certify_sproc(const Vec2& uav_pos,
                               const AdversaryRegion& adv, double z,
                               const ScenarioConfig& cfg, int n_samples,
                               std::uint64_t seed);

// Smallest eigenvalue (symmetric part). Helper for PSD checks.
double min_eigenvalue(const Eigen::Matrix3d& M);

// min_eigenvalue(M) >= -tol * max(1, |trace(M)|)
bool is_psd(const Eigen::Matrix3d& M, double tol);

}  // namespace secrel
