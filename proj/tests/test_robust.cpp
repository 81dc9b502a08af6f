#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "secrel/robust.hpp"

using namespace secrel;

TEST_CASE("worst-case adversary gain closed form") {
  ScenarioConfig cfg;
  AdversaryRegion adv{{-200.0, 0.0}, 60.0};
  // inside the disk: altitude-only distance
  CHECK(worstcase_adv_gain({-200, 0}, adv, cfg) == doctest::Approx(1e-7));
  CHECK(worstcase_adv_gain({-180, 20}, adv, cfg) == doctest::Approx(1e-7));
  // outside: distance to the disk edge
  CHECK(worstcase_adv_gain({0, 0}, adv, cfg) ==
        doctest::Approx(1e-3 / 29600.0));  // (200-60)^2 + 100^2
  CHECK(worstcase_adv_gain({100, 0}, adv, cfg) ==
        doctest::Approx(1e-3 / 67600.0));
}

TEST_CASE("worst-case gain: continuity and monotonicity") {
  ScenarioConfig cfg;
  AdversaryRegion adv{{50.0, -30.0}, 45.0};
  const Vec2 dir = Vec2(1.0, 2.0).normalized();
  const double at_edge = worstcase_adv_gain(adv.est_pos + 45.0 * dir, adv, cfg);
  const double just_out =
      worstcase_adv_gain(adv.est_pos + (45.0 + 1e-9) * dir, adv, cfg);
  CHECK(at_edge == doctest::Approx(1e-7));
  CHECK(std::abs(at_edge - just_out) < 1e-15);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-600.0, 600.0);
  std::uniform_real_distribution<double> ur(0.0, 100.0);
  for (int i = 0; i < 300; ++i) {
    const Vec2 p{u(rng), u(rng)};
    const double d = (p - adv.est_pos).norm();
    const Vec2 farther = adv.est_pos + (d + ur(rng)) *
                             (d > 0 ? ((p - adv.est_pos) / d).eval()
                                    : Vec2(1.0, 0.0));
    CHECK(worstcase_adv_gain(farther, adv, cfg) <=
          worstcase_adv_gain(p, adv, cfg) + 1e-18);
    AdversaryRegion bigger = adv;
    bigger.radius_R += ur(rng);
    CHECK(worstcase_adv_gain(p, bigger, cfg) >=
          worstcase_adv_gain(p, adv, cfg) - 1e-18);
  }
}

TEST_CASE("sampled gain never exceeds closed form, small gap") {
  ScenarioConfig cfg;
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  std::uniform_real_distribution<double> ur(1.0, 90.0);
  for (int i = 0; i < 50; ++i) {
    const Vec2 p{u(rng), u(rng)};
    AdversaryRegion adv{{u(rng), u(rng)}, ur(rng)};
    const double closed = worstcase_adv_gain(p, adv, cfg);
    const double sampled = sample_adv_gain_max(p, adv, cfg, 20000, 1234 + i);
    CHECK(sampled <= closed * (1.0 + 1e-12));
    CHECK((closed - sampled) / closed < 0.01);
  }
}

TEST_CASE("S-procedure matrix: frozen example and eps rejection") {
  ScenarioConfig cfg;
  AdversaryRegion adv{{100.0, 0.0}, 0.0};
  const Eigen::Matrix3d M = build_sproc_lmi({0, 0}, adv, 1e4, 0.0, cfg);
  CHECK(M(0, 0) == 1.0);
  CHECK(M(1, 1) == 1.0);
  CHECK(M(0, 2) == 100.0);
  CHECK(M(1, 2) == 0.0);
  CHECK(M(2, 2) == doctest::Approx(1e4));
  // Schur complement 1e4 - 100^2 = 0: on the PSD boundary
  CHECK(is_psd(M, cfg.tol.psd));
  // one meter^2 over the floor: already (weakly) negative
  CHECK(min_eigenvalue(build_sproc_lmi({0, 0}, adv, 1e4 + 1.0, 0.0, cfg)) <
        0.0);
  const Eigen::Matrix3d M2 =
      build_sproc_lmi({0, 0}, adv, 1e4 + 200.0, 0.0, cfg);
  CHECK_FALSE(is_psd(M2, cfg.tol.psd));
  CHECK_THROWS_AS(build_sproc_lmi({0, 0}, adv, 1.0, -0.1, cfg),
                  std::invalid_argument);
}

TEST_CASE("S-procedure soundness against disk sampling") {
  ScenarioConfig cfg;
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(-500.0, 500.0);
  std::uniform_real_distribution<double> ur(0.0, 100.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int psd_count = 0;
  for (int i = 0; i < 300; ++i) {
    const Vec2 p{u(rng), u(rng)};
    AdversaryRegion adv{{u(rng), u(rng)}, ur(rng)};
    const double d = (p - adv.est_pos).norm();
    const double reach = std::max(0.0, d - adv.radius_R);
    const double H2 = cfg.altitude_H * cfg.altitude_H;
    const double z_true = reach * reach + H2;
    // straddle the boundary so both verdicts appear
    const double z = z_true * (0.7 + 0.6 * u01(rng));
    const double eps = 3.0 * u01(rng);
    const Eigen::Matrix3d M = build_sproc_lmi(p, adv, z, eps, cfg);
    if (is_psd(M, cfg.tol.psd)) {
      ++psd_count;
      const SprocCertificate cert = certify_sproc(p, adv, z, cfg, 1000, 7 * i);
      CHECK(cert.ok);
      CHECK(cert.violations == 0);
    }
  }
  CHECK(psd_count > 30);  // the straddle must actually produce PSD cases
}

TEST_CASE("certificate rejects an over-claimed floor") {
  ScenarioConfig cfg;
  AdversaryRegion adv{{0.0, 0.0}, 50.0};
  const Vec2 p{200.0, 0.0};
  const double z_true = 150.0 * 150.0 + 1e4;
  const SprocCertificate good = certify_sproc(p, adv, z_true - 1.0, cfg, 2000, 1);
  CHECK(good.ok);
  const SprocCertificate bad = certify_sproc(p, adv, z_true + 100.0, cfg, 2000, 1);
  CHECK_FALSE(bad.ok);
  CHECK(bad.violations > 0);
  CHECK(bad.worst_margin < 0.0);
}
