#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "lyascreen/hfun.hpp"
#include "oracles.hpp"

using namespace lyascreen;

namespace {

ScalarField field(const char* src, int n) {
  return ScalarField(Expression::parse(src, n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

void expect_class_consistent(const ScalarField& f, std::span<const double> d, const HValue& h,
                             const RayConfig& cfg) {
  if (!h.finite()) return;
  const double k = f.expression().directional_derivatives(f.equilibrium(), d, h.gamma).value;
  const double tol = cfg.curvature_tol * (1.0 + std::abs(k));
  switch (h.root_class) {
    case RootClass::StrictLocalMax: EXPECT_LT(h.curvature, -tol); break;
    case RootClass::Valley: EXPECT_GT(h.curvature, tol); break;
    case RootClass::Inflection: EXPECT_LE(std::abs(h.curvature), tol); break;
  }
}

}  // namespace

TEST(ScalarField, WarnsOnGradientAtEquilibriumAndAbs) {
  EXPECT_TRUE(field("x1^2", 1).warnings().empty());
  EXPECT_EQ(field("x1^2 + x1", 1).warnings().size(), 1u);
  EXPECT_EQ(field("abs(x1)^3", 1).warnings().size(), 1u);
  EXPECT_THROW(ScalarField(Expression::parse("x1", 1), {0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(ScalarField(Expression::parse("ln(x1)", 1), {0.0}), EvalDomainError);
}

TEST(RayConfig, Validation) {
  RayConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.step(), 1e-2);
  EXPECT_NO_THROW(cfg.validate());
  cfg.delta_gamma = 1e-7;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = RayConfig{};
  cfg.gamma_max = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(HOf, ScalarSexticBothDirections) {
  const auto f = field(oracle::scalar_sextic, 1);
  for (double s : {1.0, -1.0}) {
    const double d[] = {s};
    const HValue h = h_of(f, d, RayConfig{});
    ASSERT_TRUE(h.finite());
    EXPECT_NEAR(h.gamma, 2.0, 1e-8);
    EXPECT_EQ(h.root_class, RootClass::StrictLocalMax);
    EXPECT_NEAR(h.curvature, -40.0, 1e-6);
  }
}

TEST(HOf, EllipseIsInfinite) {
  const auto f = field("x1^2/1 + x2^2/4", 2);
  for (double t = 0.0; t < 6.3; t += 0.7) {
    const double d[] = {std::cos(t), std::sin(t)};
    const HValue h = h_of(f, d, RayConfig{});
    EXPECT_EQ(h.kind, HValue::Kind::InfiniteTruncated);
    EXPECT_EQ(h.gamma, 1e3);
  }
}

TEST(HOf, InflectionQuarticTouchesAtOne) {
  const auto f = field(oracle::inflection_quartic, 1);
  const double d[] = {1.0};
  RayConfig cfg;
  const HValue h = h_of(f, d, cfg);
  ASSERT_TRUE(h.finite());
  EXPECT_NEAR(h.gamma, 1.0, 1e-6);
  EXPECT_EQ(h.root_class, RootClass::Inflection);

  // Dense sampling at 1e-5 confirms k' >= 0 with its only zero near 1.
  const auto a = std::vector<double>{0.0, 0.0, 0.5, -2.0 / 3.0, 0.25};
  double lowest = 1.0, where = 0.0;
  for (double g = 0.5; g < 1.5; g += 1e-5) {
    const double kp = oracle::horner_derivative(a, g);
    EXPECT_GE(kp, -1e-15);
    if (kp < lowest) {
      lowest = kp;
      where = g;
    }
  }
  EXPECT_NEAR(where, h.gamma, 1e-5);
}

TEST(HOf, OtherDirectionOfQuarticIsInfinite) {
  const auto f = field(oracle::inflection_quartic, 1);
  const double d[] = {-1.0};
  EXPECT_EQ(h_of(f, d, RayConfig{}).kind, HValue::Kind::InfiniteTruncated);
}

TEST(HOf, SaddleIsNotIncreasing) {
  const auto f = field("x1^2 - x2^2", 2);
  const double d[] = {0.0, 1.0};
  const HValue h = h_of(f, d, RayConfig{});
  EXPECT_EQ(h.kind, HValue::Kind::NotIncreasingAtOrigin);
  EXPECT_TRUE(h.value_drop);
  EXPECT_LT(h.rise, 0.0);
}

TEST(HOf, FirstOfSeveralRoots) {
  // k' = g - 3g^2 + g^3 has roots (3 -+ sqrt 5)/2; only the first counts.
  const auto f = field("x1^2/2 - x1^3 + x1^4/4", 1);
  const double d[] = {1.0};
  const HValue h = h_of(f, d, RayConfig{});
  ASSERT_TRUE(h.finite());
  EXPECT_NEAR(h.gamma, (3.0 - std::sqrt(5.0)) / 2.0, 1e-9);
  EXPECT_EQ(h.root_class, RootClass::StrictLocalMax);
}

TEST(HOf, ClassifyRootThresholds) {
  RayConfig cfg;
  EXPECT_EQ(classify_root(-1e-3, 0.0, cfg), RootClass::StrictLocalMax);
  EXPECT_EQ(classify_root(1e-3, 0.0, cfg), RootClass::Valley);
  EXPECT_EQ(classify_root(5e-9, 0.0, cfg), RootClass::Inflection);
  EXPECT_EQ(classify_root(-5e-8, 10.0, cfg), RootClass::Inflection);
}

TEST(HOf, EvalDomainErrorCarriesGamma) {
  // k' = 2g + 1/(3 - g) stays positive until ln leaves its domain at g = 3.
  const auto f = field("x1^2 - ln(3 - x1)", 1);
  const double d[] = {1.0};
  RayConfig cfg;
  cfg.gamma_max = 10;
  try {
    h_of(f, d, cfg);
    FAIL() << "expected EvalDomainError";
  } catch (const EvalDomainError& e) {
    EXPECT_NE(std::string(e.what()).find("gamma="), std::string::npos);
  }
}

TEST(HOf, Preconditions) {
  const auto f = field("x1^2 + x2^2", 2);
  const double bad[] = {1.0, 1.0};
  EXPECT_THROW(h_of(f, bad, RayConfig{}), std::invalid_argument);
  const double wrong_size[] = {1.0};
  EXPECT_THROW(h_of(f, wrong_size, RayConfig{}), std::invalid_argument);
}

TEST(HOf, ReachTruncates) {
  const auto f = field(oracle::scalar_sextic, 1);
  const double d[] = {1.0};
  const HValue h = h_of(f, d, RayConfig{}, 1.5);
  EXPECT_EQ(h.kind, HValue::Kind::InfiniteTruncated);
  EXPECT_DOUBLE_EQ(h.gamma, 1.5);
  EXPECT_TRUE(h_of(f, d, RayConfig{}, 3.0).finite());
}

TEST(ZOf, Examples) {
  const auto f2 = field("x1^2 + x2^2", 2);
  const double e1[] = {1.0, 0.0};
  EXPECT_EQ(z_of(f2, e1, HValue::make_finite(2.0, RootClass::StrictLocalMax, -1, 0)),
            (std::vector<double>{2.0, 0.0}));
  const ScalarField shifted(Expression::parse("(x1-1)^2 + (x2-1)^2", 2), {1.0, 1.0});
  const double up[] = {0.0, 1.0};
  EXPECT_EQ(z_of(shifted, up, HValue::make_finite(3.0, RootClass::StrictLocalMax, -1, 0)),
            (std::vector<double>{1.0, 4.0}));
  const auto f1 = field(oracle::scalar_sextic, 1);
  const double m[] = {-1.0};
  EXPECT_EQ(z_of(f1, m, HValue::make_finite(2.0, RootClass::StrictLocalMax, -1, 0)),
            (std::vector<double>{-2.0}));
  EXPECT_THROW(z_of(f1, m, HValue::make_infinite(1e3, 0)), std::invalid_argument);
}

TEST(RayProfile, SexticRows) {
  const auto f = field(oracle::scalar_sextic, 1);
  const double d[] = {1.0};
  RayConfig cfg;
  cfg.gamma_max = 4;
  const auto rows = ray_profile(f, d, cfg, 5);
  ASSERT_EQ(rows.size(), 5u);
  const double expected[] = {0, 24, 0, 0, 4 * 4 * 4 * 16 - 13 * 64 + 144};
  for (int j = 0; j < 5; ++j) {
    EXPECT_DOUBLE_EQ(rows[static_cast<std::size_t>(j)].gamma, j);
    EXPECT_NEAR(rows[static_cast<std::size_t>(j)].kprime, oracle::sextic_prime(j), 1e-9);
    EXPECT_NEAR(rows[static_cast<std::size_t>(j)].kprime, expected[j], 1e-9);
  }
}

TEST(RayProfile, EndpointsAndErrors) {
  const auto f = field("x1^2 + 1/(1 - x1)", 1);
  const double d[] = {1.0};
  RayConfig cfg;
  cfg.gamma_max = 2;
  const auto two = ray_profile(f, d, cfg, 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].gamma, 0.0);
  EXPECT_EQ(two[1].gamma, 2.0);
  const auto rows = ray_profile(f, d, cfg, 3);
  EXPECT_TRUE(rows[0].ok);
  EXPECT_FALSE(rows[1].ok);  // pole at gamma = 1
  EXPECT_TRUE(rows[2].ok);
  EXPECT_THROW(ray_profile(f, d, cfg, 1), std::invalid_argument);

  const auto q = field("x1^2", 1);
  for (const auto& r : ray_profile(q, d, RayConfig{}, 50)) {
    if (r.gamma > 0) EXPECT_GT(r.kprime, 0.0);
  }
}

TEST(HProperty, MinimalityFromScanRecord) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  RayConfig cfg;
  cfg.gamma_max = 10;
  int finite = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const auto p = oracle::random_candidate(rng, n);
    const ScalarField f(Expression::parse(p.to_string(), n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    std::vector<double> d(static_cast<std::size_t>(n));
    double s = 0.0;
    for (auto& v : d) {
      v = normal(rng);
      s += v * v;
    }
    for (auto& v : d) v /= std::sqrt(s);
    std::vector<ScanSample> record;
    const HValue h = h_of(f, d, cfg, std::numeric_limits<double>::infinity(), &record);
    expect_class_consistent(f, d, h, cfg);
    if (!h.finite()) continue;
    ++finite;
    for (const auto& r : record) {
      if (r.gamma > cfg.gamma_floor && r.gamma < h.gamma - cfg.root_tol * std::max(1.0, h.gamma)) {
        ASSERT_GT(r.kprime, 0.0) << p.to_string();
      }
    }
  }
  EXPECT_GT(finite, 5);
}

TEST(HProperty, DirectionScalingInvariance) {
  const auto f = field(oracle::planar_sextic, 2);
  for (double t : {0.1, 0.4, 2.9}) {
    const std::vector<double> raw{3.7 * std::cos(t), 3.7 * std::sin(t)};
    const auto d1 = normalized(raw);
    const std::vector<double> scaled{raw[0] * 0.013, raw[1] * 0.013};
    const auto d2 = normalized(scaled);
    EXPECT_EQ(h_of(f, d1, RayConfig{}).gamma, h_of(f, d2, RayConfig{}).gamma);
  }
}

TEST(HProperty, TwistedCandidateAgreesWithClosedForm) {
  const auto f = field(oracle::twisted_u, 2);
  RayConfig cfg;
  cfg.gamma_max = 10;
  for (double t = 0.05; t < 2 * std::numbers::pi; t += 0.37) {
    const double d[] = {std::cos(t), std::sin(t)};
    const HValue h = h_of(f, d, cfg);
    const auto ref = oracle::dense_scan([&](double g) { return oracle::twisted_kprime(t, g); },
                                        cfg.gamma_floor, cfg.gamma_max, cfg.step() / 10, 1e-8);
    ASSERT_EQ(h.finite(), ref.finite) << t;
    EXPECT_NEAR(h.gamma, ref.gamma, 1e-5) << t;
    // No direction comes closer than sqrt(2/3).
    EXPECT_GE(h.gamma, std::sqrt(2.0 / 3.0) - 1e-9);
  }
}

TEST(HEvaluator, ReachFunctionIsApplied) {
  const auto f = field(oracle::scalar_sextic, 1);
  HEvaluator eval(f, RayConfig{}, [](std::span<const double> d) { return d[0] > 0 ? 1.0 : 5.0; });
  const double up[] = {1.0};
  const double down[] = {-1.0};
  EXPECT_EQ(eval(up).kind, HValue::Kind::InfiniteTruncated);
  EXPECT_TRUE(eval(down).finite());
}
