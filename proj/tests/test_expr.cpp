#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "lyascreen/expr.hpp"
#include "oracles.hpp"

using lyascreen::EvalDomainError;
using lyascreen::Expression;

TEST(ExprParse, QuadraticMatchesHandBuiltTree) {
  const auto a = Expression::parse("x1^2 + x2^2", 2);
  const auto b = Expression::parse("(x1)^(2) + ((x2)^2)", 2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.to_string(), "x1^2 + x2^2");
}

TEST(ExprParse, PlanarSexticParses) {
  EXPECT_NO_THROW(Expression::parse(oracle::planar_sextic, 2));
}

TEST(ExprParse, SyntaxErrorReportsPosition) {
  try {
    Expression::parse("x1 +* x2", 2);
    FAIL() << "expected SyntaxError";
  } catch (const lyascreen::SyntaxError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
}

TEST(ExprParse, ErrorClasses) {
  EXPECT_THROW(Expression::parse("x3 + x1", 2), lyascreen::VariableOutOfRange);
  EXPECT_THROW(Expression::parse("x0", 2), lyascreen::VariableOutOfRange);
  EXPECT_THROW(Expression::parse("y1 + x1", 2), lyascreen::UnknownIdentifier);
  EXPECT_THROW(Expression::parse("foo(x1)", 1), lyascreen::UnknownIdentifier);
  EXPECT_THROW(Expression::parse("", 1), lyascreen::SyntaxError);
  EXPECT_THROW(Expression::parse("(x1", 1), lyascreen::SyntaxError);
  EXPECT_THROW(Expression::parse("sin x1", 1), lyascreen::SyntaxError);
  EXPECT_THROW(Expression::parse("x1 x1", 1), lyascreen::SyntaxError);
}

TEST(ExprParse, PowerIsRightAssociativeAndBindsTighterThanMinus) {
  const double x[] = {2.0};
  EXPECT_DOUBLE_EQ(Expression::parse("x1^3^2", 1).eval(x), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-x1^2", 1).eval(x), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^-1", 1).eval(x), 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("8/2/2", 1).eval(x), 2.0);
  EXPECT_DOUBLE_EQ(Expression::parse("8-2-2", 1).eval(x), 4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("1+2*3", 1).eval(x), 7.0);
}

TEST(ExprParse, ConstantsAndFunctions) {
  const double x[] = {0.5};
  EXPECT_DOUBLE_EQ(Expression::parse("pi", 1).eval(x), M_PI);
  EXPECT_DOUBLE_EQ(Expression::parse("e", 1).eval(x), M_E);
  EXPECT_DOUBLE_EQ(Expression::parse("sin(x1)+cos(x1)+tan(x1)", 1).eval(x),
                   std::sin(0.5) + std::cos(0.5) + std::tan(0.5));
  EXPECT_DOUBLE_EQ(Expression::parse("exp(x1)*ln(x1)*sqrt(x1)*abs(-x1)", 1).eval(x),
                   std::exp(0.5) * std::log(0.5) * std::sqrt(0.5) * 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("1.5e1 + .25", 1).eval(x), 15.25);
}

TEST(ExprParse, AbsMarksNonSmooth) {
  EXPECT_TRUE(Expression::parse("x1^2", 1).is_smooth());
  EXPECT_FALSE(Expression::parse("abs(x1)", 1).is_smooth());
}

TEST(ExprEval, HandExamples) {
  const double origin[] = {0.0, 0.0};
  EXPECT_EQ(Expression::parse("x1^2 + x2^2", 2).eval(origin), 0.0);
  const double p[] = {2.0, 0.0};
  EXPECT_NEAR(Expression::parse(oracle::planar_sextic, 2).eval(p), 92.0 / 3.0, 1e-12);
}

TEST(ExprEval, DomainErrorsInsteadOfNaN) {
  const double m1[] = {-1.0};
  const double zero[] = {0.0};
  EXPECT_THROW(Expression::parse("ln(x1)", 1).eval(m1), EvalDomainError);
  EXPECT_THROW(Expression::parse("1/x1", 1).eval(zero), EvalDomainError);
  EXPECT_THROW(Expression::parse("sqrt(x1)", 1).eval(m1), EvalDomainError);
  EXPECT_THROW(Expression::parse("x1^0.5", 1).eval(m1), EvalDomainError);
  EXPECT_THROW(Expression::parse("exp(exp(exp(x1 + 10)))", 1).eval(zero), EvalDomainError);
  try {
    Expression::parse("x1 + ln(x1)", 1).eval(m1);
    FAIL();
  } catch (const EvalDomainError& e) {
    EXPECT_EQ(e.subexpression(), "ln(x1)");
  }
}

TEST(ExprEval, NegativeBaseWithIntegerExponent) {
  const double m2[] = {-2.0};
  EXPECT_DOUBLE_EQ(Expression::parse("x1^3", 1).eval(m2), -8.0);
  EXPECT_DOUBLE_EQ(Expression::parse("x1^(1+1)", 1).eval(m2), 4.0);
}

TEST(ExprGrad, HandExamples) {
  const double p[] = {1.0, 2.0};
  EXPECT_EQ(Expression::parse("x1^2 + x2^2", 2).grad(p), (std::vector<double>{2.0, 4.0}));
  const double q[] = {2.0, 0.0};
  const auto g = Expression::parse(oracle::planar_sextic, 2).grad(q);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
  const double r[] = {0.0, 1.0};
  EXPECT_EQ(Expression::parse("x1^2 - x2^2", 2).grad(r), (std::vector<double>{0.0, -2.0}));
}

TEST(ExprDirectional, SexticAtTwo) {
  const auto e = Expression::parse(oracle::scalar_sextic, 1);
  const double base[] = {0.0};
  const double dir[] = {1.0};
  const auto j = e.directional_derivatives(base, dir, 2.0);
  EXPECT_NEAR(j.d1, 0.0, 1e-12);
  EXPECT_NEAR(j.d2, 5.0 * 16 - 39.0 * 4 + 36, 1e-12);
}

TEST(ExprDirectional, Quadratic) {
  const auto e = Expression::parse("x1^2 + x2^2", 2);
  const double base[] = {0.0, 0.0};
  const double dir[] = {1.0, 0.0};
  const auto j = e.directional_derivatives(base, dir, 3.0);
  EXPECT_DOUBLE_EQ(j.value, 9.0);
  EXPECT_DOUBLE_EQ(j.d1, 6.0);
  EXPECT_DOUBLE_EQ(j.d2, 2.0);
}

TEST(ExprDirectional, Preconditions) {
  const auto e = Expression::parse("x1^2 + x2^2", 2);
  const double base[] = {0.0, 0.0};
  const double not_unit[] = {1.0, 1.0};
  const double unit[] = {1.0, 0.0};
  EXPECT_THROW(e.directional_derivatives(base, not_unit, 1.0), std::invalid_argument);
  EXPECT_THROW(e.directional_derivatives(base, unit, -1.0), std::invalid_argument);
}

TEST(ExprProperty, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(20240901);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 3;
    const auto e = Expression::parse(oracle::random_expression(rng, n, 4), n);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = coord(rng);
    const auto g = e.grad(x);
    const auto fd = oracle::ridders_grad([&](const std::vector<double>& p) { return e.eval(p); },
                                            x);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ASSERT_LT(std::abs(g[i] - fd[i]) / (1.0 + std::abs(g[i])), 1e-6)
          << e.to_string() << " component " << i;
    }
    ++checked;
  }
  EXPECT_EQ(checked, 1000);
}

TEST(ExprProperty, DirectionalFirstDerivativeIsGradientProjection) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 3;
    const auto e = Expression::parse(oracle::random_expression(rng, n, 4), n);
    std::vector<double> base(static_cast<std::size_t>(n)), dir(static_cast<std::size_t>(n));
    double norm = 0.0;
    for (auto& v : base) v = coord(rng);
    for (auto& v : dir) {
      v = normal(rng);
      norm += v * v;
    }
    for (auto& v : dir) v /= std::sqrt(norm);
    const double gamma = 0.5 * (coord(rng) + 1.0);
    const auto j = e.directional_derivatives(base, dir, gamma);
    std::vector<double> p(base);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += gamma * dir[i];
    const auto g = e.grad(p);
    double proj = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      proj += g[i] * dir[i];
      scale += std::abs(g[i] * dir[i]);
    }
    ASSERT_LE(std::abs(j.d1 - proj), 1e-10 * std::max(1.0, scale)) << e.to_string();
    EXPECT_DOUBLE_EQ(j.value, e.eval(p));
  }
}

TEST(ExprProperty, RepeatedEvaluationIsBitIdentical) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto e = Expression::parse(oracle::random_expression(rng, 2, 4), 2);
    const double x[] = {0.3, -0.7};
    const double dir[] = {0.6, 0.8};
    const double v = e.eval(x);
    const auto g = e.grad(x);
    const auto j = e.directional_derivatives(x, dir, 0.25);
    for (int rep = 0; rep < 3; ++rep) {
      const double v2 = e.eval(x);
      ASSERT_EQ(std::bit_cast<std::uint64_t>(v2), std::bit_cast<std::uint64_t>(v));
      ASSERT_EQ(e.grad(x), g);
      const auto j2 = e.directional_derivatives(x, dir, 0.25);
      ASSERT_EQ(j2.value, j.value);
      ASSERT_EQ(j2.d1, j.d1);
      ASSERT_EQ(j2.d2, j.d2);
    }
  }
}

TEST(ExprProperty, PrintParseRoundTrip) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + trial % 3;
    const auto e = Expression::parse(oracle::random_expression(rng, n, 5), n);
    const auto again = Expression::parse(e.to_string(), n);
    ASSERT_EQ(e, again) << e.to_string();
    ASSERT_EQ(again.to_string(), e.to_string());
  }
  for (const char* s : {"-x1^2", "(-x1)^2", "x1 - (x2 - x1)", "x1/(x2*x1)", "2^-x1", "-(-x1)",
                        "x1^x2^x1", "(x1^x2)^x1", "-2.5e-300*x1", "sin(-x1)^2"}) {
    const auto e = Expression::parse(s, 2);
    EXPECT_EQ(e, Expression::parse(e.to_string(), 2)) << s << " -> " << e.to_string();
  }
}

TEST(ExprConcurrency, SharedExpressionAcrossThreads) {
  const auto e = Expression::parse(oracle::twisted_u, 2);
  const double x[] = {0.4, -0.3};
  const auto expected = e.grad(x);
  std::vector<std::vector<double>> results(4);
  {
    std::vector<std::jthread> pool;
    for (auto& r : results) {
      pool.emplace_back([&] {
        for (int i = 0; i < 2000; ++i) r = e.grad(x);
      });
    }
  }
  for (const auto& r : results) EXPECT_EQ(r, expected);
}
