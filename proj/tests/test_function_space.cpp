#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "simdyn/function_space.hpp"

using namespace simdyn;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(GridFunctionTest, EvaluateExamples) {
  const auto sq = GridFunction<double>::sample([](double x) { return x * x; }, 1024);
  EXPECT_NEAR(sq.evaluate(0.5), 0.25, 1e-6);
  for (std::size_t i = 0; i <= 1024; i += 37) EXPECT_EQ(sq.evaluate(sq.node(i)), sq.values()[i]);
  const auto c = GridFunction<double>::constant(0.7, 64);
  for (double x : {0.0, 0.1234, 0.5, 0.999, 1.0}) EXPECT_EQ(c.evaluate(x), 0.7);
  EXPECT_THROW(sq.evaluate(1.01), DomainError);
  EXPECT_THROW(sq.evaluate(-0.01), DomainError);
}

TEST(GridFunctionTest, ResolutionChecks) {
  EXPECT_THROW(GridFunction<double>(std::vector<double>(9, 0.0)), DomainError);
  EXPECT_THROW(GridFunction<double>(std::vector<double>(20, 0.0)), DomainError);
  std::vector<double> bad(17, 0.0);
  bad[3] = std::nan("");
  EXPECT_THROW(GridFunction<double>{bad}, DomainError);
  EXPECT_NO_THROW(GridFunction<double>(std::vector<double>(17, 0.0)));
}

TEST(GridFunctionTest, CubicInterpolationIsMoreAccurate) {
  auto fn = [](double x) { return std::sin(2.0 * kPi * x); };
  const auto lin = GridFunction<double>::sample(fn, 64, Interpolation::linear);
  const auto cub = GridFunction<double>::sample(fn, 64, Interpolation::cubic);
  double err_lin = 0.0, err_cub = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0;
    err_lin = std::max(err_lin, std::abs(lin.evaluate(x) - fn(x)));
    err_cub = std::max(err_cub, std::abs(cub.evaluate(x) - fn(x)));
  }
  EXPECT_LT(err_cub, err_lin / 10.0);
  EXPECT_LT(err_cub, 1e-5);
}

TEST(IntegrateTest, Examples) {
  const auto centered = GridFunction<double>::sample([](double x) { return x - 0.5; }, 256);
  EXPECT_NEAR(integrate(centered), 0.0, 1e-12);
  const auto cosine = GridFunction<double>::sample([](double x) { return std::cos(2.0 * kPi * x); }, 256);
  EXPECT_NEAR(integrate(cosine), 0.0, 1e-10);
  const auto sq = GridFunction<double>::sample([](double x) { return x * x; }, 1024);
  EXPECT_NEAR(integrate(sq), 1.0 / 3.0, 1e-9);
}

TEST(IntegrateTest, ExactOnAffineFunctions) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = u(rng), b = u(rng);
    const auto f = GridFunction<double>::sample([&](double x) { return a * x + b; }, 64);
    EXPECT_NEAR(integrate(f), a / 2.0 + b, 1e-13);
  }
}

TEST(IntegrateTest, FourthOrderConvergence) {
  auto fn = [](double x) { return std::exp(x) * std::sin(3.0 * x); };
  // Antiderivative of e^x sin 3x is e^x (sin 3x - 3 cos 3x) / 10.
  auto anti = [](double x) { return std::exp(x) * (std::sin(3.0 * x) - 3.0 * std::cos(3.0 * x)) / 10.0; };
  const double exact = anti(1.0) - anti(0.0);
  double prev = 0.0;
  for (std::size_t q = 16; q <= 128; q *= 2) {
    const double err = std::abs(integrate(GridFunction<double>::sample(fn, q)) - exact);
    if (q > 16) {
      EXPECT_GT(prev / err, 14.0) << "q=" << q;
    }
    prev = err;
  }
}

TEST(HolderTest, Examples) {
  const auto c = GridFunction<double>::constant(2.5, 64);
  EXPECT_EQ(holder_seminorm_estimate(c, 0.3), 0.0);
  const auto id = GridFunction<double>::sample([](double x) { return x; }, 256);
  EXPECT_NEAR(holder_seminorm_estimate(id, 1.0), 1.0, 1e-9);
  const auto centered = GridFunction<double>::sample([](double x) { return x - 0.5; }, 64);
  // Brute force over all node pairs.
  double brute = 0.0;
  for (std::size_t i = 0; i <= 64; ++i) {
    for (std::size_t j = i + 1; j <= 64; ++j) {
      const double dx = (j - i) / 64.0;
      brute = std::max(brute, dx / std::sqrt(dx));
    }
  }
  EXPECT_NEAR(holder_seminorm_estimate(centered, 0.5), brute, 1e-12);
  EXPECT_GE(holder_seminorm_estimate(centered, 0.5), 1.0 - 1e-12);
  EXPECT_THROW(holder_seminorm_estimate(centered, 0.0), DomainError);
  EXPECT_THROW(holder_seminorm_estimate(centered, 1.5), DomainError);
}

TEST(QLiftTest, Examples) {
  const auto f = GridFunction<double>::sample([](double x) { return std::cos(2.0 * kPi * x); }, 64);
  const auto l0 = q_lift(f, 0, 3);
  ASSERT_EQ(l0.slices().size(), 1u);
  EXPECT_EQ(l0.slices()[0].values(), f.values());
  const auto l2 = q_lift(f, 2, 2);
  ASSERT_EQ(l2.slices().size(), 4u);
  for (const auto& s : l2.slices()) EXPECT_EQ(s.values(), f.values());

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Word w({1 + static_cast<int>(rng() % 2), 1 + static_cast<int>(rng() % 2), 1}, 2);
    const double x = u(rng);
    EXPECT_EQ(l2(w, x), f.evaluate(x));
  }
}

TEST(QLiftTest, CommutesWithProducts) {
  const auto f = GridFunction<double>::sample([](double x) { return std::sin(2.0 * kPi * x); }, 128);
  const auto g = GridFunction<double>::sample([](double x) { return x * x - 0.2; }, 128);
  const auto lhs = q_lift(f * g, 3, 2);
  const auto rhs = q_lift(f, 3, 2) * q_lift(g, 3, 2);
  for (std::size_t i = 0; i < lhs.slices().size(); ++i) EXPECT_EQ(lhs.slices()[i].values(), rhs.slices()[i].values());
}

TEST(QLiftTest, HolderConstantUnchanged) {
  const auto f = GridFunction<double>::sample([](double x) { return std::abs(x - 0.3); }, 128);
  const double hf = holder_seminorm_estimate(f, 0.7);
  const auto lifted = q_lift(f, 2, 3);
  for (const auto& s : lifted.slices()) EXPECT_EQ(holder_seminorm_estimate(s, 0.7), hf);
}

TEST(CylinderFunctionTest, ShapeChecks) {
  const auto f = GridFunction<double>::constant(1.0, 16);
  EXPECT_THROW(CylinderFunction<double>(2, 2, {f, f, f}), DomainError);
  const auto g = GridFunction<double>::constant(1.0, 32);
  EXPECT_THROW(CylinderFunction<double>(1, 2, {f, g}), DomainError);
}

TEST(PotentialTest, ParsingAndEvaluation) {
  const auto fam = MapFamily::from_degrees({2, 3});
  EXPECT_NEAR(Potential::parse("centered")(0.8), 0.3, 1e-15);
  EXPECT_NEAR(Potential::parse("cos:3")(0.1), std::cos(0.6 * kPi), 1e-15);
  EXPECT_NEAR(Potential::parse("sin:1")(0.25), 1.0, 1e-15);
  EXPECT_EQ(Potential::parse("const:0.7")(0.4), 0.7);
  EXPECT_NEAR(Potential::parse("pow:2")(0.3), 0.09, 1e-16);
  EXPECT_NEAR(Potential::parse("x+const:-0.45")(0.5), 0.05, 1e-15);
  EXPECT_NEAR(Potential::parse("0.5*cos:1 + centered")(0.0), 0.0, 1e-15);
  EXPECT_NEAR(Potential::parse("neglogd:2", &fam)(0.4), -std::log(3.0), 1e-15);
  EXPECT_NEAR(Potential::parse("1e-1*x")(0.5), 0.05, 1e-16);
  EXPECT_THROW(Potential::parse("bogus"), ConfigError);
  EXPECT_THROW(Potential::parse(""), ConfigError);
  EXPECT_THROW(Potential::parse("neglogd:3", &fam), ConfigError);
  EXPECT_THROW(Potential::parse("neglogd:1"), ConfigError);
  EXPECT_THROW(Potential::parse("pow:-1"), ConfigError);
}

TEST(PotentialTest, UnboundNegLogDerivative) {
  const auto p = Potential::parse("neglogd");
  EXPECT_TRUE(p.needs_map());
  EXPECT_THROW(p(0.3), DomainError);
  const auto bound = p.for_map(ExpandingMap::canonical(4));
  EXPECT_FALSE(bound.needs_map());
  EXPECT_NEAR(bound(0.3), -std::log(4.0), 1e-15);
  const auto skewed = p.for_map(ExpandingMap::from_breakpoints({0.0, 0.25, 1.0}));
  EXPECT_NEAR(skewed(0.1), -std::log(4.0), 1e-15);
  EXPECT_NEAR(skewed(0.5), std::log(0.75), 1e-15);
}

TEST(PotentialTest, LabelsRoundTrip) {
  const auto fam = MapFamily::from_degrees({2, 3});
  for (const char* text : {"centered", "cos:3", "0.5*cos:1+centered", "x+const:-0.45", "neglogd:2", "pow:2"}) {
    const auto p = Potential::parse(text, &fam);
    const auto q = Potential::parse(p.label(), &fam);
    for (double x : {0.0, 0.13, 0.5, 0.77}) EXPECT_EQ(p(x), q(x)) << text;
  }
}

TEST(PotentialTest, SupNorm) {
  EXPECT_NEAR(sup_norm_estimate(Potential::parse("centered")), 0.5, 1e-15);
  EXPECT_NEAR(sup_norm_estimate(Potential::parse("2*cos:2")), 2.0, 1e-15);
}
