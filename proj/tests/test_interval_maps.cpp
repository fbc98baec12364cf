#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "simdyn/interval_maps.hpp"

using namespace simdyn;

namespace {

double circle_gap(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, 1.0 - d);
}

// Roots of T_w x = x found by scanning g(x) = T_w x - x for sign changes on a
// uniform grid and bisecting. g only jumps downward, so an upward sign change
// brackets a root.
std::vector<double> root_scan(const MapFamily& family, const Word& w, std::size_t grid = 1'000'000) {
  auto g = [&](double x) { return apply_word(family, w, x) - x; };
  std::vector<double> roots;
  if (g(0.0) == 0.0) roots.push_back(0.0);
  double prev_x = 0.0;
  double prev_g = g(0.0);
  for (std::size_t i = 1; i < grid; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid);
    const double gx = g(x);
    if (gx == 0.0) {
      roots.push_back(x);
    } else if (prev_g < 0.0 && gx > 0.0) {
      double lo = prev_x, hi = x;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev_g = gx;
  }
  return roots;
}

MapFamily skewed_family() {
  return MapFamily({ExpandingMap::from_breakpoints({0.0, 0.4, 1.0}),
                    ExpandingMap::from_breakpoints({0.0, 0.3, 0.55, 1.0})});
}

}  // namespace

TEST(ExpandingMapTest, ApplyExamples) {
  const auto d = ExpandingMap::canonical(2);
  const auto t = ExpandingMap::canonical(3);
  EXPECT_DOUBLE_EQ(d.apply(0.3), 0.6);
  EXPECT_DOUBLE_EQ(d.apply(0.75), 0.5);
  EXPECT_DOUBLE_EQ(t.apply(0.5), 0.5);
  EXPECT_EQ(d.apply(1.0), 0.0);
  EXPECT_THROW(d.apply(1.5), DomainError);
  EXPECT_THROW(d.apply(-0.1), DomainError);
}

TEST(ExpandingMapTest, ConstructionChecks) {
  EXPECT_THROW(ExpandingMap::canonical(1), DomainError);
  EXPECT_THROW(ExpandingMap::from_breakpoints({0.0, 1.0}), DomainError);
  EXPECT_THROW(ExpandingMap::from_breakpoints({0.1, 0.5, 1.0}), DomainError);
  EXPECT_THROW(ExpandingMap::from_breakpoints({0.0, 0.6, 0.5, 1.0}), DomainError);
  EXPECT_NO_THROW(ExpandingMap::from_breakpoints({0.0, 0.9, 1.0}));
}

TEST(ExpandingMapTest, InverseBranchExamples) {
  const auto d = ExpandingMap::canonical(2);
  const auto t = ExpandingMap::canonical(3);
  EXPECT_EQ(d.inverse_branches(0.5), (std::vector<double>{0.25, 0.75}));
  EXPECT_EQ(d.inverse_branches(0.0), (std::vector<double>{0.0, 0.5}));
  const auto r = t.inverse_branches(0.0);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_DOUBLE_EQ(r[0], 0.0);
  EXPECT_DOUBLE_EQ(r[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(r[2], 2.0 / 3.0);
}

TEST(ExpandingMapTest, InverseBranchesArePreimages) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ExpandingMap> maps = {ExpandingMap::canonical(2), ExpandingMap::canonical(3),
                                    ExpandingMap::canonical(4), ExpandingMap::canonical(7),
                                    ExpandingMap::from_breakpoints({0.0, 0.3, 0.55, 1.0})};
  for (const auto& m : maps) {
    for (int trial = 0; trial < 500; ++trial) {
      const double x = u(rng);
      const auto pre = m.inverse_branches(x);
      ASSERT_EQ(pre.size(), static_cast<std::size_t>(m.degree()));
      for (std::size_t j = 0; j < pre.size(); ++j) {
        if (j > 0) {
          EXPECT_LT(pre[j - 1], pre[j]);
        }
        EXPECT_LT(circle_gap(m.apply(pre[j]), x), 1e-12);
      }
    }
  }
}

TEST(MapFamilyTest, ApplyWordExamples) {
  const auto f2 = MapFamily::from_degrees({2});
  const auto f23 = MapFamily::from_degrees({2, 3});
  EXPECT_NEAR(apply_word(f2, Word({1, 1}, 1), 0.1), 0.4, 1e-15);
  EXPECT_NEAR(apply_word(f23, Word({1, 2}, 2), 0.2), 0.2, 1e-15);
  // Brute-force cross-check against the closed form 6x mod 1.
  for (int i = 0; i < 100; ++i) {
    const double x = (i + 0.37) / 100.0;
    EXPECT_LT(circle_gap(apply_word(f23, Word({1, 2}, 2), x), std::fmod(6.0 * x, 1.0)), 1e-12);
  }
  EXPECT_EQ(apply_word(f23, Word({2}, 2), 0.0), 0.0);
  EXPECT_THROW(apply_word(f23, Word({}, 2), 0.3), DomainError);
}

TEST(MapFamilyTest, FixedPointExamplesAgainstRootScan) {
  const auto f2 = MapFamily::from_degrees({2});
  const auto f23 = MapFamily::from_degrees({2, 3});
  EXPECT_EQ(fixed_points(f2, Word({1}, 1)), (std::vector<double>{0.0}));

  const auto p11 = fixed_points(f2, Word({1, 1}, 1));
  const auto s11 = root_scan(f2, Word({1, 1}, 1));
  ASSERT_EQ(p11.size(), 3u);
  ASSERT_EQ(s11.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(p11[i], static_cast<double>(i) / 3.0, 1e-15);
    EXPECT_NEAR(s11[i], p11[i], 1e-9);
  }

  const auto p12 = fixed_points(f23, Word({1, 2}, 2));
  const auto s12 = root_scan(f23, Word({1, 2}, 2));
  ASSERT_EQ(p12.size(), 5u);
  ASSERT_EQ(s12.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(p12[i], static_cast<double>(i) / 5.0, 1e-15);
    EXPECT_NEAR(s12[i], p12[i], 1e-9);
  }
}

TEST(MapFamilyTest, NonCanonicalFixedPointsAgainstRootScan) {
  const auto fam = skewed_family();
  for (const auto& w : {Word({1, 2}, 2), Word({2, 2, 1}, 2), Word({2}, 2)}) {
    const auto pts = fixed_points(fam, w);
    const auto scan = root_scan(fam, w, 200'000);
    ASSERT_EQ(pts.size(), scan.size()) << w.to_string();
    for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_NEAR(pts[i], scan[i], 1e-9);
  }
}

TEST(MapFamilyTest, FixedPointCountsExhaustive) {
  const auto canon = MapFamily::from_degrees({2, 3, 4});
  for (std::size_t n = 1; n <= 6; ++n) {
    for (const auto& w : enumerate_words(n, 3)) {
      const std::uint64_t m = branch_product(canon, w);
      const auto pts = fixed_points(canon, w);
      ASSERT_EQ(pts.size(), m - 1);
    }
  }
  const auto fam = skewed_family();
  for (std::size_t n = 1; n <= 6; ++n) {
    for (const auto& w : enumerate_words(n, 2)) {
      const auto pts = fixed_points(fam, w);
      ASSERT_EQ(pts.size(), branch_product(fam, w) - 1) << w.to_string();
      for (double x : pts) EXPECT_LT(circle_gap(apply_word(fam, w, x), x), 1e-12);
    }
  }
}

TEST(MapFamilyTest, PrimePeriodFilter) {
  const auto f2 = MapFamily::from_degrees({2});
  const auto prime = fixed_points(f2, Word({1, 1}, 1), true);
  ASSERT_EQ(prime.size(), 2u);
  EXPECT_NEAR(prime[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(prime[1], 2.0 / 3.0, 1e-15);
  // Mixed words have no shorter period, so nothing is filtered.
  const auto f23 = MapFamily::from_degrees({2, 3});
  EXPECT_EQ(fixed_points(f23, Word({1, 2}, 2), true).size(), 5u);
}

TEST(MapFamilyTest, OrbitOfFixedPointRepeatsUnderConcatenation) {
  const auto fam = MapFamily::from_degrees({2, 3});
  const Word w({1, 2, 2}, 2);
  const Word ww = w.concat(w);
  for (double x : fixed_points(fam, w)) {
    EXPECT_LT(circle_gap(apply_word(fam, ww, x), x), 1e-11);
    double y = x, z = apply_word(fam, w, x);
    for (std::size_t i = 1; i <= w.size(); ++i) {
      y = fam.map(ww.symbol(i)).apply(y);
      z = fam.map(ww.symbol(i + w.size())).apply(z);
      EXPECT_LT(circle_gap(y, z), 1e-10);
    }
  }
}

TEST(MapFamilyTest, BranchProductOverflow) {
  const auto fam = MapFamily::from_degrees({4});
  EXPECT_EQ(branch_product(fam, Word::repeated(1, 31, 1)), std::uint64_t{1} << 62);
  EXPECT_THROW(branch_product(fam, Word::repeated(1, 33, 1)), Overflow);
  EXPECT_THROW(fixed_points(fam, Word::repeated(1, 33, 1)), Overflow);
}

TEST(MapFamilyTest, PiecesTileTheInterval) {
  const auto fam = skewed_family();
  const Word w({2, 1, 2}, 2);
  double expected_start = 0.0;
  std::size_t pieces = 0;
  for_each_piece(fam, w, w.size(), [&](double a, double width, std::span<const int>) {
    EXPECT_NEAR(a, expected_start, 1e-14);
    const double mid = a + 0.5 * width;
    EXPECT_NEAR(apply_word(fam, w, mid), 0.5, 1e-10);
    expected_start = a + width;
    ++pieces;
  });
  EXPECT_EQ(pieces, branch_product(fam, w));
  EXPECT_NEAR(expected_start, 1.0, 1e-14);
}

TEST(SkewTest, SkewApplyExamples) {
  const auto f23 = MapFamily::from_degrees({2, 3});
  auto p = skew_apply(f23, SkewPoint{Word({1, 2}, 2), 0.3});
  EXPECT_EQ(p.word.to_string(), "2");
  EXPECT_DOUBLE_EQ(p.x, 0.6);
  p = skew_apply(f23, SkewPoint{Word({2, 1}, 2), 0.5});
  EXPECT_EQ(p.word.to_string(), "1");
  EXPECT_DOUBLE_EQ(p.x, 0.5);
  const auto f2 = MapFamily::from_degrees({2});
  p = skew_apply(f2, SkewPoint{Word({1}, 1), 0.75});
  EXPECT_TRUE(p.word.empty());
  EXPECT_DOUBLE_EQ(p.x, 0.5);
  EXPECT_THROW(skew_apply(f2, SkewPoint{Word({}, 1), 0.5}), DomainError);
}

TEST(ErgodicSumTest, Examples) {
  const auto f2 = MapFamily::from_degrees({2});
  const auto f23 = MapFamily::from_degrees({2, 3});
  auto c = [](double) { return 0.7; };
  EXPECT_NEAR(ergodic_sum(f23, c, Word({1, 2, 2, 1}, 2), 0.123, 4), 2.8, 1e-14);
  auto id = [](double x) { return x; };
  EXPECT_NEAR(ergodic_sum(f2, id, Word({1, 1}, 1), 0.1, 2), 0.3, 1e-15);
  auto centered = [](double x) { return x - 0.5; };
  // Direct orbit of 1/7 under doubling: 1/7, 2/7, 4/7.
  const double direct = (1.0 / 7 - 0.5) + (2.0 / 7 - 0.5) + (4.0 / 7 - 0.5);
  EXPECT_NEAR(ergodic_sum(f2, centered, Word({1, 1, 1}, 1), 1.0 / 7.0, 3), direct, 1e-14);
  EXPECT_NEAR(direct, -0.5, 1e-15);
  EXPECT_THROW(ergodic_sum(f2, id, Word({1}, 1), 0.1, 2), DomainError);
  EXPECT_THROW(ergodic_sum(f2, id, Word({1}, 1), 0.1, 0), DomainError);
}

TEST(ErgodicSumTest, AdditiveUnderSplitting) {
  const auto fam = MapFamily::from_degrees({2, 3, 5});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> sym(1, 3);
  auto f = [](double x) { return std::cos(2.0 * std::numbers::pi * x) + x * x; };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + static_cast<std::size_t>(rng() % 6);
    const std::size_t n = 1 + static_cast<std::size_t>(rng() % 6);
    std::vector<int> s(m + n);
    for (auto& v : s) v = sym(rng);
    const Word w(s, 3);
    const double x = u(rng);
    const double whole = ergodic_sum(fam, f, w, x, m + n);
    const double head = ergodic_sum(fam, f, w.prefix(m), x, m);
    const double tail = ergodic_sum(fam, f, w.shifted(m), apply_word(fam, w.prefix(m), x), n);
    EXPECT_NEAR(whole, head + tail, 1e-10);
  }
}

TEST(ErgodicSumTest, CoboundaryVanishesOnPeriodicOrbits) {
  const auto fam = MapFamily::from_degrees({2, 3});
  auto h = [](double x) { return std::sin(2.0 * std::numbers::pi * x) + 0.3 * x; };
  for (const auto& w : {Word({1, 2}, 2), Word({2, 2, 1}, 2), Word({1, 1, 2, 1}, 2)}) {
    auto g = [&](double x) { return h(apply_word(fam, w, x)) - h(x); };
    for (double x : fixed_points(fam, w)) EXPECT_LT(std::abs(g(x)), 1e-9);
  }
  // Along a single map, ergodic sums of h o T - h telescope to zero on
  // periodic orbits.
  const auto t3 = MapFamily::from_degrees({3});
  auto g3 = [&](double x) { return h(t3.map(1).apply(x)) - h(x); };
  const Word w = Word::repeated(1, 4, 1);
  for (double x : fixed_points(t3, w)) EXPECT_LT(std::abs(ergodic_sum(t3, g3, w, x, 4)), 1e-9);
}
