#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "semcache/vector_core.hpp"
#include "semcache/workload.hpp"

namespace semcache {
namespace {

std::vector<float> axis(std::size_t dim, std::size_t i, float sign = 1.0f) {
  std::vector<float> v(dim, 0.0f);
  v[i] = sign;
  return v;
}

TEST(VectorCore, DistanceToSelfIsZero) {
  const auto v = random_unit_vectors(1, 384, 3)[0];
  EXPECT_EQ(l2_distance(v, v), 0.0);
}

TEST(VectorCore, OrthogonalUnitVectorsAreSqrt2Apart) {
  EXPECT_NEAR(l2_distance(axis(8, 0), axis(8, 5)), std::sqrt(2.0), 1e-12);
}

TEST(VectorCore, AntipodalUnitVectorsAreTwoApart) {
  EXPECT_NEAR(l2_distance(axis(8, 2), axis(8, 2, -1.0f)), 2.0, 1e-12);
}

TEST(VectorCore, DistanceMatchesNaiveSumAndIsSymmetric) {
  std::mt19937_64 rng(11);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (std::size_t dim : {1u, 3u, 7u, 8u, 9u, 31u, 64u, 385u}) {
    std::vector<float> a(dim), b(dim);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = g(rng);
    double s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
      s += d * d;
    }
    EXPECT_NEAR(l2_distance(a, b), std::sqrt(s), 1e-12 * (1.0 + std::sqrt(s)));
    EXPECT_EQ(l2_distance(a, b), l2_distance(b, a));
  }
}

TEST(VectorCore, DistanceRejectsDimensionMismatch) {
  EXPECT_THROW(l2_distance(axis(3, 0), axis(4, 0)), std::invalid_argument);
}

TEST(VectorCore, NormalizeScales) {
  const std::vector<float> v{3.0f, 4.0f, 0.0f, 0.0f};
  const auto n = normalize(v);
  EXPECT_NEAR(n[0], 0.6, 1e-7);
  EXPECT_NEAR(n[1], 0.8, 1e-7);
  EXPECT_EQ(n[2], 0.0f);
  EXPECT_NEAR(l2_norm(n), 1.0, 1e-6);
}

TEST(VectorCore, NormalizeIsIdempotent) {
  for (const auto& v : random_unit_vectors(50, 384, 5)) {
    const auto once = normalize(v);
    const auto twice = normalize(once);
    // Storage is 32-bit, so agreement is to float resolution.
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_NEAR(once[i], v[i], 1e-7);
      EXPECT_NEAR(twice[i], once[i], 1e-7);
    }
  }
}

TEST(VectorCore, NormalizeRejectsDegenerateInput) {
  EXPECT_THROW(normalize(std::vector<float>(5, 0.0f)), std::invalid_argument);
  EXPECT_THROW(normalize(std::vector<float>{1.0f, NAN}), std::invalid_argument);
}

TEST(VectorCore, CosineFromDistance) {
  EXPECT_NEAR(l2_to_cosine(0.5), 0.875, 1e-12);
  EXPECT_NEAR(l2_to_cosine(0.7), 0.755, 1e-12);
  EXPECT_NEAR(l2_to_cosine(0.9), 0.595, 1e-12);
  EXPECT_NEAR(l2_to_cosine(std::sqrt(2.0)), 0.0, 1e-12);
  EXPECT_NEAR(l2_to_cosine(2.0), -1.0, 1e-12);
  EXPECT_THROW(l2_to_cosine(-0.1), std::out_of_range);
  EXPECT_THROW(l2_to_cosine(2.1), std::out_of_range);
}

TEST(VectorCore, CosineIsStrictlyDecreasing) {
  double prev = l2_to_cosine(0.0);
  for (int i = 1; i <= 200; ++i) {
    const double c = l2_to_cosine(i * 0.01);
    EXPECT_LT(c, prev);
    prev = c;
  }
}

TEST(VectorCore, CosineAgreesWithDotProduct) {
  const auto vs = random_unit_vectors(200, 64, 21);
  for (std::size_t i = 0; i + 1 < vs.size(); i += 2) {
    EXPECT_NEAR(l2_to_cosine(l2_distance(vs[i], vs[i + 1])), dot(vs[i], vs[i + 1]), 1e-6);
  }
}

TEST(VectorCore, TriangleInequality) {
  const auto vs = random_unit_vectors(300, 16, 8);
  for (std::size_t i = 0; i + 2 < vs.size(); i += 3) {
    const double ab = l2_distance(vs[i], vs[i + 1]);
    const double bc = l2_distance(vs[i + 1], vs[i + 2]);
    const double ac = l2_distance(vs[i], vs[i + 2]);
    EXPECT_LE(ac, ab + bc + 1e-9);
  }
}

TEST(VectorCore, UnitPairDistancesStayInRange) {
  const auto vs = random_unit_vectors(100, 5, 4);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < vs.size(); ++j) {
      const double d = l2_distance(vs[i], vs[j]);
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 2.0 + 1e-6);
    }
  }
}

TEST(VectorCore, ThresholdIsStrict) {
  const Threshold t(0.9);
  EXPECT_TRUE(t.admits(0.8999999));
  EXPECT_FALSE(t.admits(0.9));
  EXPECT_FALSE(t.admits(0.95));
  EXPECT_THROW(Threshold(0.0), std::invalid_argument);
  EXPECT_THROW(Threshold(2.0), std::invalid_argument);
  EXPECT_THROW(Threshold(-1.0), std::invalid_argument);
}

TEST(VectorCore, WithinAgreesWithDistance) {
  const auto vs = random_unit_vectors(400, 6, 13);
  for (double tv : {0.3, 0.9, 1.4, 1.99}) {
    const Threshold t(tv);
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) {
      const double d = l2_distance(vs[i], vs[i + 1]);
      EXPECT_EQ(within(vs[i], vs[i + 1], t), t.admits(d));
      const auto early = distance_within(vs[i], vs[i + 1], t);
      EXPECT_EQ(early.has_value(), t.admits(d));
      if (early) EXPECT_EQ(*early, d);
    }
  }
}

TEST(VectorCore, FiniteAndUnitChecks) {
  EXPECT_TRUE(all_finite(std::vector<float>{1.0f, -2.0f}));
  EXPECT_FALSE(all_finite(std::vector<float>{1.0f, INFINITY}));
  EXPECT_TRUE(is_unit(axis(4, 1)));
  EXPECT_FALSE(is_unit(std::vector<float>{1.0f, 1.0f}));
}

}  // namespace
}  // namespace semcache
