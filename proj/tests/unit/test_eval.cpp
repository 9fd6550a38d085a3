#include "rgbps/eval.hpp"
#include "rgbps/render.hpp"

#include "../support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rgbps;

namespace {

NormalField normals_from(int w, int h, const std::function<Eigen::Vector2d(double, double)>& grad) {
  NormalField n(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) n(x, y) = normal_from_gradient(grad(x, y));
  }
  return n;
}

LightCaptures white_captures(const NormalField& n, const AlbedoMap& k, const LightingRig& rig) {
  LightCaptures caps{RgbImage(n.width(), n.height()), RgbImage(n.width(), n.height()), RgbImage(n.width(), n.height())};
  for (int light = 0; light < 3; ++light) {
    for (Eigen::Index i = 0; i < n.size(); ++i) {
      caps[std::size_t(light)][i] = k[i] * std::max(0.0, rig.light(light).dot(n[i]));
    }
  }
  return caps;
}

}  // namespace

TEST(AngularError, Examples) {
  NormalField a(3, 1), b(3, 1);
  a[0] = b[0] = Eigen::Vector3d(0, 0, 1);
  a[1] = Eigen::Vector3d(0, 0, 1);
  b[1] = Eigen::Vector3d(1, 0, 0);
  a[2] = Eigen::Vector3d(0, 0, 1);
  b[2] = Eigen::Vector3d(1, 0, 1).normalized();
  const auto r = angular_error(a, b);
  EXPECT_EQ(r.errors[0](0), 0.0);
  EXPECT_NEAR(r.errors[1](0), 90.0, 1e-12);
  EXPECT_NEAR(r.errors[2](0), 45.0, 1e-12);
  EXPECT_NEAR(r.median, 45.0, 1e-12);
  EXPECT_NEAR(r.mean, 45.0, 1e-12);
  EXPECT_EQ(r.count, 3);
  EXPECT_EQ(r.cdf({0.0, 46.0, 91.0}), (std::vector<double>{1.0 / 3, 2.0 / 3, 1.0}));
}

TEST(AngularError, SymmetricAndMaskAware) {
  std::mt19937_64 rng(1);
  NormalField a(10, 10), b(10, 10);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    a[i] = support::random_unit(rng);
    b[i] = support::random_unit(rng);
  }
  a.set_valid(4, false);
  b.set_valid(7, false);
  const auto ab = angular_error(a, b), ba = angular_error(b, a);
  EXPECT_EQ(ab.count, 98);
  EXPECT_FALSE(ab.errors.valid(4));
  EXPECT_FALSE(ab.errors.valid(7));
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!ab.errors.valid(i)) continue;
    EXPECT_EQ(ab.errors[i](0), ba.errors[i](0));
    EXPECT_NEAR(ab.errors[i](0), support::angle_deg(a[i], b[i]), 1e-9);
  }
  EXPECT_THROW(angular_error(a, NormalField(3, 3)), InputError);
  NormalField empty(2, 2);
  for (Eigen::Index i = 0; i < 4; ++i) empty.set_valid(i, false);
  EXPECT_THROW(angular_error(empty, empty), InputError);
}

TEST(AngularError, ClampsRoundingAboveOne) {
  NormalField a(1, 1);
  a[0] = Eigen::Vector3d(0, 0, 1 + 1e-15);
  EXPECT_EQ(angular_error(a, a).errors[0](0), 0.0);
}

TEST(Median, EvenAndOdd) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_EQ(cdf_thresholds(1.0, 0.5), (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(ClassicalPs, ExactRecoveryUnshadowed) {
  const auto rig = LightingRig::benchmark();
  std::mt19937_64 rng(2);
  NormalField n(16, 16);
  AlbedoMap k(16, 16);
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    do n[i] = support::random_unit(rng, 0.3);
    while ((rig.matrix().transpose() * n[i]).minCoeff() <= 0.01);
    k[i] = 0.9 * support::random_chroma(rng);
  }
  const auto r = classical_ps(simulate_white_light_captures(render(n, k, rig), k), k, rig);
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    ASSERT_TRUE(r.normals.valid(i));
    EXPECT_FALSE(r.flagged[std::size_t(i)]);
    EXPECT_LT((r.normals[i] - n[i]).norm(), 1e-12);
    EXPECT_LT(r.residual[i](0), 1e-12);
  }
}

TEST(ClassicalPs, SingleUsableChannel) {
  const auto rig = LightingRig::benchmark();
  NormalField n(1, 1);
  n[0] = Eigen::Vector3d(0.1, 0.2, 1.0).normalized();
  AlbedoMap k(1, 1);
  k[0] = Eigen::Vector3d(0.0, 0.6, 0.0);
  const auto r = classical_ps(white_captures(n, k, rig), k, rig);
  ASSERT_TRUE(r.normals.valid(0));
  EXPECT_LT((r.normals[0] - n[0]).norm(), 1e-12);
}

TEST(ClassicalPs, ShadowedPixelFlagged) {
  const auto rig = LightingRig::benchmark();
  NormalField n(1, 1);
  n[0] = Eigen::Vector3d(-0.9, 0.0, 0.2).normalized();
  ASSERT_LT((rig.matrix().transpose() * n[0]).minCoeff(), -0.1);
  AlbedoMap k(1, 1);
  k[0] = Eigen::Vector3d(0.5, 0.5, 0.5);
  const auto r = classical_ps(white_captures(n, k, rig), k, rig);
  EXPECT_TRUE(r.flagged[0]);
}

TEST(ClassicalPs, MissingLightFlagged) {
  const auto rig = LightingRig::benchmark();
  NormalField n(1, 1);
  n[0] = Eigen::Vector3d(0, 0, 1);
  AlbedoMap k(1, 1);
  k[0] = Eigen::Vector3d(0.5, 0.0, 0.5);
  RgbImage img = render(n, k, rig);
  const auto caps = simulate_white_light_captures(img, k);
  EXPECT_TRUE(std::isnan(caps[1][0](0)));
  const auto r = classical_ps(caps, k, rig);
  EXPECT_TRUE(r.flagged[0]);
  EXPECT_FALSE(r.normals.valid(0));
  EXPECT_THROW(classical_ps(caps, AlbedoMap(2, 1), rig), InputError);
}

TEST(Integrate, PlaneZEqualsX) {
  const auto n = normals_from(9, 7, [](double, double) { return Eigen::Vector2d(1, 0); });
  const auto r = integrate_normals(n, n.mask());
  EXPECT_EQ(r.components, 1);
  EXPECT_LT(r.rms_residual, 1e-10);
  for (int y = 0; y < 7; ++y) {
    for (int x = 0; x < 9; ++x) EXPECT_NEAR(r.depth(x, y)(0), x - 4.0, 1e-9);
  }
}

TEST(Integrate, PolynomialDepthRecovered) {
  // z = 0.002 x^3 - 0.01 x y + 0.001 y^4 / 4, zero-mean shifted.
  auto z = [](double x, double y) { return 0.002 * x * x * x - 0.01 * x * y + 0.00025 * y * y * y * y; };
  auto g = [](double x, double y) { return Eigen::Vector2d(0.006 * x * x - 0.01 * y, -0.01 * x + 0.001 * y * y * y); };
  const int w = 14, h = 11;
  const auto n = normals_from(w, h, g);
  const auto r = integrate_normals(n, n.mask());
  double mean = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) mean += z(x, y);
  }
  mean /= w * h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) EXPECT_NEAR(r.depth(x, y)(0), z(x, y) - mean, 1e-6);
  }
  EXPECT_LT(r.rms_residual, 1e-6);
}

TEST(Integrate, NonIntegrableFieldLeavesResidual) {
  // Pure rotation field (-y, x) has nonzero curl.
  const auto n = normals_from(10, 10, [](double x, double y) { return Eigen::Vector2d(-0.05 * (y - 4.5), 0.05 * (x - 4.5)); });
  EXPECT_GT(integrate_normals(n, n.mask()).rms_residual, 1e-3);
}

TEST(Integrate, SeparateComponentsEachZeroMean) {
  const int w = 12, h = 5;
  const auto n = normals_from(w, h, [](double, double) { return Eigen::Vector2d(0.5, 0.2); });
  Mask mask(std::size_t(w * h), 1);
  for (int y = 0; y < h; ++y) mask[std::size_t(y * w + 6)] = 0;
  const auto r = integrate_normals(n, mask);
  EXPECT_EQ(r.components, 2);
  double left = 0, right = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x < 6) left += r.depth(x, y)(0);
      if (x > 6) right += r.depth(x, y)(0);
    }
  }
  EXPECT_NEAR(left, 0.0, 1e-9);
  EXPECT_NEAR(right, 0.0, 1e-9);
  EXPECT_NEAR(r.depth(2, 2)(0) - r.depth(1, 1)(0), 0.7, 1e-9);
  EXPECT_FALSE(r.depth.valid(6));
}

TEST(Integrate, RejectsGrazingNormals) {
  NormalField n(3, 3);
  for (Eigen::Index i = 0; i < 9; ++i) n[i] = Eigen::Vector3d(0, 0, 1);
  n[4] = Eigen::Vector3d(1, 0, 0);
  EXPECT_THROW(integrate_normals(n, n.mask()), InputError);
  Mask mask = n.mask();
  mask[4] = 0;
  EXPECT_NO_THROW(integrate_normals(n, mask));
}
