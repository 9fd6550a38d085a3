#include "rgbps/field.hpp"
#include "rgbps/lighting.hpp"
#include "rgbps/render.hpp"

#include "../support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rgbps;

namespace {

NormalField constant_normals(int w, int h, const Eigen::Vector3d& n) {
  NormalField f(w, h);
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = n;
  return f;
}

AlbedoMap constant_albedo(int w, int h, const Eigen::Vector3d& k) {
  AlbedoMap f(w, h);
  for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = k;
  return f;
}

}  // namespace

TEST(Render, AxisAlignedIdentityRig) {
  const LightingRig rig(Eigen::Matrix3d::Identity());
  const auto v = render(constant_normals(1, 1, {0, 0, 1}), constant_albedo(1, 1, {1, 1, 1}), rig);
  EXPECT_EQ(v[0], Eigen::Vector3d(0, 0, 1));
}

TEST(Render, DiagonalNormal) {
  const LightingRig rig(Eigen::Matrix3d::Identity());
  const Eigen::Vector3d n = Eigen::Vector3d::Ones().normalized();
  const auto v = render(constant_normals(1, 1, n), constant_albedo(1, 1, {1, 1, 1}), rig);
  EXPECT_LT((v[0] - Eigen::Vector3d::Constant(1 / std::sqrt(3.0))).norm(), 1e-15);
}

TEST(Render, FullAttachedShadowIsBlack) {
  const LightingRig rig(Eigen::Matrix3d::Identity());
  const auto v = render(constant_normals(1, 1, {0, 0, -1}), constant_albedo(1, 1, {1, 1, 1}), rig);
  EXPECT_EQ(v[0], Eigen::Vector3d::Zero());
}

TEST(Render, ShadowClipsOnlyAffectedChannel) {
  const LightingRig rig = LightingRig::benchmark();
  std::mt19937_64 rng(5);
  int clipped = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Eigen::Vector3d n = support::random_unit(rng, 0.01);
    const Eigen::Vector3d shade = rig.matrix().transpose() * n;
    const Eigen::Vector3d v = render_pixel(n, {0.7, 0.4, 0.9}, rig);
    for (int c = 0; c < 3; ++c) {
      if (shade(c) <= 0) {
        EXPECT_EQ(v(c), 0.0);
        ++clipped;
      } else {
        EXPECT_NEAR(v(c), Eigen::Vector3d(0.7, 0.4, 0.9)(c) * shade(c), 1e-15);
      }
    }
  }
  EXPECT_GT(clipped, 0);
}

TEST(Render, ScalingAlbedoScalesImage) {
  const LightingRig rig = LightingRig::benchmark();
  std::mt19937_64 rng(1);
  NormalField n(6, 5);
  AlbedoMap k(6, 5);
  for (Eigen::Index i = 0; i < n.size(); ++i) {
    n[i] = support::random_unit(rng);
    k[i] = support::random_chroma(rng);
  }
  AlbedoMap k2 = k;
  k2.data() *= 2.5;
  const auto v1 = render(n, k, rig);
  const auto v2 = render(n, k2, rig);
  EXPECT_LT((v2.data() - 2.5 * v1.data()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Render, NoiseIsSeededAndNotClipped) {
  const LightingRig rig(Eigen::Matrix3d::Identity());
  const auto n = constant_normals(32, 32, {0, 0, 1});
  const auto k = constant_albedo(32, 32, {1, 1, 1});
  const auto a = render(n, k, rig, 0.01, 42);
  const auto b = render(n, k, rig, 0.01, 42);
  const auto c = render(n, k, rig, 0.01, 43);
  EXPECT_EQ(a.data(), b.data());
  EXPECT_NE(a.data(), c.data());
  // Channels 0 and 1 are in full shadow; noise must push some below zero.
  EXPECT_LT(a.data().row(0).minCoeff(), 0.0);
  const double std_dev = std::sqrt(a.data().row(0).squaredNorm() / double(a.size()));
  EXPECT_NEAR(std_dev, 0.01, 0.001);
}

TEST(Render, DimensionMismatchThrows) {
  const LightingRig rig(Eigen::Matrix3d::Identity());
  EXPECT_THROW(render(constant_normals(2, 2, {0, 0, 1}), constant_albedo(3, 2, {1, 1, 1}), rig), InputError);
  EXPECT_THROW(render(constant_normals(2, 2, {0, 0, 1}), constant_albedo(2, 2, {1, 1, 1}), rig, -1.0), InputError);
}

TEST(Render, MaskedOutPixelsAreZeroAndMasked) {
  const LightingRig rig(Eigen::Matrix3d::Identity());
  auto n = constant_normals(2, 1, {0, 0, 1});
  n.set_valid(1, false);
  const auto v = render(n, constant_albedo(2, 1, {1, 1, 1}), rig);
  EXPECT_TRUE(v.valid(0));
  EXPECT_FALSE(v.valid(1));
  EXPECT_EQ(v[1], Eigen::Vector3d::Zero());
}

TEST(LightingRig, SingularMatrixRejected) {
  Eigen::Matrix3d L = Eigen::Matrix3d::Identity();
  L.col(2) = L.col(0);
  EXPECT_THROW(LightingRig{L}, InputError);
  EXPECT_THROW(LightingRig{1e-12 * Eigen::Matrix3d::Ones()}, InputError);
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(0, 0) = NAN;
  EXPECT_THROW(LightingRig{bad}, InputError);
}

TEST(LightingRig, InverseTransposeConsistent) {
  const LightingRig rig = LightingRig::benchmark();
  EXPECT_LT((rig.inverse_transpose() * rig.matrix().transpose() - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  // Tiny but well-conditioned rigs are accepted: the tolerance scales with L.
  EXPECT_NO_THROW(LightingRig{1e-6 * Eigen::Matrix3d::Identity()});
}

TEST(LightingRig, BenchmarkLightsAreUnitAndTilted) {
  const LightingRig rig = LightingRig::benchmark();
  for (int c = 0; c < 3; ++c) {
    EXPECT_NEAR(rig.light(c).norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::acos(rig.light(c).z()) * 180 / M_PI, 40.0, 1e-9);
  }
}

TEST(Gradients, Examples) {
  EXPECT_EQ(gradient_from_normal({0, 0, 1}), Eigen::Vector2d(0, 0));
  EXPECT_LT((normal_from_gradient({1, 0}) - Eigen::Vector3d(1, 0, 1) / std::sqrt(2.0)).norm(), 1e-15);
}

TEST(Gradients, RoundTripIdentity) {
  std::mt19937_64 rng(9);
  NormalField n(50, 40);
  for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = support::random_unit(rng, 0.1);
  const auto back = gradients_to_normals(normals_to_gradients(n));
  EXPECT_LT((back.data() - n.data()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Gradients, NearHorizontalNormalsListed) {
  NormalField n = constant_normals(4, 1, {0, 0, 1});
  n[2] = Eigen::Vector3d(1, 0, 0);
  n[3] = Eigen::Vector3d(0.6, 0, -0.8);
  try {
    normals_to_gradients(n);
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2,0"), std::string::npos) << msg;
    EXPECT_NE(msg.find("3,0"), std::string::npos) << msg;
  }
  // Masked-out offenders are ignored.
  n.set_valid(2, false);
  n.set_valid(3, false);
  EXPECT_NO_THROW(normals_to_gradients(n));
}

TEST(Validation, ImageFiniteness) {
  RgbImage img(2, 2);
  EXPECT_NO_THROW(validate_image(img));
  img[1](0) = -1e-3;  // slightly negative noise is legal
  EXPECT_NO_THROW(validate_image(img));
  img[3](2) = INFINITY;
  EXPECT_THROW(validate_image(img), InputError);
  img.set_valid(3, false);
  EXPECT_NO_THROW(validate_image(img));
}

TEST(Validation, AlbedoAndNormals) {
  AlbedoMap k(1, 1);
  k[0] = Eigen::Vector3d(0.1, -0.1, 0.2);
  EXPECT_THROW(validate_albedo(k), InputError);
  NormalField n = constant_normals(1, 1, {0, 0, 1});
  EXPECT_NO_THROW(validate_normals(n));
  n[0] = Eigen::Vector3d(0, 0, 1.01);
  EXPECT_THROW(validate_normals(n), InputError);
  n[0] = Eigen::Vector3d(0, 0, -1);
  EXPECT_THROW(validate_normals(n), InputError);
}

TEST(Field, RejectsNonPositiveDimensions) {
  EXPECT_THROW(RgbImage(0, 3), InputError);
  EXPECT_THROW(RgbImage(3, -1), InputError);
}
