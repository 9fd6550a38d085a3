#include "rgbps/albedo_grid.hpp"
#include "rgbps/field.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rgbps;

TEST(AlbedoGrid, SingleChromaBinIsQuadrantMidpoint) {
  const AlbedoGrid grid{1, 1, 100, 3.0};
  const Eigen::Vector3d c = grid.chroma_center(0, 0);
  EXPECT_NEAR(c.x(), 0.5, 1e-15);
  EXPECT_NEAR(c.y(), 0.5, 1e-15);
  EXPECT_NEAR(c.z(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(AlbedoGrid, FirstLuminanceCenter) {
  const AlbedoGrid grid;
  EXPECT_NEAR(grid.tau_center(0), 0.015, 1e-15);
  EXPECT_NEAR(grid.tau_center(99), 2.985, 1e-12);
  EXPECT_NEAR(grid.lum_bin_width(), 0.03, 1e-15);
}

TEST(AlbedoGrid, AllChromaCentersUnitAndStrictlyPositive) {
  const AlbedoGrid grid;
  ASSERT_EQ(grid.chroma_count(), 4096);
  for (int c = 0; c < grid.chroma_count(); ++c) {
    const Eigen::Vector3d k = grid.chroma_center(c);
    EXPECT_NEAR(k.norm(), 1.0, 1e-12);
    EXPECT_GT(k.minCoeff(), 0.0);
    EXPECT_EQ(k, grid.chroma_center(c / grid.n_azim, c % grid.n_azim));
  }
}

TEST(AlbedoGrid, CentersAreDistinct) {
  const AlbedoGrid grid{8, 8, 4, 1.0};
  for (int a = 0; a < grid.chroma_count(); ++a) {
    for (int b = a + 1; b < grid.chroma_count(); ++b) {
      EXPECT_GT((grid.chroma_center(a) - grid.chroma_center(b)).norm(), 1e-6);
    }
  }
}

TEST(AlbedoGrid, QuantizeExamples) {
  const AlbedoGrid grid;
  EXPECT_EQ(grid.quantize_tau(0.015), 0);
  EXPECT_EQ(grid.quantize_tau(10.0), 99);
  EXPECT_EQ(grid.quantize_tau(-1.0), 0);
  EXPECT_EQ(grid.quantize_tau(0.0), 0);
}

TEST(AlbedoGrid, QuantizeBoundaryGoesToLowerBin) {
  // Width 0.25 is exact in binary, so boundaries are representable.
  const AlbedoGrid grid{4, 4, 8, 2.0};
  for (int l = 1; l < grid.n_lum; ++l) EXPECT_EQ(grid.quantize_tau(l * 0.25), l - 1);
  EXPECT_EQ(grid.quantize_tau(0.25 + 1e-12), 1);
}

TEST(AlbedoGrid, QuantizeInvertsCenters) {
  for (const AlbedoGrid& grid : {AlbedoGrid{}, AlbedoGrid{64, 64, 37, 1.7}, AlbedoGrid{2, 2, 1, 3.0}}) {
    for (int l = 0; l < grid.n_lum; ++l) EXPECT_EQ(grid.quantize_tau(grid.tau_center(l)), l);
  }
}

TEST(AlbedoGrid, OutOfRangeIndicesThrow) {
  const AlbedoGrid grid;
  EXPECT_THROW(grid.chroma_center(64, 0), InputError);
  EXPECT_THROW(grid.chroma_center(0, -1), InputError);
  EXPECT_THROW(grid.chroma_center(4096), InputError);
  EXPECT_THROW(grid.tau_center(100), InputError);
}

TEST(AlbedoGrid, Validation) {
  EXPECT_NO_THROW(AlbedoGrid{}.validate());
  EXPECT_THROW((AlbedoGrid{0, 1, 1, 1.0}.validate()), InputError);
  EXPECT_THROW((AlbedoGrid{1, 1, 0, 1.0}.validate()), InputError);
  EXPECT_THROW((AlbedoGrid{1, 1, 1, 0.0}.validate()), InputError);
}

TEST(AlbedoCandidate, FactorizationRoundTrip) {
  const Eigen::Vector3d k(0.2, 0.5, 0.9);
  const auto c = AlbedoCandidate::from_albedo(k);
  EXPECT_NEAR(c.tau, k.norm(), 1e-15);
  EXPECT_NEAR(c.chroma.norm(), 1.0, 1e-15);
  EXPECT_LT((c.albedo() - k).norm(), 1e-15);
  EXPECT_THROW(AlbedoCandidate::from_albedo(Eigen::Vector3d::Zero()), InputError);
  EXPECT_THROW(AlbedoCandidate::from_albedo(Eigen::Vector3d(-0.1, 0.5, 0.5)), InputError);
}
