#pragma once

#include "rgbps/field.hpp"

#include <Eigen/Core>

#include <vector>

namespace rgbps {

/// Exponents (dx, dy) of one depth monomial x^dx * y^dy.
struct Monomial {
  int dx = 0;
  int dy = 0;
};

/// Square patch with a polynomial depth model of total degree <= `degree`
/// (constant term excluded). Pixel offsets are centered on the patch, e.g.
/// {-3.5, ..., 3.5} for an 8-pixel side.
struct PatchGeometry {
  int patch_side = 8;
  int degree = 5;

  int pixel_count() const { return patch_side * patch_side; }
  /// (D+1)(D+2)/2 - 1.
  int coeff_count() const { return (degree + 1) * (degree + 2) / 2 - 1; }
  /// Coefficient ordering: ascending total degree, then ascending dx:
  /// (0,1) (1,0) (0,2) (1,1) (2,0) (0,3) ...
  std::vector<Monomial> monomials() const;
  /// Centered coordinate of the i-th row or column of the patch.
  double offset(int i) const { return i - 0.5 * (patch_side - 1); }
};

/// Shared gradient basis G of the local shape model, mapping coefficients a
/// to concatenated per-pixel gradients n = G a. Pixel i of the patch (row-major,
/// i = iy * side + ix) owns rows 2i (d/dx) and 2i+1 (d/dy).
class BasisMatrix {
 public:
  /// Throws InputError on invalid geometry and std::runtime_error if G is
  /// rank deficient or the cached projector fails P G = I to 1e-8.
  explicit BasisMatrix(const PatchGeometry& geometry = {});

  const PatchGeometry& geometry() const { return geometry_; }
  int rows() const { return int(basis_.rows()); }
  int coeffs() const { return int(basis_.cols()); }

  /// G, (2 * side^2) x n_coeff.
  const Eigen::MatrixXd& matrix() const { return basis_; }
  /// P = (G^T G)^{-1} G^T, from a column-pivoted QR solve.
  const Eigen::MatrixXd& projector() const { return projector_; }
  /// W with |G a| = |W a| for all a (R factor of G with the pivot undone).
  const Eigen::MatrixXd& whitener() const { return whitener_; }
  /// 2-norm condition number of G.
  double condition_number() const { return condition_; }

 private:
  PatchGeometry geometry_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd projector_;
  Eigen::MatrixXd whitener_;
  double condition_ = 0.0;
};

/// Least-squares coefficients for a concatenated gradient vector.
Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& gradients, const BasisMatrix& basis);

/// Concatenated gradients G a.
Eigen::VectorXd evaluate_gradients(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const BasisMatrix& basis);

/// Unit normals (3 x side^2) of the polynomial surface with coefficients a.
Eigen::Matrix3Xd evaluate_normals(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const BasisMatrix& basis);

/// Depth of the polynomial model (without constant term) at patch offset (x, y).
double evaluate_depth(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const PatchGeometry& geometry, double x,
                      double y);

}  // namespace rgbps
