#include "rgbps/patch_basis.hpp"

#include "rgbps/render.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace rgbps {

namespace {

double ipow(double base, int exponent) {
  double r = 1.0;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

}  // namespace

std::vector<Monomial> PatchGeometry::monomials() const {
  std::vector<Monomial> terms;
  terms.reserve(std::size_t(std::max(coeff_count(), 0)));
  for (int total = 1; total <= degree; ++total) {
    for (int dx = 0; dx <= total; ++dx) terms.push_back({dx, total - dx});
  }
  return terms;
}

BasisMatrix::BasisMatrix(const PatchGeometry& geometry) : geometry_(geometry) {
  if (geometry.patch_side < 2) throw InputError("patch_side must be >= 2");
  if (geometry.degree < 1) throw InputError("polynomial degree must be >= 1");
  if (2 * geometry.pixel_count() < geometry.coeff_count()) {
    throw InputError("patch has fewer gradient samples than polynomial coefficients");
  }

  const int side = geometry.patch_side;
  const auto terms = geometry.monomials();
  basis_.resize(2 * geometry.pixel_count(), Eigen::Index(terms.size()));
  for (int iy = 0; iy < side; ++iy) {
    for (int ix = 0; ix < side; ++ix) {
      const int row = 2 * (iy * side + ix);
      const double x = geometry.offset(ix);
      const double y = geometry.offset(iy);
      for (std::size_t j = 0; j < terms.size(); ++j) {
        const auto [dx, dy] = terms[j];
        basis_(row, Eigen::Index(j)) = dx > 0 ? dx * ipow(x, dx - 1) * ipow(y, dy) : 0.0;
        basis_(row + 1, Eigen::Index(j)) = dy > 0 ? dy * ipow(x, dx) * ipow(y, dy - 1) : 0.0;
      }
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis_);
  if (qr.rank() < basis_.cols()) throw std::runtime_error("polynomial gradient basis is rank deficient");
  projector_ = qr.solve(Eigen::MatrixXd::Identity(basis_.rows(), basis_.rows()));

  const Eigen::Index n = basis_.cols();
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
  whitener_ = r * qr.colsPermutation().transpose();

  const double identity_error =
      (projector_ * basis_ - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(identity_error <= 1e-8)) throw std::runtime_error("projector fails P*G = I");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis_);
  const auto& s = svd.singularValues();
  condition_ = s(0) / s(s.size() - 1);
}

Eigen::VectorXd project(const Eigen::Ref<const Eigen::VectorXd>& gradients, const BasisMatrix& basis) {
  if (gradients.size() != basis.rows()) throw InputError("project: gradient vector has wrong length");
  if (!gradients.allFinite()) throw InputError("project: non-finite gradient values");
  return basis.projector() * gradients;
}

Eigen::VectorXd evaluate_gradients(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const BasisMatrix& basis) {
  if (coeffs.size() != basis.coeffs()) throw InputError("evaluate: coefficient vector has wrong length");
  if (!coeffs.allFinite()) throw InputError("evaluate: non-finite coefficients");
  return basis.matrix() * coeffs;
}

Eigen::Matrix3Xd evaluate_normals(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const BasisMatrix& basis) {
  const Eigen::VectorXd g = evaluate_gradients(coeffs, basis);
  const Eigen::Index pixels = g.size() / 2;
  Eigen::Matrix3Xd normals(3, pixels);
  for (Eigen::Index i = 0; i < pixels; ++i) normals.col(i) = normal_from_gradient(g.segment<2>(2 * i));
  return normals;
}

double evaluate_depth(const Eigen::Ref<const Eigen::VectorXd>& coeffs, const PatchGeometry& geometry, double x,
                      double y) {
  const auto terms = geometry.monomials();
  if (coeffs.size() != Eigen::Index(terms.size())) throw InputError("evaluate_depth: wrong coefficient count");
  double z = 0.0;
  for (std::size_t j = 0; j < terms.size(); ++j) z += coeffs(Eigen::Index(j)) * ipow(x, terms[j].dx) * ipow(y, terms[j].dy);
  return z;
}

}  // namespace rgbps
