#include "rgbps/eval.hpp"
#include "rgbps/render.hpp"

#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rgbps {

namespace {

constexpr int kStencil = 6;

// Weights w_j with sum_j w_j f(offset_j) = integral of f over [0, 1], exact for
// polynomials of degree < n, for the nodes first, first + 1, ..., first + n - 1.
Eigen::VectorXd edge_weights(int first, int n) {
  Eigen::MatrixXd vander(n, n);
  Eigen::VectorXd moments(n);
  for (int q = 0; q < n; ++q) {
    moments(q) = 1.0 / (q + 1);
    for (int j = 0; j < n; ++j) vander(q, j) = std::pow(double(first + j), q);
  }
  return vander.partialPivLu().solve(moments);
}

class EdgeRule {
 public:
  const Eigen::VectorXd& weights(int first, int n) {
    const auto key = std::pair{first, n};
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, edge_weights(first, n)).first;
    return it->second;
  }

 private:
  std::map<std::pair<int, int>, Eigen::VectorXd> cache_;
};

}  // namespace

DepthResult integrate_normals(const NormalField& normals, const Mask& mask, double eps) {
  const int w = normals.width(), h = normals.height();
  if (mask.size() != std::size_t(normals.size())) throw InputError("integrate_normals: mask size mismatch");

  Mask active(mask.size(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) active[i] = mask[i] && normals.valid(Eigen::Index(i));

  NormalField masked = normals;
  masked.set_mask(active);
  const GradientField grad = normals_to_gradients(masked, eps);

  // Unknown numbering and 4-connected components.
  std::vector<int> unknown(active.size(), -1);
  int count = 0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]) unknown[i] = count++;
  }
  DepthResult result;
  result.depth = ScalarMap(w, h);
  result.depth.set_mask(active);
  if (count == 0) return result;

  std::vector<int> component(std::size_t(count), -1);
  std::vector<int> pins;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < active.size(); ++seed) {
    if (!active[seed] || component[std::size_t(unknown[seed])] >= 0) continue;
    const int label = int(pins.size());
    pins.push_back(unknown[seed]);
    stack.push_back(seed);
    component[std::size_t(unknown[seed])] = label;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      const int x = int(p % std::size_t(w)), y = int(p / std::size_t(w));
      const std::array<std::pair<int, int>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
      for (auto [nx, ny] : nbrs) {
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        const std::size_t q = std::size_t(ny) * w + nx;
        if (active[q] && component[std::size_t(unknown[q])] < 0) {
          component[std::size_t(unknown[q])] = label;
          stack.push_back(q);
        }
      }
    }
  }
  result.components = int(pins.size());

  // One equation per edge between 4-neighbors inside the mask.
  EdgeRule rule;
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> rhs;
  auto add_edges = [&](bool horizontal) {
    const int lines = horizontal ? h : w;
    const int length = horizontal ? w : h;
    auto at = [&](int line, int t) { return horizontal ? std::size_t(line) * w + t : std::size_t(t) * w + line; };
    const int axis = horizontal ? 0 : 1;
    for (int line = 0; line < lines; ++line) {
      int t = 0;
      while (t < length) {
        if (!active[at(line, t)]) {
          ++t;
          continue;
        }
        int end = t;
        while (end + 1 < length && active[at(line, end + 1)]) ++end;
        const int run = end - t + 1;
        const int n = std::min(kStencil, run);
        for (int e = t; e < end; ++e) {
          const int first = std::clamp(e - (kStencil / 2 - 1), t, end - n + 1);
          const auto& wts = rule.weights(first - e, n);
          double integral = 0.0;
          for (int j = 0; j < n; ++j) integral += wts(j) * grad[Eigen::Index(at(line, first + j))](axis);
          const int row = int(rhs.size());
          triplets.emplace_back(row, unknown[at(line, e + 1)], 1.0);
          triplets.emplace_back(row, unknown[at(line, e)], -1.0);
          rhs.push_back(integral);
        }
        t = end + 1;
      }
    }
  };
  add_edges(true);
  add_edges(false);

  const int edges = int(rhs.size());
  Eigen::SparseMatrix<double> A(edges, count);
  A.setFromTriplets(triplets.begin(), triplets.end());
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), edges);

  // Pinning one node per component fixes the constant offset without
  // changing the least-squares residual.
  Eigen::SparseMatrix<double> normal = A.transpose() * A;
  for (int pin : pins) normal.coeffRef(pin, pin) += 1.0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(normal);
  if (solver.info() != Eigen::Success) throw std::runtime_error("integrate_normals: factorization failed");
  Eigen::VectorXd z = solver.solve(A.transpose() * b);
  if (solver.info() != Eigen::Success) throw std::runtime_error("integrate_normals: solve failed");

  std::vector<double> sums(pins.size(), 0.0);
  std::vector<int> sizes(pins.size(), 0);
  for (int u = 0; u < count; ++u) {
    sums[std::size_t(component[std::size_t(u)])] += z(u);
    ++sizes[std::size_t(component[std::size_t(u)])];
  }
  for (int u = 0; u < count; ++u) {
    const auto c = std::size_t(component[std::size_t(u)]);
    z(u) -= sums[c] / sizes[c];
  }
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (active[i]) result.depth[Eigen::Index(i)](0) = z(unknown[i]);
  }
  result.rms_residual = edges > 0 ? std::sqrt((A * z - b).squaredNorm() / edges) : 0.0;
  return result;
}

}  // namespace rgbps
