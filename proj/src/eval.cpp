#include "rgbps/eval.hpp"

#include "rgbps/parallel.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rgbps {

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + std::ptrdiff_t(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + std::ptrdiff_t(mid));
  return 0.5 * (lower + upper);
}

std::vector<double> cdf_thresholds(double max_deg, double step) {
  std::vector<double> t;
  const int n = int(std::floor(max_deg / step + 1e-9));
  for (int i = 0; i <= n; ++i) t.push_back(i * step);
  return t;
}

std::vector<double> ErrorReport::cdf(const std::vector<double>& thresholds) const {
  std::vector<double> sorted;
  sorted.reserve(std::size_t(count));
  for (Eigen::Index i = 0; i < errors.size(); ++i) {
    if (errors.valid(i)) sorted.push_back(errors[i](0));
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  for (double t : thresholds) {
    const auto n = std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.push_back(sorted.empty() ? 0.0 : double(n) / double(sorted.size()));
  }
  return out;
}

ErrorReport angular_error(const NormalField& estimate, const NormalField& truth) {
  if (!estimate.same_shape(truth)) throw InputError("angular_error: dimension mismatch");
  ErrorReport report;
  report.errors = ScalarMap(estimate.width(), estimate.height());
  std::vector<double> values;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < estimate.size(); ++i) {
    const bool valid = estimate.valid(i) && truth.valid(i);
    report.errors.set_valid(i, valid);
    if (!valid) continue;
    const double c = std::clamp(estimate[i].dot(truth[i]), -1.0, 1.0);
    const double deg = std::acos(c) * 180.0 / std::numbers::pi;
    report.errors[i](0) = deg;
    values.push_back(deg);
    sum += deg;
  }
  if (values.empty()) throw InputError("angular_error: empty mask intersection");
  report.count = Eigen::Index(values.size());
  report.mean = sum / double(values.size());
  report.median = median(std::move(values));
  return report;
}

ClassicalPsResult classical_ps(const LightCaptures& captures, const AlbedoMap& albedo, const LightingRig& rig,
                               double albedo_threshold, double residual_tolerance) {
  for (const auto& c : captures) {
    if (!c.same_shape(albedo)) throw InputError("classical_ps: capture and albedo dimensions differ");
  }
  const int w = albedo.width(), h = albedo.height();
  ClassicalPsResult out{NormalField(w, h), Mask(std::size_t(w) * h, 0), ScalarMap(w, h)};

  parallel_chunks(out.normals.size(), 4096, [&](std::ptrdiff_t begin, std::ptrdiff_t end) {
    Eigen::Matrix<double, 9, 3> A;
    Eigen::Matrix<double, 9, 1> b;
    for (auto i = begin; i < end; ++i) {
      bool valid = albedo.valid(i);
      for (const auto& c : captures) valid = valid && c.valid(i);
      out.normals.set_valid(i, false);
      out.residual.set_valid(i, false);
      if (!valid) continue;

      int rows = 0;
      for (int light = 0; light < 3; ++light) {
        for (int ch = 0; ch < 3; ++ch) {
          const double k = albedo[i](ch);
          const double meas = captures[std::size_t(light)][i](ch);
          if (!(k > albedo_threshold) || !std::isfinite(meas)) continue;
          A.row(rows) = k * rig.light(light).transpose();
          b(rows) = meas;
          ++rows;
        }
      }
      if (rows < 3) {
        out.flagged[std::size_t(i)] = 1;
        continue;
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A.topRows(rows));
      if (qr.rank() < 3) {
        out.flagged[std::size_t(i)] = 1;
        continue;
      }
      const Eigen::Vector3d raw = qr.solve(b.head(rows));
      if (!(raw.norm() > 0.0)) {
        out.flagged[std::size_t(i)] = 1;
        continue;
      }
      const Eigen::Vector3d n = raw.normalized();
      double err = 0.0, energy = 0.0;
      for (int light = 0; light < 3; ++light) {
        const double shade = std::max(0.0, rig.light(light).dot(n));
        for (int ch = 0; ch < 3; ++ch) {
          const double k = albedo[i](ch);
          const double meas = captures[std::size_t(light)][i](ch);
          if (!(k > albedo_threshold) || !std::isfinite(meas)) continue;
          err += std::pow(meas - k * shade, 2);
          energy += meas * meas;
        }
      }
      const double rel = energy > 0.0 ? std::sqrt(err / energy) : std::sqrt(err);
      out.normals[i] = n;
      out.normals.set_valid(i, true);
      out.residual[i](0) = rel;
      out.residual.set_valid(i, true);
      if (rel > residual_tolerance) out.flagged[std::size_t(i)] = 1;
    }
  });
  return out;
}

LightCaptures simulate_white_light_captures(const RgbImage& image, const AlbedoMap& albedo, double albedo_threshold) {
  if (!image.same_shape(albedo)) throw InputError("simulate_white_light_captures: dimension mismatch");
  LightCaptures captures{RgbImage(image.width(), image.height()), RgbImage(image.width(), image.height()),
                         RgbImage(image.width(), image.height())};
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const bool valid = image.valid(i) && albedo.valid(i);
    for (int light = 0; light < 3; ++light) {
      auto& cap = captures[std::size_t(light)];
      cap.set_valid(i, valid);
      if (!valid) continue;
      const double k = albedo[i](light);
      if (k > albedo_threshold) {
        cap[i] = albedo[i] * (image[i](light) / k);
      } else {
        cap[i].setConstant(std::numeric_limits<double>::quiet_NaN());
      }
    }
  }
  return captures;
}

}  // namespace rgbps
