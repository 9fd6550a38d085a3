#include "rgbps/histogram.hpp"

#include "patch_kernel.hpp"
#include "rgbps/parallel.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace rgbps {

namespace {

// Sums of `values` over every side x side window, indexed by anchor.
std::vector<double> window_sums(const std::vector<double>& values, int width, int height, int side) {
  const int ax = width - side + 1;
  const int ay = height - side + 1;
  std::vector<double> rows(std::size_t(height) * ax);
  for (int y = 0; y < height; ++y) {
    const double* row = values.data() + std::size_t(y) * width;
    for (int x = 0; x < ax; ++x) {
      double s = 0.0;
      for (int d = 0; d < side; ++d) s += row[x + d];
      rows[std::size_t(y) * ax + x] = s;
    }
  }
  std::vector<double> out(std::size_t(ay) * ax, 0.0);
  for (int y = 0; y < ay; ++y) {
    for (int d = 0; d < side; ++d) {
      const double* src = rows.data() + std::size_t(y + d) * ax;
      double* dst = out.data() + std::size_t(y) * ax;
      for (int x = 0; x < ax; ++x) dst[x] += src[x];
    }
  }
  return out;
}

}  // namespace

AlbedoHistogram::AlbedoHistogram(const AlbedoGrid& grid) : grid_(grid) {
  grid.validate();
  values_ = Eigen::MatrixXd::Zero(grid.n_lum, grid.chroma_count());
}

void accumulate_histogram(AlbedoHistogram& histogram, int chroma_index, const std::vector<PatchFit>& fits,
                          double h_max) {
  if (!(h_max > 0.0)) throw InputError("h_max must be positive");
  for (const auto& fit : fits) {
    if (!fit.valid) continue;
    const double vote = std::max(0.0, h_max - fit.score);
    if (vote > 0.0) histogram.at(histogram.grid().quantize_tau(fit.tau), chroma_index) += vote;
  }
}

AlbedoHistogram build_histogram(const RgbImage& image, const LightingRig& rig, const PatchGrid& patches,
                                const BasisMatrix& basis, const AlbedoGrid& grid, double h_max, double eps_tau) {
  if (!(h_max > 0.0)) throw InputError("h_max must be positive");
  if (patches.side() != basis.geometry().patch_side) throw InputError("build_histogram: patch size does not match basis");
  AlbedoHistogram histogram(grid);
  if (patches.empty()) return histogram;

  const int side = patches.side();
  const int ax = image.width() - side + 1;
  const double pixels = side * side;
  std::vector<double> energies(std::size_t(patches.size()));
  for (int m = 0; m < patches.size(); ++m) energies[std::size_t(m)] = detail::patch_energy(image, patches, m);

  parallel_for(grid.chroma_count(), [&](std::ptrdiff_t cc) {
    const int c = int(cc);
    const Eigen::Vector3d chroma = grid.chroma_center(c);
    const PixelInversion inversion = invert_pixels(image, rig, chroma, eps_tau);
    const Eigen::Matrix3d shading = chroma.asDiagonal() * rig.matrix().transpose();

    // |v - tau_m M n| = |M (w - tau_m n)| >= sigma_min(M) |tau(p) - tau_m| for unit n,
    // so the score is bounded below by sigma_min^2 * sum (tau(p) - mean)^2 / energy.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(shading);
    const double sigma_min = svd.singularValues()(2);
    const double sigma_sq = sigma_min * sigma_min;

    std::vector<double> tau_sq(inversion.tau.size()), invalid(inversion.tau.size());
    for (std::size_t i = 0; i < tau_sq.size(); ++i) {
      tau_sq[i] = inversion.tau[i] * inversion.tau[i];
      invalid[i] = inversion.valid[i] ? 0.0 : 1.0;
    }
    const auto sum_tau = window_sums(inversion.tau, image.width(), image.height(), side);
    const auto sum_tau_sq = window_sums(tau_sq, image.width(), image.height(), side);
    const auto holes = window_sums(invalid, image.width(), image.height(), side);

    std::vector<int> survivors;
    for (int m = 0; m < patches.size(); ++m) {
      const auto& a = patches.anchor(m);
      const std::size_t w = std::size_t(a.y) * ax + a.x;
      const double energy = energies[std::size_t(m)];
      if (holes[w] > 0.5 || energy == 0.0) continue;
      const double mean = sum_tau[w] / pixels;
      const double spread = std::max(0.0, sum_tau_sq[w] - pixels * mean * mean);
      if (sigma_sq * spread / energy > h_max * (1.0 + 1e-9)) continue;
      survivors.push_back(m);
    }

    Eigen::VectorXd column = Eigen::VectorXd::Zero(grid.n_lum);
    constexpr std::size_t batch = 512;
    std::vector<double> taus, batch_energy, scores;
    Eigen::MatrixXd gradients;
    for (std::size_t begin = 0; begin < survivors.size(); begin += batch) {
      const std::size_t end = std::min(survivors.size(), begin + batch);
      const std::span<const int> which(survivors.data() + begin, end - begin);
      taus.clear();
      batch_energy.clear();
      for (int m : which) {
        taus.push_back(detail::patch_mean_tau(inversion, patches, m));
        batch_energy.push_back(energies[std::size_t(m)]);
      }
      scores.assign(which.size(), 0.0);
      detail::gather_gradients(inversion, patches, which, gradients);
      const Eigen::MatrixXd predicted = basis.matrix() * (basis.projector() * gradients);
      detail::score_batch(image, shading, patches, which, predicted, taus, batch_energy, scores);
      for (std::size_t j = 0; j < which.size(); ++j) {
        const double vote = std::max(0.0, h_max - scores[j]);
        if (vote > 0.0) column(grid.quantize_tau(taus[j])) += vote;
      }
    }
    histogram.values().col(c) = column;
  });
  return histogram;
}

GlobalAlbedoSet select_albedo_set(const AlbedoHistogram& histogram, int K) {
  if (K < 1) throw InputError("select_albedo_set: K must be >= 1");
  const auto& grid = histogram.grid();
  const auto& h = histogram.values();
  const int nl = grid.n_lum, ne = grid.n_elev, na = grid.n_azim;
  auto value = [&](int l, int e, int a) { return h(l, e * na + a); };

  std::vector<std::pair<long, HistogramPeak>> peaks;
  for (int l = 0; l < nl; ++l) {
    for (int e = 0; e < ne; ++e) {
      for (int a = 0; a < na; ++a) {
        const double v = value(l, e, a);
        if (!(v > 0.0)) continue;
        bool peak = true;
        for (int dl = -1; dl <= 1 && peak; ++dl) {
          for (int de = -1; de <= 1 && peak; ++de) {
            for (int da = -1; da <= 1 && peak; ++da) {
              const int ll = l + dl, ee = e + de, aa = a + da;
              if ((dl == 0 && de == 0 && da == 0) || ll < 0 || ee < 0 || aa < 0 || ll >= nl || ee >= ne || aa >= na) {
                continue;
              }
              const double u = value(ll, ee, aa);
              // Neighbors with a lower linear index win ties.
              const bool lower = dl < 0 || (dl == 0 && (de < 0 || (de == 0 && da < 0)));
              if (u > v || (u == v && lower)) peak = false;
            }
          }
        }
        if (peak) peaks.push_back({(long(l) * ne + e) * na + a, HistogramPeak{l, e, a, v}});
      }
    }
  }
  if (peaks.empty()) throw InputError("select_albedo_set: histogram is empty");

  std::sort(peaks.begin(), peaks.end(), [](const auto& x, const auto& y) {
    if (x.second.value != y.second.value) return x.second.value > y.second.value;
    return x.first < y.first;
  });

  GlobalAlbedoSet set;
  if (int(peaks.size()) < K) {
    set.warning = "histogram has only " + std::to_string(peaks.size()) + " peaks, fewer than K=" + std::to_string(K);
  }
  const std::size_t take = std::min(peaks.size(), std::size_t(K));
  for (std::size_t i = 0; i < take; ++i) {
    const auto& p = peaks[i].second;
    set.peaks.push_back(p);
    set.albedos.push_back({grid.tau_center(p.lum), grid.chroma_center(p.elev, p.azim)});
  }
  return set;
}

}  // namespace rgbps
