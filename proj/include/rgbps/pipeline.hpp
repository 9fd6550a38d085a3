#pragma once

#include "rgbps/config.hpp"
#include "rgbps/eval.hpp"
#include "rgbps/field.hpp"
#include "rgbps/global_solver.hpp"
#include "rgbps/histogram.hpp"
#include "rgbps/lighting.hpp"
#include "rgbps/patch_grid.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace rgbps {

struct StageTimings {
  double histogram = 0.0;
  double local = 0.0;
  double solve = 0.0;
  double total() const { return histogram + local + solve; }
};

struct Reconstruction {
  /// Valid on pixels covered by at least one complete patch.
  NormalField normals;
  GradientField gradients;
  PatchGrid patches;
  AlbedoHistogram histogram;
  GlobalAlbedoSet albedo_set;
  /// Per patch: 0 outlier, k + 1 candidate k.
  std::vector<int> selection;
  /// Per pixel fraction of covering patches that ended as outliers.
  ScalarMap outliers;
  std::vector<IterationLog> trace;
  double objective = 0.0;
  StageTimings seconds;
};

/// Full two-stage reconstruction of one image on its mask. Throws InputError
/// when no complete patch fits inside the mask.
Reconstruction reconstruct(const RgbImage& image, const LightingRig& rig, const PipelineConfig& config);

/// CSV dumps: lum,elev,azim,value (nonzero cells only); tau,k_r,k_g,k_b,value;
/// iteration,lambda,objective,outliers (plus per-step objectives when traced).
void write_histogram_csv(const std::filesystem::path& path, const AlbedoHistogram& histogram);
void write_albedo_set_csv(const std::filesystem::path& path, const GlobalAlbedoSet& set);
void write_objective_log_csv(const std::filesystem::path& path, const std::vector<IterationLog>& trace, bool traced);

struct BenchInstance {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double median_deg = 0.0;
  double mean_deg = 0.0;
  double ps_median_deg = 0.0;
  /// Fraction of patches selected as outliers.
  double outlier_fraction = 0.0;
  int albedo_count = 0;
  StageTimings seconds;
  /// Pipeline and baseline per-pixel angular errors (degrees).
  ScalarMap errors;
  ScalarMap ps_errors;
};

struct BenchReport {
  std::vector<BenchInstance> instances;
  int failures = 0;
  /// Median over all pixels of all successful instances.
  double median_deg = 0.0;
  double ps_median_deg = 0.0;
  /// Per pixel location, the median across instances.
  ScalarMap location_median;
  /// Medians of location_median within / beyond the boundary distance of an
  /// image diagonal (the albedo boundaries of the generator).
  double boundary_median_deg = 0.0;
  double interior_median_deg = 0.0;
  double boundary_distance = 4.0;
  /// Instances where the baseline median is <= the pipeline median.
  int baseline_wins = 0;
  std::vector<double> thresholds;
  std::vector<double> cdf;
  std::vector<double> ps_cdf;
};

/// Instance i uses seed derive_seed(config.seed, i). Instances run one after
/// another; a failing instance is recorded and the run continues. `progress`
/// is called after each instance.
BenchReport run_bench(const PipelineConfig& config, const LightingRig& rig, int count,
                      const std::function<void(const BenchInstance&)>& progress = {});

/// Writes report.csv (deterministic, no timings), timing.csv, cdf.csv,
/// location_median.pfm and failures.csv into `dir`.
void write_bench_report(const std::filesystem::path& dir, const BenchReport& report);

}  // namespace rgbps
