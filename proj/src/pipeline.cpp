#include "rgbps/pipeline.hpp"

#include "rgbps/io.hpp"
#include "rgbps/local_inference.hpp"
#include "rgbps/patch_basis.hpp"
#include "rgbps/synth.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <stdexcept>

namespace rgbps {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

}  // namespace

Reconstruction reconstruct(const RgbImage& image, const LightingRig& rig, const PipelineConfig& config) {
  config.validate();
  validate_image(image);

  Reconstruction out;
  out.patches = PatchGrid::from_field(image, config.geometry.patch_side);
  if (out.patches.empty()) throw InputError("no complete patch fits inside the image mask");
  const BasisMatrix basis(config.geometry);

  auto start = Clock::now();
  out.histogram = build_histogram(image, rig, out.patches, basis, config.grid, config.h_max, config.eps_tau);
  out.albedo_set = select_albedo_set(out.histogram, config.K);
  out.seconds.histogram = seconds_since(start);

  start = Clock::now();
  const LocalDistributions dists =
      local_distributions(image, rig, out.albedo_set.albedos, out.patches, basis, config.eps_tau);
  out.seconds.local = seconds_since(start);

  start = Clock::now();
  SolveResult solved = solve(dists, out.patches, basis, config.solver);
  out.seconds.solve = seconds_since(start);

  out.normals = std::move(solved.normals);
  out.gradients = std::move(solved.gradients);
  out.outliers = outlier_fraction(out.patches, solved.selection);
  out.selection = std::move(solved.selection);
  out.trace = std::move(solved.trace);
  out.objective = solved.objective;
  return out;
}

void write_histogram_csv(const std::filesystem::path& path, const AlbedoHistogram& histogram) {
  auto out = open_output(path);
  const auto& grid = histogram.grid();
  out << "lum,elev,azim,value\n";
  for (int e = 0; e < grid.n_elev; ++e) {
    for (int a = 0; a < grid.n_azim; ++a) {
      const int c = e * grid.n_azim + a;
      for (int l = 0; l < grid.n_lum; ++l) {
        const double v = histogram.at(l, c);
        if (v != 0.0) out << l << "," << e << "," << a << "," << format_double(v) << "\n";
      }
    }
  }
}

void write_albedo_set_csv(const std::filesystem::path& path, const GlobalAlbedoSet& set) {
  auto out = open_output(path);
  out << "tau,k_r,k_g,k_b,value\n";
  for (std::size_t k = 0; k < set.albedos.size(); ++k) {
    const auto& a = set.albedos[k];
    out << format_double(a.tau) << "," << format_double(a.chroma.x()) << "," << format_double(a.chroma.y()) << ","
        << format_double(a.chroma.z()) << "," << (k < set.peaks.size() ? format_double(set.peaks[k].value) : "")
        << "\n";
  }
}

void write_objective_log_csv(const std::filesystem::path& path, const std::vector<IterationLog>& trace,
                             bool traced) {
  auto out = open_output(path);
  out << "iteration,lambda,objective,outliers";
  if (traced) out << ",objective_start,objective_after_n";
  out << "\n";
  for (const auto& log : trace) {
    out << log.iteration << "," << format_double(log.lambda) << "," << format_double(log.objective_after_a) << ","
        << log.outliers;
    if (traced) out << "," << format_double(log.objective_start) << "," << format_double(log.objective_after_n);
    out << "\n";
  }
}

BenchReport run_bench(const PipelineConfig& config, const LightingRig& rig, int count,
                      const std::function<void(const BenchInstance&)>& progress) {
  config.validate();
  if (count < 1) throw InputError("bench: instance count must be >= 1");
  const int size = config.synth.image_size;

  BenchReport report;
  report.thresholds = cdf_thresholds();
  std::vector<double> pooled, ps_pooled;
  for (int i = 0; i < count; ++i) {
    BenchInstance inst;
    inst.index = i;
    inst.seed = derive_seed(config.seed, std::uint64_t(i));
    try {
      const SynthInstance synth = gen_instance(config.synth, rig, inst.seed);
      const Reconstruction rec = reconstruct(synth.image, rig, config);
      const ErrorReport err = angular_error(rec.normals, synth.normals);
      const LightCaptures captures = simulate_white_light_captures(synth.image, synth.albedo);
      const ClassicalPsResult ps = classical_ps(captures, synth.albedo, rig);
      const ErrorReport ps_err = angular_error(ps.normals, synth.normals);

      inst.ok = true;
      inst.median_deg = err.median;
      inst.mean_deg = err.mean;
      inst.ps_median_deg = ps_err.median;
      int outliers = 0;
      for (int s : rec.selection) outliers += s == 0;
      inst.outlier_fraction = rec.selection.empty() ? 0.0 : double(outliers) / double(rec.selection.size());
      inst.albedo_count = int(rec.albedo_set.albedos.size());
      inst.seconds = rec.seconds;
      inst.errors = err.errors;
      inst.ps_errors = ps_err.errors;
      for (Eigen::Index p = 0; p < err.errors.size(); ++p) {
        if (err.errors.valid(p)) pooled.push_back(err.errors[p](0));
        if (ps_err.errors.valid(p)) ps_pooled.push_back(ps_err.errors[p](0));
      }
      if (inst.ps_median_deg <= inst.median_deg) ++report.baseline_wins;
    } catch (const std::exception& e) {
      inst.ok = false;
      inst.error = e.what();
      ++report.failures;
    }
    if (progress) progress(inst);
    report.instances.push_back(std::move(inst));
  }

  report.median_deg = median(pooled);
  report.ps_median_deg = median(ps_pooled);
  auto cdf_of = [&](std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    for (double t : report.thresholds) {
      const auto n = std::upper_bound(values.begin(), values.end(), t) - values.begin();
      out.push_back(values.empty() ? 0.0 : double(n) / double(values.size()));
    }
    return out;
  };
  report.cdf = cdf_of(pooled);
  report.ps_cdf = cdf_of(ps_pooled);

  report.location_median = ScalarMap(size, size);
  std::vector<double> boundary, interior, samples;
  for (Eigen::Index p = 0; p < report.location_median.size(); ++p) {
    samples.clear();
    for (const auto& inst : report.instances) {
      if (inst.ok && inst.errors.valid(p)) samples.push_back(inst.errors[p](0));
    }
    report.location_median.set_valid(p, !samples.empty());
    if (samples.empty()) continue;
    const double m = median(samples);
    report.location_median[p](0) = m;
    const int x = int(p % size), y = int(p / size);
    (diagonal_distance(x, y, size) <= report.boundary_distance ? boundary : interior).push_back(m);
  }
  report.boundary_median_deg = median(boundary);
  report.interior_median_deg = median(interior);
  return report;
}

void write_bench_report(const std::filesystem::path& dir, const BenchReport& report) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output(dir / "report.csv");
    out << "instance,seed,status,median_deg,mean_deg,ps_median_deg,outlier_fraction,albedo_count\n";
    for (const auto& inst : report.instances) {
      out << inst.index << "," << inst.seed << "," << (inst.ok ? "ok" : "failed");
      if (inst.ok) {
        out << "," << format_double(inst.median_deg) << "," << format_double(inst.mean_deg) << ","
            << format_double(inst.ps_median_deg) << "," << format_double(inst.outlier_fraction) << ","
            << inst.albedo_count;
      } else {
        out << ",,,,,";
      }
      out << "\n";
    }
    out << "summary,median_deg," << format_double(report.median_deg) << "\n";
    out << "summary,ps_median_deg," << format_double(report.ps_median_deg) << "\n";
    out << "summary,boundary_median_deg," << format_double(report.boundary_median_deg) << "\n";
    out << "summary,interior_median_deg," << format_double(report.interior_median_deg) << "\n";
    out << "summary,baseline_wins," << report.baseline_wins << "\n";
    out << "summary,failures," << report.failures << "\n";
  }
  {
    auto out = open_output(dir / "timing.csv");
    out << "instance,histogram_s,local_s,solve_s,total_s\n";
    for (const auto& inst : report.instances) {
      out << inst.index << "," << inst.seconds.histogram << "," << inst.seconds.local << "," << inst.seconds.solve
          << "," << inst.seconds.total() << "\n";
    }
  }
  {
    auto out = open_output(dir / "cdf.csv");
    out << "threshold_deg,pipeline,classical_ps\n";
    for (std::size_t i = 0; i < report.thresholds.size(); ++i) {
      out << format_double(report.thresholds[i]) << "," << format_double(report.cdf[i]) << ","
          << format_double(report.ps_cdf[i]) << "\n";
    }
  }
  {
    auto out = open_output(dir / "failures.csv");
    out << "instance,seed,error\n";
    for (const auto& inst : report.instances) {
      if (inst.ok) continue;
      std::string msg = inst.error;
      for (auto& ch : msg) {
        if (ch == '"') ch = '\'';
        if (ch == '\n') ch = ' ';
      }
      out << inst.index << "," << inst.seed << ",\"" << msg << "\"\n";
    }
  }
  if (report.location_median.size() > 0) write_pfm(dir / "location_median.pfm", report.location_median);
}

}  // namespace rgbps
