// rgbps command-line interface.
//
// Exit codes: 0 success, 1 runtime failure, 2 bad input. Failures print one
// JSON object on stderr: {"command": ..., "error": ..., "kind": "input"|"runtime"}.

#include "rgbps/config.hpp"
#include "rgbps/eval.hpp"
#include "rgbps/io.hpp"
#include "rgbps/parallel.hpp"
#include "rgbps/pipeline.hpp"
#include "rgbps/preprocess.hpp"
#include "rgbps/render.hpp"
#include "rgbps/synth.hpp"

#include <CLI/CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> overrides;

  rgbps::PipelineConfig load() const {
    rgbps::PipelineConfig config = file.empty() ? rgbps::PipelineConfig{} : rgbps::PipelineConfig::load(file);
    config.apply(overrides);
    config.validate();
    return config;
  }
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.file, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", args.overrides, "Override a configuration key (key=value), repeatable");
}

rgbps::LightingRig rig_or_default(const std::string& path) {
  return path.empty() ? rgbps::LightingRig::benchmark() : rgbps::read_rig(path);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

rgbps::ScalarMap mask_map(const rgbps::Mask& mask, int width, int height) {
  rgbps::ScalarMap map(width, height);
  for (std::size_t i = 0; i < mask.size(); ++i) map[Eigen::Index(i)](0) = mask[i] ? 1.0 : 0.0;
  return map;
}

void print_json(const json& j) { std::cout << j.dump() << std::endl; }

// ---------------------------------------------------------------- synth

struct SynthArgs {
  ConfigArgs config;
  std::string out = "synth";
  std::string rig;
  int count = 1;
};

void run_synth(const SynthArgs& args) {
  const auto config = args.config.load();
  const auto rig = rig_or_default(args.rig);
  if (args.count < 1) throw rgbps::InputError("--count must be >= 1");
  const fs::path root(args.out);
  ensure_dir(root);
  std::ofstream index(root / "index.csv");
  if (!index) throw std::runtime_error("cannot write " + (root / "index.csv").string());
  index << "instance,seed,dir\n";
  for (int i = 0; i < args.count; ++i) {
    const auto seed = rgbps::derive_seed(config.seed, std::uint64_t(i));
    std::ostringstream name;
    name << "instance_" << std::setw(4) << std::setfill('0') << i;
    const fs::path dir = root / name.str();
    ensure_dir(dir);
    const auto inst = rgbps::gen_instance(config.synth, rig, seed);
    rgbps::write_pfm(dir / "image.pfm", inst.image);
    rgbps::write_pfm(dir / "gt_normals.pfm", inst.normals);
    rgbps::write_pfm(dir / "gt_albedo.pfm", inst.albedo);
    rgbps::write_pfm(dir / "gt_depth.pfm", inst.depth);
    rgbps::write_rig(dir / "rig.txt", rig);
    index << i << "," << seed << "," << name.str() << "\n";
  }
  print_json({{"command", "synth"}, {"instances", args.count}, {"out", root.string()}});
}

// ---------------------------------------------------------------- render

struct RenderArgs {
  std::string normals, albedo, rig, out = "image.pfm";
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

void run_render(const RenderArgs& args) {
  const auto normals = rgbps::read_normals_pfm(args.normals);
  const auto albedo = rgbps::read_albedo_pfm(args.albedo);
  const auto rig = rig_or_default(args.rig);
  const auto image = rgbps::render(normals, albedo, rig, args.noise_sigma, args.seed);
  rgbps::write_pfm(args.out, image);
  print_json({{"command", "render"}, {"out", args.out}});
}

// ---------------------------------------------------------------- reconstruct

struct ReconstructArgs {
  ConfigArgs config;
  std::string image, rig, mask, out = "reconstruction";
  bool dump_histogram = false;
  bool objective_log = false;
  bool preprocess = false;
  bool no_demosaic = false;
  std::string bayer = "RGGB";
};

void run_reconstruct(const ReconstructArgs& args) {
  auto config = args.config.load();
  const auto rig = rgbps::read_rig(args.rig);
  const fs::path out(args.out);

  rgbps::RgbImage image;
  Eigen::Vector3d gains = Eigen::Vector3d::Ones();
  if (args.preprocess) {
    const auto raw = rgbps::read_pfm(args.image);
    rgbps::PreprocessResult pre;
    if (raw.channels == 1 && !args.no_demosaic) {
      pre = rgbps::preprocess_bayer(rgbps::read_scalar_pfm(args.image), rgbps::parse_bayer_pattern(args.bayer),
                                    config.mask_threshold);
    } else if (raw.channels == 3) {
      pre = rgbps::preprocess_rgb(rgbps::read_rgb_pfm(args.image), config.mask_threshold);
    } else {
      throw rgbps::InputError("--no-demosaic requires a 3-channel image");
    }
    image = std::move(pre.image);
    gains = pre.gains;
  } else {
    image = rgbps::read_rgb_pfm(args.image);
  }
  if (!args.mask.empty()) {
    const auto mask = rgbps::read_scalar_pfm(args.mask);
    if (!mask.same_shape(image)) throw rgbps::InputError("mask dimensions differ from the image");
    for (Eigen::Index i = 0; i < image.size(); ++i) {
      if (!(mask.valid(i) && mask[i](0) > 0.5)) image.set_valid(i, false);
    }
  }

  config.solver.trace_objective = args.objective_log;
  const auto rec = rgbps::reconstruct(image, rig, config);

  ensure_dir(out);
  rgbps::write_pfm(out / "normals.pfm", rec.normals);
  rgbps::write_normals_png(out / "normals_vis.png", rec.normals);
  rgbps::write_gray_png(out / "outliers.png", rec.outliers);
  rgbps::write_pfm(out / "outliers.pfm", rec.outliers);
  rgbps::write_albedo_set_csv(out / "albedos.csv", rec.albedo_set);
  if (args.preprocess) {
    std::ofstream g(out / "gains.csv");
    g << "r,g,b\n"
      << rgbps::format_double(gains(0)) << "," << rgbps::format_double(gains(1)) << ","
      << rgbps::format_double(gains(2)) << "\n";
  }
  if (args.dump_histogram) rgbps::write_histogram_csv(out / "histogram.csv", rec.histogram);
  if (args.objective_log) rgbps::write_objective_log_csv(out / "objective.csv", rec.trace, true);

  int outliers = 0;
  for (int s : rec.selection) outliers += s == 0;
  json summary = {{"command", "reconstruct"},
                  {"out", out.string()},
                  {"patches", rec.patches.size()},
                  {"albedos", rec.albedo_set.albedos.size()},
                  {"outlier_patches", outliers},
                  {"objective", rec.objective},
                  {"seconds", rec.seconds.total()}};
  if (!rec.albedo_set.warning.empty()) summary["warning"] = rec.albedo_set.warning;
  print_json(summary);
}

// ---------------------------------------------------------------- baseline-ps

struct BaselineArgs {
  std::vector<std::string> captures;
  std::string image, albedo, rig, out = "baseline";
  double tolerance = 1e-2;
};

void run_baseline(const BaselineArgs& args) {
  const auto albedo = rgbps::read_albedo_pfm(args.albedo);
  const auto rig = rgbps::read_rig(args.rig);
  rgbps::LightCaptures captures;
  if (!args.captures.empty()) {
    if (args.captures.size() != 3) throw rgbps::InputError("--captures needs exactly three files");
    for (std::size_t i = 0; i < 3; ++i) captures[i] = rgbps::read_rgb_pfm(args.captures[i]);
  } else if (!args.image.empty()) {
    captures = rgbps::simulate_white_light_captures(rgbps::read_rgb_pfm(args.image), albedo);
  } else {
    throw rgbps::InputError("baseline-ps needs --captures or --image");
  }
  const auto ps = rgbps::classical_ps(captures, albedo, rig, 1e-6, args.tolerance);
  const fs::path out(args.out);
  ensure_dir(out);
  rgbps::write_pfm(out / "normals.pfm", ps.normals);
  rgbps::write_pfm(out / "residual.pfm", ps.residual);
  rgbps::write_gray_png(out / "flagged.png", mask_map(ps.flagged, albedo.width(), albedo.height()));
  long flagged = 0;
  for (auto f : ps.flagged) flagged += f;
  print_json({{"command", "baseline-ps"}, {"out", out.string()}, {"flagged", flagged}});
}

// ---------------------------------------------------------------- integrate

struct IntegrateArgs {
  std::string normals, out = "depth.pfm";
  double eps = 1e-6;
};

void run_integrate(const IntegrateArgs& args) {
  const auto normals = rgbps::read_normals_pfm(args.normals);
  const auto result = rgbps::integrate_normals(normals, normals.mask(), args.eps);
  rgbps::write_pfm(args.out, result.depth);
  print_json({{"command", "integrate"},
              {"out", args.out},
              {"rms_residual", result.rms_residual},
              {"components", result.components}});
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string estimate, truth, out = "eval";
};

void run_eval(const EvalArgs& args) {
  const auto est = rgbps::read_normals_pfm(args.estimate);
  const auto truth = rgbps::read_normals_pfm(args.truth);
  const auto report = rgbps::angular_error(est, truth);
  const fs::path out(args.out);
  ensure_dir(out);
  rgbps::write_pfm(out / "error_map.pfm", report.errors);
  {
    std::ofstream f(out / "report.csv");
    f << "metric,value\n"
      << "median_deg," << rgbps::format_double(report.median) << "\n"
      << "mean_deg," << rgbps::format_double(report.mean) << "\n"
      << "pixels," << report.count << "\n";
  }
  {
    const auto thresholds = rgbps::cdf_thresholds();
    const auto cdf = report.cdf(thresholds);
    std::ofstream f(out / "cdf.csv");
    f << "threshold_deg,fraction\n";
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
      f << rgbps::format_double(thresholds[i]) << "," << rgbps::format_double(cdf[i]) << "\n";
    }
  }
  print_json({{"command", "eval"}, {"median_deg", report.median}, {"mean_deg", report.mean}, {"pixels", report.count}});
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  ConfigArgs config;
  std::string out = "bench", rig;
  int count = 50;
  bool quiet = false;
};

void run_bench_cmd(const BenchArgs& args) {
  const auto config = args.config.load();
  const auto rig = rig_or_default(args.rig);
  const auto report = rgbps::run_bench(config, rig, args.count, [&](const rgbps::BenchInstance& inst) {
    if (args.quiet) return;
    json line = {{"instance", inst.index}, {"ok", inst.ok}};
    if (inst.ok) {
      line["median_deg"] = inst.median_deg;
      line["ps_median_deg"] = inst.ps_median_deg;
      line["seconds"] = inst.seconds.total();
    } else {
      line["error"] = inst.error;
    }
    std::cerr << line.dump() << std::endl;
  });
  rgbps::write_bench_report(args.out, report);
  print_json({{"command", "bench"},
              {"out", args.out},
              {"instances", args.count},
              {"failures", report.failures},
              {"median_deg", report.median_deg},
              {"ps_median_deg", report.ps_median_deg},
              {"boundary_median_deg", report.boundary_median_deg},
              {"interior_median_deg", report.interior_median_deg}});
  if (report.failures == args.count) throw std::runtime_error("every bench instance failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-image RGB photometric stereo with piecewise-constant albedo"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("-j,--threads", threads, "Worker threads (default: RGBPS_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic benchmark instances");
  add_config_options(synth_cmd, synth.config);
  synth_cmd->add_option("--out", synth.out, "Output directory");
  synth_cmd->add_option("--rig", synth.rig, "Lighting rig file (default: benchmark rig)");
  synth_cmd->add_option("-n,--count", synth.count, "Number of instances");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Render an RGB image from normals and albedo");
  render_cmd->add_option("--normals", render.normals, "Normal map PFM")->required();
  render_cmd->add_option("--albedo", render.albedo, "Albedo map PFM")->required();
  render_cmd->add_option("--rig", render.rig, "Lighting rig file (default: benchmark rig)");
  render_cmd->add_option("--noise-sigma", render.noise_sigma, "Additive Gaussian noise std");
  render_cmd->add_option("--seed", render.seed, "Noise seed");
  render_cmd->add_option("-o,--out", render.out, "Output image PFM");

  ReconstructArgs rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Estimate a normal map from one RGB image");
  add_config_options(rec_cmd, rec.config);
  rec_cmd->add_option("--image", rec.image, "Input image PFM (RGB, or 1-channel Bayer with --preprocess)")
      ->required();
  rec_cmd->add_option("--rig", rec.rig, "Lighting rig file")->required();
  rec_cmd->add_option("--mask", rec.mask, "Optional 1-channel PFM; pixels > 0.5 are used");
  rec_cmd->add_option("-o,--out", rec.out, "Output directory");
  rec_cmd->add_flag("--dump-histogram", rec.dump_histogram, "Also write histogram.csv");
  rec_cmd->add_flag("--objective-log", rec.objective_log, "Also write objective.csv");
  rec_cmd->add_flag("--preprocess", rec.preprocess, "Demosaic, mask and white-balance a real capture");
  rec_cmd->add_flag("--no-demosaic", rec.no_demosaic, "With --preprocess: input is already RGB");
  rec_cmd->add_option("--bayer", rec.bayer, "Bayer pattern: RGGB, BGGR, GRBG or GBRG");

  BaselineArgs baseline;
  auto* ps_cmd = app.add_subcommand("baseline-ps", "Classical three-light photometric stereo with known albedo");
  ps_cmd->add_option("--captures", baseline.captures, "Three white-light capture PFMs")->expected(3);
  ps_cmd->add_option("--image", baseline.image, "RGB image to split into simulated white-light captures");
  ps_cmd->add_option("--albedo", baseline.albedo, "Albedo map PFM")->required();
  ps_cmd->add_option("--rig", baseline.rig, "Lighting rig file")->required();
  ps_cmd->add_option("--tolerance", baseline.tolerance, "Relative residual above which a pixel is flagged");
  ps_cmd->add_option("-o,--out", baseline.out, "Output directory");

  IntegrateArgs integrate;
  auto* int_cmd = app.add_subcommand("integrate", "Integrate a normal map into depth");
  int_cmd->add_option("--normals", integrate.normals, "Normal map PFM")->required();
  int_cmd->add_option("-o,--out", integrate.out, "Output depth PFM");
  int_cmd->add_option("--eps", integrate.eps, "Minimum n_z");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Angular error between two normal maps");
  eval_cmd->add_option("--estimate", eval.estimate, "Estimated normal PFM")->required();
  eval_cmd->add_option("--truth", eval.truth, "Ground-truth normal PFM")->required();
  eval_cmd->add_option("-o,--out", eval.out, "Output directory");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Synthetic benchmark: generate, reconstruct and evaluate");
  add_config_options(bench_cmd, bench.config);
  bench_cmd->add_option("-n,--count", bench.count, "Number of instances");
  bench_cmd->add_option("-o,--out", bench.out, "Output directory");
  bench_cmd->add_option("--rig", bench.rig, "Lighting rig file (default: benchmark rig)");
  bench_cmd->add_flag("-q,--quiet", bench.quiet, "No per-instance progress on stderr");

  std::string command = "rgbps";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << json{{"command", command}, {"error", e.what()}, {"kind", "input"}}.dump() << std::endl;
    return 2;
  }

  try {
    if (threads > 0) rgbps::set_thread_count(threads);
    if (*synth_cmd) {
      command = "synth";
      run_synth(synth);
    } else if (*render_cmd) {
      command = "render";
      run_render(render);
    } else if (*rec_cmd) {
      command = "reconstruct";
      run_reconstruct(rec);
    } else if (*ps_cmd) {
      command = "baseline-ps";
      run_baseline(baseline);
    } else if (*int_cmd) {
      command = "integrate";
      run_integrate(integrate);
    } else if (*eval_cmd) {
      command = "eval";
      run_eval(eval);
    } else if (*bench_cmd) {
      command = "bench";
      run_bench_cmd(bench);
    }
  } catch (const rgbps::InputError& e) {
    std::cerr << json{{"command", command}, {"error", e.what()}, {"kind", "input"}}.dump() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"command", command}, {"error", e.what()}, {"kind", "runtime"}}.dump() << std::endl;
    return 1;
  }
  return 0;
}
