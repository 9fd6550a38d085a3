#include "rgbps/config.hpp"
#include "rgbps/eval.hpp"
#include "rgbps/io.hpp"
#include "rgbps/local_inference.hpp"
#include "rgbps/parallel.hpp"
#include "rgbps/pipeline.hpp"
#include "rgbps/render.hpp"
#include "rgbps/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using BoolArray = py::array_t<bool, py::array::c_style | py::array::forcecast>;

// (H, W, C) array <-> Field with C channels. Pixel memory layouts coincide.
template <class F>
F to_field(const Array& a, const std::optional<BoolArray>& mask, const char* name) {
  constexpr int C = F::Pixel::RowsAtCompileTime;
  const bool shaped = C == 1 ? (a.ndim() == 2 || (a.ndim() == 3 && a.shape(2) == 1)) : (a.ndim() == 3 && a.shape(2) == C);
  if (!shaped) throw rgbps::InputError(std::string(name) + ": expected shape (H, W" + (C == 1 ? "" : ", 3") + ")");
  F field(int(a.shape(1)), int(a.shape(0)));
  std::memcpy(field.data().data(), a.data(), sizeof(double) * std::size_t(field.size()) * C);
  if (mask) {
    if (mask->ndim() != 2 || mask->shape(0) != a.shape(0) || mask->shape(1) != a.shape(1)) {
      throw rgbps::InputError(std::string(name) + ": mask must have shape (H, W)");
    }
    rgbps::Mask m(std::size_t(field.size()));
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = mask->data()[i] ? 1 : 0;
    field.set_mask(std::move(m));
  }
  return field;
}

template <class F>
Array from_field(const F& field) {
  constexpr int C = F::Pixel::RowsAtCompileTime;
  std::vector<py::ssize_t> shape{field.height(), field.width()};
  if (C > 1) shape.push_back(C);
  Array out(shape);
  std::memcpy(out.mutable_data(), field.data().data(), sizeof(double) * std::size_t(field.size()) * C);
  return out;
}

BoolArray mask_array(const rgbps::Mask& mask, int width, int height) {
  BoolArray out({height, width});
  for (std::size_t i = 0; i < mask.size(); ++i) out.mutable_data()[i] = mask[i] != 0;
  return out;
}

rgbps::PipelineConfig make_config(const std::map<std::string, std::string>& overrides) {
  rgbps::PipelineConfig config;
  for (const auto& [k, v] : overrides) config.set(k, v);
  config.validate();
  return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Single-image RGB photometric stereo: rendering, reconstruction and evaluation.";

  py::register_exception<rgbps::InputError>(m, "InputError", PyExc_ValueError);

  m.def("benchmark_rig", [] { return rgbps::LightingRig::benchmark().matrix(); },
        "3x3 lighting matrix of the synthetic benchmark, one light per column.");

  m.def("set_threads", &rgbps::set_thread_count, py::arg("threads"));
  m.def("threads", &rgbps::thread_count);

  m.def("config_keys", &rgbps::PipelineConfig::keys);
  m.def("default_config", [] { return rgbps::PipelineConfig{}.to_text(); });

  m.def(
      "render",
      [](const Array& normals, const Array& albedo, const Eigen::Matrix3d& L, double noise_sigma,
         std::uint64_t seed) {
        const auto n = to_field<rgbps::NormalField>(normals, std::nullopt, "normals");
        const auto k = to_field<rgbps::AlbedoMap>(albedo, std::nullopt, "albedo");
        return from_field(rgbps::render(n, k, rgbps::LightingRig(L), noise_sigma, seed));
      },
      py::arg("normals"), py::arg("albedo"), py::arg("L"), py::arg("noise_sigma") = 0.0, py::arg("seed") = 0,
      "diag(albedo) max(L^T n, 0) plus seeded Gaussian noise; arrays are (H, W, 3).");

  m.def(
      "invert_pixels",
      [](const Array& image, const Eigen::Matrix3d& L, const Eigen::Vector3d& chroma, double eps_tau) {
        const auto img = to_field<rgbps::RgbImage>(image, std::nullopt, "image");
        const auto inv = rgbps::invert_pixels(img, rgbps::LightingRig(L), chroma, eps_tau);
        Array tau({inv.height, inv.width});
        std::memcpy(tau.mutable_data(), inv.tau.data(), sizeof(double) * inv.tau.size());
        Array normals({inv.height, inv.width, 3});
        std::memcpy(normals.mutable_data(), inv.normals.data(), sizeof(double) * std::size_t(inv.normals.size()));
        return py::make_tuple(tau, normals, mask_array(inv.valid, inv.width, inv.height));
      },
      py::arg("image"), py::arg("L"), py::arg("chroma"), py::arg("eps_tau") = 1e-8,
      "Per-pixel (tau, normal, valid) under a known chromaticity.");

  m.def(
      "gen_instance",
      [](std::uint64_t seed, const std::map<std::string, std::string>& config,
         const std::optional<Eigen::Matrix3d>& L) {
        const auto cfg = make_config(config);
        const auto rig = L ? rgbps::LightingRig(*L) : rgbps::LightingRig::benchmark();
        const auto inst = rgbps::gen_instance(cfg.synth, rig, seed);
        py::dict out;
        out["image"] = from_field(inst.image);
        out["normals"] = from_field(inst.normals);
        out["albedo"] = from_field(inst.albedo);
        out["depth"] = from_field(inst.depth);
        return out;
      },
      py::arg("seed"), py::arg("config") = std::map<std::string, std::string>{}, py::arg("L") = std::nullopt,
      "Synthetic instance: dict with image, normals, albedo and depth arrays.");

  m.def(
      "reconstruct",
      [](const Array& image, const Eigen::Matrix3d& L, const std::optional<BoolArray>& mask,
         const std::map<std::string, std::string>& config) {
        const auto cfg = make_config(config);
        const auto img = to_field<rgbps::RgbImage>(image, mask, "image");
        rgbps::Reconstruction rec;
        {
          py::gil_scoped_release release;
          rec = rgbps::reconstruct(img, rgbps::LightingRig(L), cfg);
        }
        Eigen::MatrixXd albedos(Eigen::Index(rec.albedo_set.albedos.size()), 4);
        for (std::size_t k = 0; k < rec.albedo_set.albedos.size(); ++k) {
          const auto& a = rec.albedo_set.albedos[k];
          albedos.row(Eigen::Index(k)) << a.tau, a.chroma.transpose();
        }
        py::dict out;
        out["normals"] = from_field(rec.normals);
        out["valid"] = mask_array(rec.normals.mask(), rec.normals.width(), rec.normals.height());
        out["outliers"] = from_field(rec.outliers);
        out["albedos"] = albedos;
        out["selection"] = rec.selection;
        out["objective"] = rec.objective;
        out["warning"] = rec.albedo_set.warning;
        return out;
      },
      py::arg("image"), py::arg("L"), py::arg("mask") = std::nullopt,
      py::arg("config") = std::map<std::string, std::string>{},
      "Full reconstruction. `config` maps configuration keys to string values. Returns a dict with normals "
      "(H, W, 3), valid (H, W), outliers (H, W), albedos (K, 4: tau, chroma) and selection.");

  m.def(
      "angular_error",
      [](const Array& estimate, const Array& truth) {
        const auto e = to_field<rgbps::NormalField>(estimate, std::nullopt, "estimate");
        const auto t = to_field<rgbps::NormalField>(truth, std::nullopt, "truth");
        const auto report = rgbps::angular_error(e, t);
        return py::make_tuple(from_field(report.errors), report.median, report.mean);
      },
      py::arg("estimate"), py::arg("truth"), "Per-pixel angular error in degrees, median, mean.");

  m.def(
      "classical_ps",
      [](const Array& image, const Array& albedo, const Eigen::Matrix3d& L) {
        const auto img = to_field<rgbps::RgbImage>(image, std::nullopt, "image");
        const auto k = to_field<rgbps::AlbedoMap>(albedo, std::nullopt, "albedo");
        const auto captures = rgbps::simulate_white_light_captures(img, k);
        const auto ps = rgbps::classical_ps(captures, k, rgbps::LightingRig(L));
        return py::make_tuple(from_field(ps.normals), mask_array(ps.flagged, k.width(), k.height()));
      },
      py::arg("image"), py::arg("albedo"), py::arg("L"),
      "Classical photometric stereo on white-light captures simulated from an RGB image with known albedo.");

  m.def(
      "integrate_normals",
      [](const Array& normals, const std::optional<BoolArray>& mask) {
        const auto n = to_field<rgbps::NormalField>(normals, mask, "normals");
        const auto result = rgbps::integrate_normals(n, n.mask());
        return py::make_tuple(from_field(result.depth), result.rms_residual);
      },
      py::arg("normals"), py::arg("mask") = std::nullopt, "Zero-mean least-squares depth and RMS residual.");

  m.def(
      "read_pfm",
      [](const std::string& path) {
        const auto pfm = rgbps::read_pfm(path);
        std::vector<py::ssize_t> shape{pfm.height, pfm.width};
        if (pfm.channels > 1) shape.push_back(pfm.channels);
        py::array_t<float> out(shape);
        std::memcpy(out.mutable_data(), pfm.data.data(), sizeof(float) * pfm.data.size());
        return out;
      },
      py::arg("path"), "PFM as a float32 array, top row first.");

  m.def(
      "write_pfm",
      [](const std::string& path, const py::array_t<float, py::array::c_style | py::array::forcecast>& a) {
        rgbps::PfmImage pfm;
        if (a.ndim() == 2) {
          pfm.channels = 1;
        } else if (a.ndim() == 3 && a.shape(2) == 3) {
          pfm.channels = 3;
        } else {
          throw rgbps::InputError("write_pfm: expected shape (H, W) or (H, W, 3)");
        }
        pfm.height = int(a.shape(0));
        pfm.width = int(a.shape(1));
        pfm.data.assign(a.data(), a.data() + a.size());
        rgbps::write_pfm(path, pfm);
      },
      py::arg("path"), py::arg("array"));
}
