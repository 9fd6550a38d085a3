#include "rgbps/config.hpp"

#include "rgbps/io.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace rgbps {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_plain(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InputError("invalid number '" + text + "'");
  }
  if (used != text.size()) throw InputError("invalid number '" + text + "'");
  return value;
}

int parse_int(const std::string& text) {
  const double v = parse_number(text);
  if (!(std::abs(v) < 1e9) || v != std::floor(v)) throw InputError("expected an integer, got '" + text + "'");
  return int(v);
}

struct KeyHandler {
  std::function<void(PipelineConfig&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

KeyHandler int_key(std::function<int&(PipelineConfig&)> ref) {
  return {[ref](PipelineConfig& c, const std::string& v) { ref(c) = parse_int(v); },
          [ref](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return std::to_string(ref(copy));
          }};
}

KeyHandler double_key(std::function<double&(PipelineConfig&)> ref) {
  return {[ref](PipelineConfig& c, const std::string& v) { ref(c) = parse_number(v); },
          [ref](const PipelineConfig& c) {
            PipelineConfig copy = c;
            return format_double(ref(copy));
          }};
}

const std::vector<std::pair<std::string, KeyHandler>>& table() {
  static const std::vector<std::pair<std::string, KeyHandler>> fields = {
      {"patch_side", int_key([](PipelineConfig& c) -> int& { return c.geometry.patch_side; })},
      {"D", int_key([](PipelineConfig& c) -> int& { return c.geometry.degree; })},
      {"n_elev", int_key([](PipelineConfig& c) -> int& { return c.grid.n_elev; })},
      {"n_azim", int_key([](PipelineConfig& c) -> int& { return c.grid.n_azim; })},
      {"n_lum", int_key([](PipelineConfig& c) -> int& { return c.grid.n_lum; })},
      {"tau_max", double_key([](PipelineConfig& c) -> double& { return c.grid.tau_max; })},
      {"K", int_key([](PipelineConfig& c) -> int& { return c.K; })},
      {"h_max", double_key([](PipelineConfig& c) -> double& { return c.h_max; })},
      {"gamma", double_key([](PipelineConfig& c) -> double& { return c.solver.gamma; })},
      {"lambda_init", double_key([](PipelineConfig& c) -> double& { return c.solver.lambda_init; })},
      {"lambda_factor", double_key([](PipelineConfig& c) -> double& { return c.solver.lambda_factor; })},
      {"lambda_final", double_key([](PipelineConfig& c) -> double& { return c.solver.lambda_final; })},
      {"iterations", int_key([](PipelineConfig& c) -> int& { return c.solver.iterations; })},
      {"selection",
       {[](PipelineConfig& c, const std::string& v) {
          if (v == "full") {
            c.solver.rule = SelectionRule::FullObjective;
          } else if (v == "shortcut") {
            c.solver.rule = SelectionRule::Shortcut;
          } else {
            throw InputError("selection must be 'full' or 'shortcut', got '" + v + "'");
          }
        },
        [](const PipelineConfig& c) {
          return std::string(c.solver.rule == SelectionRule::FullObjective ? "full" : "shortcut");
        }}},
      {"rel_tol", double_key([](PipelineConfig& c) -> double& { return c.solver.relative_tolerance; })},
      {"eps_tau", double_key([](PipelineConfig& c) -> double& { return c.eps_tau; })},
      {"mask_threshold", double_key([](PipelineConfig& c) -> double& { return c.mask_threshold; })},
      {"seed",
       {[](PipelineConfig& c, const std::string& v) {
          std::size_t used = 0;
          try {
            if (!v.empty() && v[0] == '-') throw InputError("");
            c.seed = std::stoull(v, &used, 0);
          } catch (const std::exception&) {
            throw InputError("seed must be a nonnegative integer, got '" + v + "'");
          }
          if (used != v.size()) throw InputError("seed must be a nonnegative integer, got '" + v + "'");
        },
        [](const PipelineConfig& c) { return std::to_string(c.seed); }}},
      {"noise_sigma", double_key([](PipelineConfig& c) -> double& { return c.synth.noise_sigma; })},
      {"image_size", int_key([](PipelineConfig& c) -> int& { return c.synth.image_size; })},
      {"coarse_size", int_key([](PipelineConfig& c) -> int& { return c.synth.coarse_size; })},
      {"amplitude", double_key([](PipelineConfig& c) -> double& { return c.synth.amplitude; })},
      {"max_tilt", double_key([](PipelineConfig& c) -> double& { return c.synth.max_tilt_deg; })},
      {"albedo_min", double_key([](PipelineConfig& c) -> double& { return c.synth.albedo_min; })},
      {"albedo_max", double_key([](PipelineConfig& c) -> double& { return c.synth.albedo_max; })},
  };
  return fields;
}

const KeyHandler* find_field(const std::string& key) {
  for (const auto& [name, field] : table()) {
    if (name == key) return &field;
  }
  return nullptr;
}

}  // namespace

double parse_number(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw InputError("empty number");
  const auto caret = text.find('^');
  if (caret != std::string::npos) {
    const double base = parse_plain(trim(text.substr(0, caret)));
    const double exponent = parse_plain(trim(text.substr(caret + 1)));
    const double value = std::pow(base, exponent);
    if (!std::isfinite(value)) throw InputError("number out of range: '" + text + "'");
    return value;
  }
  const double value = parse_plain(text);
  if (!std::isfinite(value)) throw InputError("number must be finite: '" + text + "'");
  return value;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const KeyHandler* field = find_field(trim(key));
  if (!field) throw InputError("unknown config key '" + trim(key) + "'");
  try {
    field->set(*this, trim(value));
  } catch (const InputError& e) {
    throw InputError(trim(key) + ": " + e.what());
  }
}

void PipelineConfig::apply(const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw InputError("expected key=value, got '" + a + "'");
    set(a.substr(0, eq), a.substr(eq + 1));
  }
}

void PipelineConfig::validate() const {
  if (geometry.patch_side < 2) throw InputError("patch_side must be >= 2");
  if (geometry.degree < 1) throw InputError("D must be >= 1");
  if (2 * geometry.pixel_count() < geometry.coeff_count()) throw InputError("D too large for patch_side");
  grid.validate();
  if (K < 1) throw InputError("K must be >= 1");
  if (!(h_max > 0.0)) throw InputError("h_max must be > 0");
  solver.validate();
  if (!(solver.relative_tolerance >= 0.0)) throw InputError("rel_tol must be >= 0");
  if (!(eps_tau > 0.0)) throw InputError("eps_tau must be > 0");
  if (!(mask_threshold >= 0.0 && mask_threshold < 1.0)) throw InputError("mask_threshold must be in [0, 1)");
  synth.validate();
}

std::string PipelineConfig::to_text() const {
  std::ostringstream out;
  for (const auto& [name, field] : table()) out << name << "=" << field.get(*this) << "\n";
  return out.str();
}

std::vector<std::string> PipelineConfig::keys() {
  std::vector<std::string> names;
  for (const auto& entry : table()) names.push_back(entry.first);
  return names;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  PipelineConfig config;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    try {
      config.set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  config.validate();
  return config;
}

}  // namespace rgbps
