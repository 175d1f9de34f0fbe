#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "relaxbp/simulator.hpp"

namespace relaxbp {

struct ConfigError : Error {
  using Error::Error;
};

/// Everything an experiment run needs. Serialized as flat `key = value`
/// lines followed by one `[detector]` section per detector.
struct ExperimentConfig {
  SweepConfig sweep;
  double snr_min = 0.0;
  double snr_max = 12.0;
  double snr_step = 2.0;

  ExperimentConfig() {
    sweep.detectors = {{DetectorKind::SBP, 5, 0, 0}};
  }

  /// Inclusive grid snr_min, snr_min + step, ..., <= snr_max.
  [[nodiscard]] std::vector<double> snr_grid() const {
    if (!(snr_step > 0.0)) throw ConfigError("snr_step must be positive");
    if (snr_max < snr_min) throw ConfigError("snr_max must not be below snr_min");
    std::vector<double> grid;
    for (std::size_t k = 0;; ++k) {
      const double v = std::round((snr_min + static_cast<double>(k) * snr_step) * 1e9) / 1e9;
      if (v > snr_max + 1e-9) break;
      grid.push_back(v);
    }
    return grid;
  }

  /// Fills sweep.snr_points_db from the grid and validates everything.
  void finalize() {
    sweep.dims.validate();
    sweep.snr_points_db = snr_grid();
    if (sweep.trials_min < 1) throw ConfigError("trials_min must be at least 1");
    for (const DetectorSpec& d : sweep.detectors) d.validate(sweep.dims);
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true/false, got '" + v + "'");
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  try {
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long x = std::stoull(v, &used);
    if (used == v.size()) return x;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("'" + key + "' expects a nonnegative integer, got '" + v + "'");
}

inline double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  try {
    const double x = std::stod(v, &used);
    if (used == v.size() && std::isfinite(x)) return x;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
}

inline std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

/// Applies `text` on top of `base`. A file that declares any [detector]
/// section replaces the detector list of `base`.
inline ExperimentConfig parse_config(const std::string& text,
                                     ExperimentConfig base = ExperimentConfig{}) {
  using detail::parse_bool;
  using detail::parse_real;
  using detail::parse_uint;

  ExperimentConfig cfg = std::move(base);
  std::vector<DetectorSpec> detectors;
  bool in_detector = false;

  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line != "[detector]") throw ConfigError(where + "unknown section " + line);
      detectors.emplace_back();
      in_detector = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    try {
      if (in_detector) {
        DetectorSpec& d = detectors.back();
        if (key == "kind") {
          const auto kind = parse_detector_kind(val);
          if (!kind) throw ConfigError("unknown detector kind '" + val + "'");
          d.kind = *kind;
        } else if (key == "iterations") {
          d.iterations = parse_uint(key, val);
        } else if (key == "rd1") {
          d.rd1 = parse_uint(key, val);
        } else if (key == "rd2") {
          d.rd2 = parse_uint(key, val);
        } else {
          throw ConfigError("unknown detector key '" + key + "'");
        }
        continue;
      }
      SweepConfig& s = cfg.sweep;
      if (key == "nt") s.dims.n_tx = parse_uint(key, val);
      else if (key == "nr") s.dims.n_rx = parse_uint(key, val);
      else if (key == "m") s.dims.bits_per_symbol = parse_uint(key, val);
      else if (key == "snr_min") cfg.snr_min = parse_real(key, val);
      else if (key == "snr_max") cfg.snr_max = parse_real(key, val);
      else if (key == "snr_step") cfg.snr_step = parse_real(key, val);
      else if (key == "trials_min") s.trials_min = parse_uint(key, val);
      else if (key == "errors_target") s.errors_target = parse_uint(key, val);
      else if (key == "bits_max") s.bits_max = parse_uint(key, val);
      else if (key == "seed") s.master_seed = parse_uint(key, val);
      else if (key == "workers") s.workers = parse_uint(key, val);
      else if (key == "record_ami") s.record_ami = parse_bool(key, val);
      else if (key == "record_convergence") s.record_convergence = parse_bool(key, val);
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (!detectors.empty()) cfg.sweep.detectors = std::move(detectors);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path,
                                    ExperimentConfig base = ExperimentConfig{}) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

/// Renders a config that parse_config() reads back to the same values.
inline std::string format_config(const ExperimentConfig& cfg) {
  const SweepConfig& s = cfg.sweep;
  std::ostringstream os;
  os << "nt = " << s.dims.n_tx << "\n"
     << "nr = " << s.dims.n_rx << "\n"
     << "m = " << s.dims.bits_per_symbol << "\n"
     << "snr_min = " << detail::format_real(cfg.snr_min) << "\n"
     << "snr_max = " << detail::format_real(cfg.snr_max) << "\n"
     << "snr_step = " << detail::format_real(cfg.snr_step) << "\n"
     << "trials_min = " << s.trials_min << "\n"
     << "errors_target = " << s.errors_target << "\n"
     << "bits_max = " << s.bits_max << "\n"
     << "seed = " << s.master_seed << "\n"
     << "workers = " << s.workers << "\n"
     << "record_ami = " << (s.record_ami ? "true" : "false") << "\n"
     << "record_convergence = " << (s.record_convergence ? "true" : "false") << "\n";
  for (const DetectorSpec& d : s.detectors)
    os << "\n[detector]\n"
       << "kind = " << to_string(d.kind) << "\n"
       << "iterations = " << d.iterations << "\n"
       << "rd1 = " << d.rd1 << "\n"
       << "rd2 = " << d.rd2 << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Named experiment setups (BPSK throughout).

inline std::optional<ExperimentConfig> preset(std::string_view name) {
  using K = DetectorKind;
  ExperimentConfig c;
  auto& s = c.sweep;
  const auto grid = [&c](double lo, double hi, double step) {
    c.snr_min = lo;
    c.snr_max = hi;
    c.snr_step = step;
  };
  if (name == "fig3") {
    // SBP against ML, 4x4, L = 5.
    s.dims = {4, 4, 1};
    grid(0, 14, 2);
    s.detectors = {{K::ML, 0, 0, 0}, {K::SBP, 5, 0, 0}};
  } else if (name == "fig5") {
    // Relax degree sweep and the MMSE cascade, 4x4, L = 7.
    s.dims = {4, 4, 1};
    grid(0, 20, 2);
    s.detectors = {{K::SBP, 7, 0, 0},      {K::RBP, 7, 0, 0},      {K::RBP, 7, 1, 0},
                   {K::RBP, 7, 2, 0},      {K::MMSE_RBP, 7, 0, 0}, {K::MMSE_RBP, 7, 1, 0},
                   {K::MMSE_SIC, 0, 0, 0}};
  } else if (name == "fig6") {
    // 8x8, L = 5.
    s.dims = {8, 8, 1};
    grid(0, 20, 2);
    s.detectors = {{K::SBP, 5, 0, 0},      {K::RBP, 5, 0, 0},      {K::RBP, 5, 1, 0},
                   {K::MMSE_RBP, 5, 0, 0}, {K::MMSE_RBP, 5, 1, 0}, {K::MMSE_SIC, 0, 0, 0}};
  } else if (name == "fig7") {
    // Average mutual information, 4x4, L = 5.
    s.dims = {4, 4, 1};
    grid(0, 12, 2);
    s.record_ami = true;
    s.trials_min = 10'000;
    s.errors_target = 0;
    s.detectors = {{K::SBP, 5, 0, 0}, {K::RBP, 5, 0, 0}, {K::RBP, 5, 1, 0},
                   {K::MMSE_RBP, 5, 0, 0}, {K::MMSE_RBP, 5, 1, 0}};
  } else if (name == "fig8") {
    // BER against iteration count at 12 dB, 4x4.
    s.dims = {4, 4, 1};
    grid(12, 12, 1);
    s.record_convergence = true;
    s.detectors = {{K::SBP, 10, 0, 0}, {K::RBP, 10, 0, 0}, {K::RBP, 10, 1, 0},
                   {K::MMSE_RBP, 10, 0, 0}, {K::MMSE_RBP, 10, 1, 0}};
  } else {
    return std::nullopt;
  }
  return c;
}

inline constexpr std::string_view kPresetNames[] = {"fig3", "fig5", "fig6", "fig7", "fig8"};

}  // namespace relaxbp
