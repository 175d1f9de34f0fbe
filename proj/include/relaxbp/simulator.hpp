#pragma once

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "relaxbp/channel.hpp"
#include "relaxbp/detectors.hpp"
#include "relaxbp/metrics.hpp"

namespace relaxbp {

struct SweepConfig {
  SystemDims dims;
  std::vector<double> snr_points_db;
  std::vector<DetectorSpec> detectors;
  std::uint64_t trials_min = 1;
  std::uint64_t errors_target = 500;
  std::uint64_t bits_max = 100'000'000;
  std::uint64_t master_seed = 1;
  bool record_ami = false;
  /// Emit one record per iteration count 1..L for message-passing detectors,
  /// all measured on the same trials.
  bool record_convergence = false;
  /// 0 selects default_workers().
  std::size_t workers = 0;
  /// One line per finished point on standard error.
  bool progress = false;
};

struct SweepRecord {
  DetectorSpec detector;
  double snr_db = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double ber = 0.0;
  double ber_ci_low = 0.0;
  double ber_ci_high = 1.0;
  std::optional<double> ami;
  double wall_seconds = 0.0;
  /// bits_max was reached before errors_target.
  bool budget_exhausted = false;
};

struct SweepOutcome {
  std::vector<SweepRecord> records;
  std::vector<std::string> failures;
};

/// Worker count from RELAXBP_WORKERS, else the hardware concurrency.
inline std::size_t default_workers() {
  if (const char* env = std::getenv("RELAXBP_WORKERS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

/// One Monte Carlo trial: fresh bits, channel and noise.
struct Trial {
  BitVector bits;
  ComplexMatrix h;
  ComplexVector y;
  double noise_var = 0.0;
};

/// The trial stream depends on the seed, the SNR and the trial index only, so
/// every detector sees the same realizations at a given point.
inline Trial make_trial(const SystemDims& dims, std::uint64_t master_seed, double snr_db,
                        std::uint64_t trial_index) {
  RandomStream rng(stream_key(
      {master_seed, std::bit_cast<std::uint64_t>(snr_db), trial_index}));
  Trial t;
  t.bits = random_bits(dims.n_bits(), rng);
  t.h = sample_channel(dims, rng);
  t.noise_var = snr_to_noise_variance(snr_db, dims).variance;
  t.y = transmit(t.h, modulate(t.bits, dims.bits_per_symbol), {t.noise_var}, rng);
  return t;
}

namespace detail {

inline constexpr std::uint64_t kTrialsPerBatch = 128;

// Tallies for the iteration counts being measured (one entry unless
// recording convergence).
struct Tally {
  std::uint64_t trials = 0;
  std::vector<BerAccumulator> ber;
  std::vector<double> ami_sum;

  explicit Tally(std::size_t n = 1) : ber(n), ami_sum(n, 0.0) {}
  void merge(const Tally& o) {
    trials += o.trials;
    for (std::size_t k = 0; k < ber.size(); ++k) {
      ber[k].merge(o.ber[k]);
      ami_sum[k] += o.ami_sum[k];
    }
  }
  [[nodiscard]] std::uint64_t min_errors() const {
    std::uint64_t e = ber.front().bit_errors;
    for (const auto& b : ber) e = std::min(e, b.bit_errors);
    return e;
  }
};

inline std::vector<double> natural_llrs(std::span<const double> soft, double scale) {
  std::vector<double> out(soft.begin(), soft.end());
  for (double& v : out) v *= scale;
  return out;
}

inline Tally run_batch(const SweepConfig& cfg, const DetectorSpec& det, double snr_db,
                       std::uint64_t batch, bool convergence) {
  const std::size_t slots = convergence ? std::max<std::size_t>(det.iterations, 1) : 1;
  Tally tally(slots);
  DetectOptions opts;
  opts.record_soft_history = convergence;
  for (std::uint64_t n = 0; n < kTrialsPerBatch; ++n) {
    const Trial t = make_trial(cfg.dims, cfg.master_seed, snr_db,
                               batch * kTrialsPerBatch + n);
    const DetectionResult r =
        detect(det, t.h, t.y, t.noise_var, cfg.dims.bits_per_symbol, opts);
    ++tally.trials;
    if (convergence && !r.per_iteration_soft.empty()) {
      for (std::size_t k = 0; k < slots; ++k) {
        const auto& soft = r.per_iteration_soft[k];
        BitVector hard(soft.size());
        std::transform(soft.begin(), soft.end(), hard.begin(), hard_decision);
        tally.ber[k] = ber_accumulate(tally.ber[k], t.bits, hard);
        if (cfg.record_ami) tally.ami_sum[k] += ami_sum(natural_llrs(soft, r.llr_scale), t.bits);
      }
    } else {
      tally.ber[0] = ber_accumulate(tally.ber[0], t.bits, r.hard_bits);
      if (cfg.record_ami) tally.ami_sum[0] += ami_sum(natural_llrs(r.soft_llrs, r.llr_scale), t.bits);
    }
  }
  return tally;
}

inline bool point_done(const SweepConfig& cfg, const Tally& t) {
  const std::uint64_t bits = t.ber.front().bits_total;
  if (bits >= cfg.bits_max) return true;
  return t.trials >= cfg.trials_min && t.min_errors() >= cfg.errors_target;
}

// Runs batches in waves of `workers`, merging in batch order and stopping at
// the first batch after which the point is done. The merged result is
// therefore independent of the worker count.
inline Tally run_point_tally(const SweepConfig& cfg, const DetectorSpec& det,
                             double snr_db, bool convergence) {
  const std::size_t workers = cfg.workers ? cfg.workers : default_workers();
  const std::size_t slots = convergence ? std::max<std::size_t>(det.iterations, 1) : 1;
  Tally total(slots);
  std::uint64_t next_batch = 0;
  while (!point_done(cfg, total)) {
    std::vector<std::optional<Tally>> wave(workers);
    if (workers == 1) {
      wave[0] = run_batch(cfg, det, snr_db, next_batch, convergence);
    } else {
      std::vector<std::exception_ptr> failures(workers);
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          try {
            wave[w] = run_batch(cfg, det, snr_db, next_batch + w, convergence);
          } catch (...) {
            failures[w] = std::current_exception();
          }
        });
      for (auto& th : pool) th.join();
      for (auto& f : failures)
        if (f) std::rethrow_exception(f);
    }
    for (auto& t : wave) {
      total.merge(*t);
      ++next_batch;
      if (point_done(cfg, total)) break;
    }
  }
  return total;
}

inline SweepRecord make_record(const SweepConfig& cfg, DetectorSpec det, double snr_db,
                               const Tally& t, std::size_t slot, double seconds) {
  SweepRecord rec;
  rec.detector = det;
  rec.snr_db = snr_db;
  rec.bits = t.ber[slot].bits_total;
  rec.errors = t.ber[slot].bit_errors;
  rec.ber = t.ber[slot].ber();
  const Interval ci = wilson_interval(rec.errors, rec.bits);
  rec.ber_ci_low = std::min(ci.low, rec.ber);
  rec.ber_ci_high = std::max(ci.high, rec.ber);
  // ML soft values are synthetic, so no AMI for it.
  if (cfg.record_ami && rec.bits > 0 && det.kind != DetectorKind::ML)
    rec.ami = t.ami_sum[slot] / static_cast<double>(rec.bits);
  rec.wall_seconds = seconds;
  rec.budget_exhausted = rec.bits >= cfg.bits_max && t.min_errors() < cfg.errors_target;
  return rec;
}

inline void report(const SweepConfig& cfg, const SweepRecord& r) {
  if (!cfg.progress) return;
  std::fprintf(stderr, "[relaxbp] %-14s L=%-2zu snr=%6.2f dB  bits=%-10llu errors=%-7llu ber=%.3e%s\n",
               r.detector.label().c_str(), r.detector.iterations, r.snr_db,
               static_cast<unsigned long long>(r.bits),
               static_cast<unsigned long long>(r.errors), r.ber,
               r.budget_exhausted ? "  (bit budget exhausted)" : "");
}

}  // namespace detail

/// One point of a BER curve. Deterministic in (cfg, detector, snr_db) for any
/// worker count.
inline SweepRecord run_point(const SweepConfig& cfg, const DetectorSpec& detector,
                             double snr_db) {
  detector.validate(cfg.dims);
  const auto start = std::chrono::steady_clock::now();
  const detail::Tally t = detail::run_point_tally(cfg, detector, snr_db, false);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  SweepRecord rec = detail::make_record(cfg, detector, snr_db, t, 0, dt.count());
  detail::report(cfg, rec);
  return rec;
}

/// BER after each iteration count 1..L of a message-passing detector, all
/// from the same trials. Stops once every iteration count has reached
/// errors_target (or the bit budget runs out).
inline std::vector<SweepRecord> run_convergence_point(const SweepConfig& cfg,
                                                      const DetectorSpec& detector,
                                                      double snr_db) {
  detector.validate(cfg.dims);
  if (!detector.is_message_passing() || detector.iterations == 0)
    return {run_point(cfg, detector, snr_db)};
  const auto start = std::chrono::steady_clock::now();
  const detail::Tally t = detail::run_point_tally(cfg, detector, snr_db, true);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
  std::vector<SweepRecord> out;
  for (std::size_t k = 0; k < detector.iterations; ++k) {
    DetectorSpec d = detector;
    d.iterations = k + 1;
    out.push_back(detail::make_record(cfg, d, snr_db, t, k, dt.count()));
    detail::report(cfg, out.back());
  }
  return out;
}

/// Cross product of detectors and SNR points, ordered by (detector, snr).
/// A failing point is reported in `failures` and the sweep continues.
inline SweepOutcome run_sweep(const SweepConfig& cfg) {
  SweepOutcome out;
  for (const DetectorSpec& det : cfg.detectors) {
    for (double snr : cfg.snr_points_db) {
      try {
        if (cfg.record_convergence) {
          auto recs = run_convergence_point(cfg, det, snr);
          out.records.insert(out.records.end(), recs.begin(), recs.end());
        } else {
          out.records.push_back(run_point(cfg, det, snr));
        }
      } catch (const std::exception& e) {
        out.failures.push_back(det.label() + " @ " + std::to_string(snr) +
                               " dB: " + e.what());
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr const char* kCsvHeader =
    "detector,rd1,rd2,iterations,snr_db,bits,errors,ber,ber_ci_low,ber_ci_high,ami,"
    "wall_seconds";

inline std::string format_g6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string format_csv(const std::vector<SweepRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const SweepRecord& r : records) {
    out += to_string(r.detector.kind);
    out += ',' + std::to_string(r.detector.rd1);
    out += ',' + std::to_string(r.detector.rd2);
    out += ',' + std::to_string(r.detector.iterations);
    out += ',' + format_g6(r.snr_db);
    out += ',' + std::to_string(r.bits);
    out += ',' + std::to_string(r.errors);
    out += ',' + format_g6(r.ber);
    out += ',' + format_g6(r.ber_ci_low);
    out += ',' + format_g6(r.ber_ci_high);
    out += ',';
    if (r.ami) out += format_g6(*r.ami);
    out += ',' + format_g6(r.wall_seconds);
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::vector<SweepRecord>& records, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("write_csv: cannot open " + path);
  f << format_csv(records);
  f.flush();
  if (!f) throw IoFailure("write_csv: write failed for " + path);
}

inline std::vector<SweepRecord> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw IoFailure("parse_csv: missing or unexpected header");
  std::vector<SweepRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      f.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (f.size() != 12) throw IoFailure("parse_csv: expected 12 fields: " + line);
    try {
      SweepRecord r;
      const auto kind = parse_detector_kind(f[0]);
      if (!kind) throw IoFailure("parse_csv: unknown detector " + f[0]);
      r.detector.kind = *kind;
      r.detector.rd1 = std::stoull(f[1]);
      r.detector.rd2 = std::stoull(f[2]);
      r.detector.iterations = std::stoull(f[3]);
      r.snr_db = std::stod(f[4]);
      r.bits = std::stoull(f[5]);
      r.errors = std::stoull(f[6]);
      r.ber = std::stod(f[7]);
      r.ber_ci_low = std::stod(f[8]);
      r.ber_ci_high = std::stod(f[9]);
      if (!f[10].empty()) r.ami = std::stod(f[10]);
      r.wall_seconds = std::stod(f[11]);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw IoFailure("parse_csv: malformed line: " + line);
    }
  }
  return out;
}

inline std::vector<SweepRecord> read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoFailure("read_csv: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace relaxbp
