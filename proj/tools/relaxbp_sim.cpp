// relaxbp-sim: Monte Carlo BER/AMI sweeps, convergence runs, operation
// counts and self-checks for the message-passing MIMO detectors.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "relaxbp/config.hpp"
#include "relaxbp/metrics.hpp"
#include "relaxbp/selfcheck.hpp"
#include "relaxbp/simulator.hpp"

namespace {

using namespace relaxbp;

struct SweepFlags {
  std::optional<std::string> config_path;
  std::optional<std::string> preset_name;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed, workers, nt, nr, m, l, rd1, rd2;
  std::optional<std::uint64_t> errors_target, bits_max, trials_min;
  std::optional<double> snr_min, snr_max, snr_step;
  bool no_timing = false;
  bool quiet = false;
};

void add_sweep_flags(CLI::App* cmd, SweepFlags& f) {
  cmd->add_option("--config", f.config_path, "Experiment config file");
  cmd->add_option("--preset", f.preset_name, "Named experiment: fig3 fig5 fig6 fig7 fig8");
  cmd->add_option("--out", f.out, "CSV output path (default: standard output)");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--workers", f.workers,
                  "Worker threads (default: RELAXBP_WORKERS or hardware concurrency)");
  cmd->add_option("--nt", f.nt, "Transmit antennas");
  cmd->add_option("--nr", f.nr, "Receive antennas");
  cmd->add_option("--m", f.m, "Bits per symbol (1 = BPSK, 2 = 4-QAM)");
  cmd->add_option("--l", f.l, "Iterations for every message-passing detector");
  cmd->add_option("--rd1", f.rd1, "rd1 for every RBP / MMSE-RBP detector");
  cmd->add_option("--rd2", f.rd2, "rd2 for every RBP / MMSE-RBP detector");
  cmd->add_option("--snr-min", f.snr_min, "First SNR point in dB");
  cmd->add_option("--snr-max", f.snr_max, "Last SNR point in dB");
  cmd->add_option("--snr-step", f.snr_step, "SNR step in dB");
  cmd->add_option("--errors-target", f.errors_target, "Stop a point after this many bit errors");
  cmd->add_option("--bits-max", f.bits_max, "Bit budget per point");
  cmd->add_option("--trials-min", f.trials_min, "Minimum trials per point");
  cmd->add_flag("--no-timing", f.no_timing, "Write wall_seconds as 0 for byte-stable output");
  cmd->add_flag("--quiet", f.quiet, "No progress lines");
}

// defaults < preset < config file < flags
ExperimentConfig resolve(const SweepFlags& f, ExperimentConfig cfg) {
  if (f.preset_name) {
    auto p = preset(*f.preset_name);
    if (!p) throw ConfigError("unknown preset '" + *f.preset_name + "'");
    cfg = *p;
  }
  if (f.config_path) cfg = load_config(*f.config_path, cfg);

  SweepConfig& s = cfg.sweep;
  if (f.seed) s.master_seed = *f.seed;
  if (f.workers) s.workers = *f.workers;
  if (f.nt) s.dims.n_tx = *f.nt;
  if (f.nr) s.dims.n_rx = *f.nr;
  if (f.m) s.dims.bits_per_symbol = *f.m;
  if (f.snr_min) cfg.snr_min = *f.snr_min;
  if (f.snr_max) cfg.snr_max = *f.snr_max;
  if (f.snr_step) cfg.snr_step = *f.snr_step;
  if (f.errors_target) s.errors_target = *f.errors_target;
  if (f.bits_max) s.bits_max = *f.bits_max;
  if (f.trials_min) s.trials_min = *f.trials_min;
  for (DetectorSpec& d : s.detectors) {
    if (f.l && d.is_message_passing()) d.iterations = *f.l;
    if (d.is_relaxed()) {
      if (f.rd1) d.rd1 = *f.rd1;
      if (f.rd2) d.rd2 = *f.rd2;
    }
  }
  return cfg;
}

// `adjust` applies the subcommand's fixed settings after flag resolution.
template <typename Adjust>
int run_sweep_command(const SweepFlags& f, ExperimentConfig base, Adjust adjust) {
  ExperimentConfig cfg = resolve(f, std::move(base));
  adjust(cfg);
  cfg.finalize();
  cfg.sweep.progress = !f.quiet;
  std::cerr << "# resolved configuration\n" << format_config(cfg) << "# end configuration\n";

  SweepOutcome outcome = run_sweep(cfg.sweep);
  if (f.no_timing)
    for (SweepRecord& r : outcome.records) r.wall_seconds = 0.0;
  if (f.out)
    write_csv(outcome.records, *f.out);
  else
    std::cout << format_csv(outcome.records);
  for (const std::string& msg : outcome.failures) std::cerr << "error: " << msg << "\n";
  return outcome.failures.empty() ? 0 : 1;
}

int run_complexity(const ComplexityParams& p) {
  std::printf("Operation counts per channel use: Nt=%llu Nr=%llu M=%llu L=%llu rd1=%llu rd2=%llu\n",
              static_cast<unsigned long long>(p.n_tx), static_cast<unsigned long long>(p.n_rx),
              static_cast<unsigned long long>(p.m), static_cast<unsigned long long>(p.iterations),
              static_cast<unsigned long long>(p.rd1), static_cast<unsigned long long>(p.rd2));
  std::printf("%-16s %16s %16s %16s\n", "algorithm", "multiplications", "additions",
              "comparisons");
  const std::string rd = "(" + std::to_string(p.rd1) + "," + std::to_string(p.rd2) + ")";
  const struct {
    ComplexityRow row;
    std::string label;
  } rows[] = {{ComplexityRow::ML, "ML"},
              {ComplexityRow::SBP, "SBP"},
              {ComplexityRow::RBP, "RBP" + rd},
              {ComplexityRow::MMSE_RBP, "MMSE-RBP" + rd},
              {ComplexityRow::RBP00, "RBP(0,0)"},
              {ComplexityRow::EB, "EB(" + std::to_string(p.rd1) + ")"}};
  for (const auto& r : rows) {
    const OpCounts c = complexity_counts(r.row, p);
    std::printf("%-16s %16llu %16llu %16llu\n", r.label.c_str(),
                static_cast<unsigned long long>(c.multiplications),
                static_cast<unsigned long long>(c.additions),
                static_cast<unsigned long long>(c.comparisons));
  }
  return 0;
}

int run_selftest() {
  bool ok = true;
  for (const CheckReport& r : run_selfcheck()) {
    std::printf("[%s] %s: %zu instances, worst scaled error %.3e%s%s\n",
                r.passed ? "PASS" : "FAIL", r.name.c_str(), r.instances, r.worst_error,
                r.detail.empty() ? "" : ", ", r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator for belief-propagation MIMO detectors"};
  app.name("relaxbp-sim");

  SweepFlags ber_flags, ami_flags, conv_flags;
  auto* ber = app.add_subcommand("ber-sweep", "BER over an SNR grid, CSV output");
  add_sweep_flags(ber, ber_flags);
  auto* amis = app.add_subcommand("ami-sweep", "BER and average mutual information, CSV output");
  add_sweep_flags(amis, ami_flags);
  auto* conv = app.add_subcommand(
      "convergence", "BER for iteration counts 1..L (--l) at one SNR (--snr-min)");
  add_sweep_flags(conv, conv_flags);

  ComplexityParams cp;
  auto* cx = app.add_subcommand("complexity", "Closed-form operation counts per channel use");
  cx->add_option("--nt", cp.n_tx, "Transmit antennas")->capture_default_str();
  cx->add_option("--nr", cp.n_rx, "Receive antennas")->capture_default_str();
  cx->add_option("--m", cp.m, "Bits per symbol")->capture_default_str();
  cx->add_option("--l", cp.iterations, "Iterations")->capture_default_str();
  cx->add_option("--rd1", cp.rd1, "rd1 for the RBP, MMSE-RBP and EB rows")->capture_default_str();
  cx->add_option("--rd2", cp.rd2, "rd2 for the RBP and MMSE-RBP rows")->capture_default_str();

  auto* st = app.add_subcommand("selftest", "Cross-check the detectors against reference code");
  app.require_subcommand(1);

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (ber->parsed())
      return run_sweep_command(ber_flags, ExperimentConfig{}, [](ExperimentConfig&) {});
    if (amis->parsed())
      return run_sweep_command(ami_flags, ExperimentConfig{},
                               [](ExperimentConfig& c) { c.sweep.record_ami = true; });
    if (conv->parsed()) {
      ExperimentConfig base;
      base.snr_min = base.snr_max = 12.0;
      return run_sweep_command(conv_flags, base, [](ExperimentConfig& c) {
        c.sweep.record_convergence = true;
        c.snr_max = c.snr_min;
      });
    }
    if (cx->parsed()) return run_complexity(cp);
    if (st->parsed()) return run_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "relaxbp-sim: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "relaxbp-sim: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
