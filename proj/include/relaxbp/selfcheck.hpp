#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "relaxbp/channel.hpp"
#include "relaxbp/detectors.hpp"
#include "relaxbp/reference.hpp"

namespace relaxbp {

struct CheckReport {
  std::string name;
  bool passed = true;
  std::size_t instances = 0;
  double worst_error = 0.0;  // max |a - b| / max(1, |b|)
  std::string detail;
};

/// |a - b| relative to max(1, |b|).
inline double scaled_error(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::abs(b));
}

struct RandomInstance {
  ComplexMatrix h;
  ComplexVector y;
  double noise_var = 1.0;
  RealMatrix alpha;
};

/// Random channel, bits and noise at an SNR drawn from [0, 15] dB; alpha is
/// uniform in [-alpha_range, alpha_range] (zero when alpha_range = 0).
inline RandomInstance random_instance(const SystemDims& dims, RandomStream& rng,
                                      double alpha_range) {
  RandomInstance inst;
  inst.h = sample_channel(dims, rng);
  const BitVector bits = random_bits(dims.n_bits(), rng);
  inst.noise_var = snr_to_noise_variance(15.0 * rng.uniform(), dims).variance;
  inst.y = transmit(inst.h, modulate(bits, dims.bits_per_symbol), {inst.noise_var}, rng);
  inst.alpha = RealMatrix(dims.n_bits(), dims.n_rx);
  for (double& a : inst.alpha.data()) a = alpha_range * (2.0 * rng.uniform() - 1.0);
  return inst;
}

/// sbp_beta_update against the brute-force reference, Nt = Nr in {2, 3},
/// BPSK, random priors.
inline CheckReport check_sbp_enumeration(std::size_t instances = 1000,
                                         std::uint64_t seed = 11, double tol = 1e-9) {
  CheckReport rep;
  rep.name = "SBP factor update vs brute-force enumeration";
  for (std::size_t n = 0; n < instances; ++n) {
    RandomStream rng(stream_key({seed, n}));
    const std::size_t ant = 2 + n % 2;
    const SystemDims dims{ant, ant, 1};
    const RandomInstance inst = random_instance(dims, rng, 8.0);
    const RealMatrix got = sbp_beta_update(inst.alpha, bit_gains(inst.h, 1), inst.y,
                                           inst.noise_var);
    const RealMatrix want =
        reference::sbp_beta(inst.alpha, inst.h, inst.y, inst.noise_var, 1);
    for (std::size_t k = 0; k < got.data().size(); ++k)
      rep.worst_error = std::max(rep.worst_error, scaled_error(got.data()[k], want.data()[k]));
    ++rep.instances;
  }
  rep.passed = rep.worst_error <= tol;
  return rep;
}

/// RBP(Nt-1, 1) against SBP: every alpha and beta after every iteration, and
/// the hard decisions.
inline CheckReport check_rbp_full_equals_sbp(std::size_t instances = 100,
                                             std::size_t n_tx = 4, std::size_t iterations = 5,
                                             std::uint64_t seed = 23, double tol = 1e-9) {
  CheckReport rep;
  rep.name = "RBP(Nt-1,1) messages equal SBP messages";
  std::size_t decision_mismatches = 0;
  for (std::size_t n = 0; n < instances; ++n) {
    RandomStream rng(stream_key({seed, n}));
    const SystemDims dims{n_tx, n_tx, 1};
    const RandomInstance inst = random_instance(dims, rng, 0.0);
    DetectOptions opts;
    opts.record_messages = true;
    const DetectionResult sbp = detect({DetectorKind::SBP, iterations, 0, 0}, inst.h,
                                       inst.y, inst.noise_var, 1, opts);
    const DetectionResult rbp = detect({DetectorKind::RBP, iterations, n_tx - 1, 1},
                                       inst.h, inst.y, inst.noise_var, 1, opts);
    for (std::size_t l = 0; l < iterations; ++l) {
      const MessageState& a = sbp.message_history[l];
      const MessageState& b = rbp.message_history[l];
      for (std::size_t k = 0; k < a.alpha.data().size(); ++k)
        rep.worst_error = std::max(rep.worst_error,
                                   scaled_error(b.alpha.data()[k], a.alpha.data()[k]));
      for (std::size_t k = 0; k < a.beta.data().size(); ++k)
        rep.worst_error = std::max(rep.worst_error,
                                   scaled_error(b.beta.data()[k], a.beta.data()[k]));
    }
    if (sbp.hard_bits != rbp.hard_bits) ++decision_mismatches;
    ++rep.instances;
  }
  rep.passed = rep.worst_error <= tol && decision_mismatches == 0;
  rep.detail = std::to_string(decision_mismatches) + " hard-decision mismatches";
  return rep;
}

/// RBP(0,0): closed-form factor message against the enumerated form, with
/// interference means built from random priors.
inline CheckReport check_rbp00_two_paths(std::size_t instances = 1000,
                                         std::size_t n_tx = 4, std::uint64_t seed = 37,
                                         double tol = 1e-12) {
  CheckReport rep;
  rep.name = "RBP(0,0) closed form vs enumerated path";
  for (std::size_t n = 0; n < instances; ++n) {
    RandomStream rng(stream_key({seed, n}));
    const SystemDims dims{n_tx, n_tx, 1};
    const RandomInstance inst = random_instance(dims, rng, 8.0);
    const ComplexMatrix gains = bit_gains(inst.h, 1);
    const EdgeSet edges = build_edge_set(inst.h, 1, 0, 0);
    InterferenceModel model = make_interference_model(edges, gains, inst.noise_var);
    update_interference_means(model, inst.alpha, edges, gains);
    const RealMatrix closed =
        rbp_beta_update(inst.alpha, edges, model, gains, inst.y, RbpPath::Auto);
    const RealMatrix general =
        rbp_beta_update(inst.alpha, edges, model, gains, inst.y, RbpPath::Enumerate);
    for (std::size_t k = 0; k < closed.data().size(); ++k)
      rep.worst_error =
          std::max(rep.worst_error, scaled_error(closed.data()[k], general.data()[k]));
    ++rep.instances;
  }
  rep.passed = rep.worst_error <= tol;
  return rep;
}

inline std::vector<CheckReport> run_selfcheck() {
  return {check_sbp_enumeration(), check_rbp_full_equals_sbp(), check_rbp00_two_paths()};
}

}  // namespace relaxbp
