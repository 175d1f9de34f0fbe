#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>
#include <utility>

#include "relaxbp/channel.hpp"
#include "relaxbp/numerics.hpp"

namespace relaxbp {

struct BerAccumulator {
  std::uint64_t bits_total = 0;
  std::uint64_t bit_errors = 0;

  [[nodiscard]] double ber() const noexcept {
    return bits_total ? static_cast<double>(bit_errors) / static_cast<double>(bits_total)
                      : 0.0;
  }
  BerAccumulator& merge(const BerAccumulator& other) noexcept {
    bits_total += other.bits_total;
    bit_errors += other.bit_errors;
    return *this;
  }
  bool operator==(const BerAccumulator&) const = default;
};

inline BerAccumulator ber_accumulate(BerAccumulator acc, std::span<const int> sent,
                                     std::span<const int> decided) {
  if (sent.size() != decided.size())
    throw LengthMismatch("ber_accumulate: sent and decided differ in length");
  acc.bits_total += sent.size();
  for (std::size_t i = 0; i < sent.size(); ++i)
    if (sent[i] != decided[i]) ++acc.bit_errors;
  return acc;
}

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval at 95%.
inline Interval wilson_interval(std::uint64_t errors, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(errors) / n;
  const double z2n = z * z / n;
  const double centre = (p + z2n / 2.0) / (1.0 + z2n);
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2n / (4.0 * n)) / (1.0 + z2n);
  // The bounds are exactly 0 and 1 at the extremes; keep rounding out of them.
  return {errors == 0 ? 0.0 : std::max(0.0, centre - half),
          errors == trials ? 1.0 : std::min(1.0, centre + half)};
}

inline bool intervals_overlap(Interval a, Interval b) noexcept {
  return a.low <= b.high && b.low <= a.high;
}

/// 1 - log2(1 + exp(-b L)) for one bit, with b L clamped to +-30.
inline double ami_term(double llr, int bit) noexcept {
  const double v = std::clamp(-static_cast<double>(bit) * llr, -30.0, 30.0);
  return 1.0 - std::log1p(std::exp(v)) / std::numbers::ln2;
}

/// Sum of ami_term over all bits; dividing by the bit count gives the AMI.
/// Kept as a sum so that Monte Carlo workers can accumulate it.
inline double ami_sum(std::span<const double> soft_llrs, std::span<const int> true_bits) {
  if (soft_llrs.size() != true_bits.size())
    throw LengthMismatch("ami: LLR and bit vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < soft_llrs.size(); ++i) s += ami_term(soft_llrs[i], true_bits[i]);
  return s;
}

/// Average mutual information measured from soft outputs against the true
/// bits: mean of 1 - log2(1 + exp(-b L)). Not floored, so strongly wrong
/// LLRs drive it below zero.
inline double ami(std::span<const double> soft_llrs, std::span<const int> true_bits) {
  const double s = ami_sum(soft_llrs, true_bits);
  return soft_llrs.empty() ? 0.0 : s / static_cast<double>(soft_llrs.size());
}

// ---------------------------------------------------------------------------
// Closed-form operation counts per channel use

enum class ComplexityRow { ML, SBP, RBP, MMSE_RBP, RBP00, EB };

inline std::string_view to_string(ComplexityRow row) noexcept {
  switch (row) {
    case ComplexityRow::ML: return "ML";
    case ComplexityRow::SBP: return "SBP";
    case ComplexityRow::RBP: return "RBP";
    case ComplexityRow::MMSE_RBP: return "MMSE-RBP";
    case ComplexityRow::RBP00: return "RBP(0,0)";
    case ComplexityRow::EB: return "EB";
  }
  return "?";
}

struct OpCounts {
  std::uint64_t multiplications = 0;
  std::uint64_t additions = 0;
  std::uint64_t comparisons = 0;
  bool operator==(const OpCounts&) const = default;
};

struct ComplexityParams {
  std::uint64_t n_tx = 4;
  std::uint64_t n_rx = 4;
  std::uint64_t m = 1;
  std::uint64_t iterations = 5;
  std::uint64_t rd1 = 0;
  std::uint64_t rd2 = 0;
};

inline OpCounts complexity_counts(ComplexityRow row, const ComplexityParams& p) {
  const std::uint64_t nt = p.n_tx, nr = p.n_rx, m = p.m, l = p.iterations;
  const std::uint64_t rd1 = p.rd1;
  const std::uint64_t rd = p.rd1 * m + p.rd2 * (m - 1);
  const auto pow2 = [](std::uint64_t e) { return std::uint64_t{1} << e; };
  if (m < 1 || nt < 1 || rd1 + 1 > nt)
    throw Error("complexity_counts: parameters out of range");

  switch (row) {
    case ComplexityRow::ML: {
      const std::uint64_t c = pow2(m * nt);
      return {c * nr * nt + m * nt, c * nr * nt + c * m * nt, 0};
    }
    case ComplexityRow::SBP: {
      const std::uint64_t c = pow2(m * nt);
      return {c * nr * nt, (c + (pow2(m * nt - 1) + 3) * m * l) * nr * nt,
              (c - 2) * m * nt * nr * l};
    }
    case ComplexityRow::RBP: {
      const std::uint64_t base =
          pow2(rd + 1) * (rd1 + 1) * nr + pow2(m) * (nt - rd1 - 1) * nr;
      return {base,
              base + (pow2(rd) * (rd1 + 1) + pow2(m - 1) + 3 * nt) * m * l * nr,
              (pow2(rd + 1) - 2) * m * l * nt * nr};
    }
    case ComplexityRow::MMSE_RBP: {
      // The cubic MMSE term is counted as exactly Nt^3.
      OpCounts c = complexity_counts(ComplexityRow::RBP, p);
      c.multiplications += nt * nt * nt;
      c.additions += nt * nt * nt;
      c.comparisons += nt * (nt - 1) / 2;
      return c;
    }
    case ComplexityRow::RBP00: {
      const std::uint64_t base = 2 * nr + pow2(m) * (nt - 1) * nr;
      return {base, base + (pow2(m - 1) + 3 * nt + 2) * m * l * nt * nr, 0};
    }
    case ComplexityRow::EB: {
      const std::uint64_t e = m * rd1 + m;
      const std::uint64_t base =
          pow2(e) * (rd1 + 1) * nr + pow2(m) * (nt - rd1 - 1) * nr;
      return {base,
              base + (pow2(e - 1) * (rd1 + 1) + pow2(m - 1) + 3 * nt) * m * l * nr,
              (pow2(e) - 2) * m * l * nt * nr};
    }
  }
  throw Error("complexity_counts: unknown row");
}

}  // namespace relaxbp
