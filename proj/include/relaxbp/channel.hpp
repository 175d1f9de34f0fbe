#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "relaxbp/numerics.hpp"

namespace relaxbp {

/// Bits are carried as +1/-1 values.
using BitVector = std::vector<int>;

struct SystemDims {
  std::size_t n_tx = 4;
  std::size_t n_rx = 4;
  std::size_t bits_per_symbol = 1;

  [[nodiscard]] std::size_t n_bits() const noexcept {
    return n_tx * bits_per_symbol;
  }
  void validate() const {
    if (n_tx < 1 || n_rx < 1)
      throw Error("SystemDims: antenna counts must be positive");
    if (bits_per_symbol != 1 && bits_per_symbol != 2)
      throw Error("SystemDims: bits_per_symbol must be 1 (BPSK) or 2 (4-QAM)");
  }
  bool operator==(const SystemDims&) const = default;
};

struct NoiseSpec {
  double variance = 0.0;  // total variance of each complex noise entry
};

// ---------------------------------------------------------------------------
// Random streams

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Folds a list of integers into one stream key.
inline std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) noexcept {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

/// Counter-based generator: output n is splitmix64(key + n * golden).
/// Streams keyed by (seed, trial, ...) are independent of scheduling order
/// and the normal deviates do not depend on the standard library's
/// distribution implementations.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++);
  }

  /// Uniform on (0, 1].
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second deviate of each pair is kept.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// CN(0, variance): variance/2 on each real component.
  Complex complex_normal(double variance) noexcept {
    const double s = std::sqrt(variance / 2.0);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

  int bit() noexcept { return ((*this)() >> 63) ? 1 : -1; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Bit/symbol mapping

/// 1-based symbol index carrying 1-based bit i: k(i) = 1 + floor((i - 0.5) / M).
inline std::size_t bit_to_symbol_index(std::size_t i, std::size_t m) {
  if (i < 1) throw Error("bit_to_symbol_index: bit index is 1-based");
  return 1 + static_cast<std::size_t>(
                 std::floor((static_cast<double>(i) - 0.5) / static_cast<double>(m)));
}

/// Weight of bit i (0-based) inside its symbol: the symbol equals the sum of
/// weight * bit over its bits. BPSK: 1. Gray 4-QAM: 1/sqrt2 and i/sqrt2.
inline Complex bit_weight(std::size_t i, std::size_t m) noexcept {
  if (m == 1) return 1.0;
  return (i % 2 == 0) ? Complex{std::numbers::sqrt2 / 2.0, 0.0}
                      : Complex{0.0, std::numbers::sqrt2 / 2.0};
}

inline ComplexVector modulate(std::span<const int> bits, std::size_t m) {
  if (m == 0 || bits.size() % m != 0)
    throw LengthMismatch("modulate: bit count not divisible by bits per symbol");
  ComplexVector s(bits.size() / m);
  for (std::size_t i = 0; i < bits.size(); ++i)
    s[i / m] += bit_weight(i, m) * static_cast<double>(bits[i]);
  return s;
}

/// Hard demapping by sign of the real (and for 4-QAM, imaginary) part;
/// sgn(0) = +1.
inline BitVector demodulate(std::span<const Complex> symbols, std::size_t m) {
  BitVector bits(symbols.size() * m);
  for (std::size_t k = 0; k < symbols.size(); ++k) {
    bits[k * m] = symbols[k].real() >= 0.0 ? 1 : -1;
    if (m == 2) bits[k * m + 1] = symbols[k].imag() >= 0.0 ? 1 : -1;
  }
  return bits;
}

/// Nr x (M Nt) matrix of per-bit gains g(j, i) = h(j, k(i)) * bit_weight(i),
/// so that y_j = sum_i g(j, i) x_i + n_j.
inline ComplexMatrix bit_gains(const ComplexMatrix& h, std::size_t m) {
  ComplexMatrix g(h.rows(), h.cols() * m);
  for (std::size_t j = 0; j < h.rows(); ++j)
    for (std::size_t i = 0; i < h.cols() * m; ++i)
      g(j, i) = h(j, i / m) * bit_weight(i, m);
  return g;
}

// ---------------------------------------------------------------------------
// Channel

inline BitVector random_bits(std::size_t n, RandomStream& rng) {
  BitVector bits(n);
  for (int& b : bits) b = rng.bit();
  return bits;
}

/// Rayleigh flat fading: i.i.d. CN(0, 1) entries, row-major draw order.
inline ComplexMatrix sample_channel(const SystemDims& dims, RandomStream& rng) {
  ComplexMatrix h(dims.n_rx, dims.n_tx);
  for (Complex& v : h.data()) v = rng.complex_normal(1.0);
  return h;
}

/// y = H s + n with n ~ CN(0, noise.variance I).
inline ComplexVector transmit(const ComplexMatrix& h, std::span<const Complex> s,
                              NoiseSpec noise, RandomStream& rng) {
  ComplexVector y = multiply(h, s);
  if (noise.variance > 0.0)
    for (Complex& v : y) v += rng.complex_normal(noise.variance);
  return y;
}

/// SNR is received signal power per antenna (Nt for unit-energy symbols)
/// over the noise variance.
inline NoiseSpec snr_to_noise_variance(double snr_db, const SystemDims& dims) {
  return {static_cast<double>(dims.n_tx) / std::pow(10.0, snr_db / 10.0)};
}

}  // namespace relaxbp
