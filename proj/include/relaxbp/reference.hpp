#pragma once

// Deliberately naive implementations, written independently of the
// optimized detectors, for cross-checking them. They work on the symbol-level
// channel matrix and rebuild everything per (factor, bit) from scratch.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "relaxbp/detectors.hpp"
#include "relaxbp/numerics.hpp"

namespace relaxbp::reference {

// Contribution of bit t with value x to receive antenna j.
inline Complex bit_contribution(const ComplexMatrix& h, std::size_t j, std::size_t t,
                                int x, std::size_t m) {
  const Complex hv = h(j, t / m);
  if (m == 1) return hv * static_cast<double>(x);
  const double a = static_cast<double>(x) / std::sqrt(2.0);
  return (t % 2 == 0) ? hv * a : hv * Complex(0.0, a);
}

inline std::vector<int> config_bits(std::size_t config, std::size_t n) {
  std::vector<int> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = (config & (std::size_t{1} << t)) ? 1 : -1;
  return x;
}

/// beta(j, i) by brute force over every full bit configuration.
inline RealMatrix sbp_beta(const RealMatrix& alpha, const ComplexMatrix& h,
                           const ComplexVector& y, double noise_var, std::size_t m) {
  const std::size_t n_bits = h.cols() * m;
  RealMatrix beta(h.rows(), n_bits);
  for (std::size_t j = 0; j < h.rows(); ++j) {
    for (std::size_t i = 0; i < n_bits; ++i) {
      double best[2] = {-std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
      for (std::size_t c = 0; c < (std::size_t{1} << n_bits); ++c) {
        const std::vector<int> x = config_bits(c, n_bits);
        Complex mean = 0.0;
        for (std::size_t t = 0; t < n_bits; ++t) mean += bit_contribution(h, j, t, x[t], m);
        double metric = -std::pow(std::abs(y[j] - mean), 2) / (2.0 * noise_var);
        for (std::size_t t = 0; t < n_bits; ++t)
          if (t != i && x[t] == 1) metric += alpha(t, j);
        double& slot = best[x[i] == 1 ? 0 : 1];
        slot = std::max(slot, metric);
      }
      beta(j, i) = best[0] - best[1];
    }
  }
  return beta;
}

/// Neighbour bits kept for (j, i): repeated arg-max over |h(j, k)|.
inline std::vector<std::size_t> selected_bits(const ComplexMatrix& h, std::size_t j,
                                              std::size_t i, std::size_t rd1,
                                              std::size_t rd2, std::size_t m) {
  const std::size_t own = i / m;
  std::vector<bool> taken(h.cols(), false);
  taken[own] = true;
  std::vector<std::size_t> bits;
  for (std::size_t n = 0; n < rd1; ++n) {
    std::size_t best = h.cols();
    for (std::size_t k = 0; k < h.cols(); ++k)
      if (!taken[k] && (best == h.cols() || std::abs(h(j, k)) > std::abs(h(j, best))))
        best = k;
    taken[best] = true;
    for (std::size_t b = 0; b < m; ++b) bits.push_back(best * m + b);
  }
  if (rd2 == 1)
    for (std::size_t b = 0; b < m; ++b)
      if (own * m + b != i) bits.push_back(own * m + b);
  return bits;
}

/// Relaxed BP beta for one iteration with the interference mean built from
/// the same alpha, by enumerating hypotheses over {i} and the selected bits.
inline RealMatrix rbp_beta(const RealMatrix& alpha, const ComplexMatrix& h,
                           const ComplexVector& y, double noise_var, std::size_t m,
                           std::size_t rd1, std::size_t rd2) {
  const std::size_t n_bits = h.cols() * m;
  RealMatrix beta(h.rows(), n_bits);
  for (std::size_t j = 0; j < h.rows(); ++j) {
    for (std::size_t i = 0; i < n_bits; ++i) {
      const std::vector<std::size_t> psi = selected_bits(h, j, i, rd1, rd2, m);
      Complex u = 0.0;
      double var = noise_var;
      for (std::size_t t = 0; t < n_bits; ++t) {
        if (t == i || std::find(psi.begin(), psi.end(), t) != psi.end()) continue;
        const double a = std::clamp(alpha(t, j), -kLlrClamp, kLlrClamp);
        const double p_plus = std::exp(a) / (1.0 + std::exp(a));
        u += bit_contribution(h, j, t, 1, m) * (2.0 * p_plus - 1.0);
        var += std::norm(bit_contribution(h, j, t, 1, m));
      }
      double best[2] = {-std::numeric_limits<double>::infinity(),
                        -std::numeric_limits<double>::infinity()};
      for (int xi : {1, -1}) {
        for (std::size_t c = 0; c < (std::size_t{1} << psi.size()); ++c) {
          const std::vector<int> xs = config_bits(c, psi.size());
          Complex r = y[j] - bit_contribution(h, j, i, xi, m) - u;
          double prior = 0.0;
          for (std::size_t p = 0; p < psi.size(); ++p) {
            r -= bit_contribution(h, j, psi[p], xs[p], m);
            if (xs[p] == 1) prior += alpha(psi[p], j);
          }
          const double metric = -std::norm(r) / (2.0 * var) + prior;
          double& slot = best[xi == 1 ? 0 : 1];
          slot = std::max(slot, metric);
        }
      }
      beta(j, i) = best[0] - best[1];
    }
  }
  return beta;
}

/// Minimum-distance bit vector by exhaustive search.
inline std::vector<int> ml_bits(const ComplexMatrix& h, const ComplexVector& y,
                                std::size_t m) {
  const std::size_t n_bits = h.cols() * m;
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_x;
  for (std::size_t c = 0; c < (std::size_t{1} << n_bits); ++c) {
    const std::vector<int> x = config_bits(c, n_bits);
    double d = 0.0;
    for (std::size_t j = 0; j < h.rows(); ++j) {
      Complex mean = 0.0;
      for (std::size_t t = 0; t < n_bits; ++t) mean += bit_contribution(h, j, t, x[t], m);
      d += std::norm(y[j] - mean);
    }
    if (d < best) {
      best = d;
      best_x = x;
    }
  }
  return best_x;
}

}  // namespace relaxbp::reference
