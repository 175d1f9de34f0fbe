#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relaxbp/channel.hpp"
#include "relaxbp/numerics.hpp"

namespace relaxbp {

/// Magnitude bound applied to bit-to-factor messages before they are used.
inline constexpr double kLlrClamp = 30.0;
/// Largest bit count enumerated exhaustively by ML and SBP.
inline constexpr std::size_t kMaxEnumeratedBits = 24;
/// Largest selected-edge count enumerated by RBP.
inline constexpr std::size_t kMaxSelectedEdges = 20;

enum class DetectorKind { ML, MMSE, MMSE_SIC, SBP, RBP, MMSE_RBP };

inline std::string_view to_string(DetectorKind kind) noexcept {
  switch (kind) {
    case DetectorKind::ML: return "ML";
    case DetectorKind::MMSE: return "MMSE";
    case DetectorKind::MMSE_SIC: return "MMSE-SIC";
    case DetectorKind::SBP: return "SBP";
    case DetectorKind::RBP: return "RBP";
    case DetectorKind::MMSE_RBP: return "MMSE-RBP";
  }
  return "?";
}

inline std::optional<DetectorKind> parse_detector_kind(std::string_view name) {
  std::string s;
  for (char c : name) {
    if (c == '_') c = '-';
    s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  for (auto kind : {DetectorKind::ML, DetectorKind::MMSE, DetectorKind::MMSE_SIC,
                    DetectorKind::SBP, DetectorKind::RBP, DetectorKind::MMSE_RBP})
    if (s == to_string(kind)) return kind;
  return std::nullopt;
}

struct DetectorSpec {
  DetectorKind kind = DetectorKind::SBP;
  std::size_t iterations = 5;  // L
  std::size_t rd1 = 0;
  std::size_t rd2 = 0;

  [[nodiscard]] bool is_message_passing() const noexcept {
    return kind == DetectorKind::SBP || kind == DetectorKind::RBP ||
           kind == DetectorKind::MMSE_RBP;
  }
  [[nodiscard]] bool is_relaxed() const noexcept {
    return kind == DetectorKind::RBP || kind == DetectorKind::MMSE_RBP;
  }
  /// Nt - rd1 - 1.
  [[nodiscard]] std::size_t relax_degree(std::size_t n_tx) const noexcept {
    return n_tx - rd1 - 1;
  }
  /// R_D = rd1 M + rd2 (M - 1).
  [[nodiscard]] std::size_t selected_edges(std::size_t m) const noexcept {
    return rd1 * m + rd2 * (m - 1);
  }

  void validate(const SystemDims& dims) const {
    dims.validate();
    if (is_relaxed()) {
      if (rd1 + 1 > dims.n_tx)
        throw Error("DetectorSpec: rd1 must lie in 0..Nt-1");
      if (rd2 > 1) throw Error("DetectorSpec: rd2 must be 0 or 1");
    }
  }

  /// "SBP", "RBP(1,0)", "MMSE-RBP(0,0)", ...
  [[nodiscard]] std::string label() const {
    std::string s(to_string(kind));
    if (is_relaxed())
      s += "(" + std::to_string(rd1) + "," + std::to_string(rd2) + ")";
    return s;
  }

  bool operator==(const DetectorSpec&) const = default;
};

/// Small dense real matrix for message storage.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
  [[nodiscard]] std::span<double> data() noexcept { return data_; }

  bool operator==(const RealMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// alpha(i, j): bit i -> factor j. beta(j, i): factor j -> bit i.
struct MessageState {
  RealMatrix alpha;  // (M Nt) x Nr
  RealMatrix beta;   // Nr x (M Nt)

  MessageState() = default;
  MessageState(std::size_t n_bits, std::size_t n_rx)
      : alpha(n_bits, n_rx), beta(n_rx, n_bits) {}

  bool operator==(const MessageState&) const = default;
};

/// Soft outputs of the message-passing and MMSE detectors follow the
/// -|r|^2 / (2 sigma^2) likelihood convention, which is half the natural-log
/// LLR of a complex Gaussian channel.
inline constexpr double kHalfScaleLlr = 2.0;

struct DetectionResult {
  BitVector hard_bits;
  std::vector<double> soft_llrs;
  /// Multiply soft_llrs by this to get natural-log LLRs. Zero when the soft
  /// values carry no probabilistic meaning (ML).
  double llr_scale = kHalfScaleLlr;
  std::size_t iterations_run = 0;
  /// Soft outputs after each iteration, when requested.
  std::vector<std::vector<double>> per_iteration_soft;
  /// Messages after each iteration, when requested.
  std::vector<MessageState> message_history;
};

struct DetectOptions {
  bool record_soft_history = false;
  bool record_messages = false;
};

inline double clamp_llr(double v) noexcept {
  return std::clamp(v, -kLlrClamp, kLlrClamp);
}

inline int hard_decision(double llr) noexcept { return llr >= 0.0 ? 1 : -1; }

// ---------------------------------------------------------------------------
// Factor-node primitives

/// log p(y_j | s) up to a constant: -|y_j - h_j s|^2 / (2 sigma^2).
inline double log_likelihood_D(std::span<const Complex> s, std::size_t j,
                               const ComplexMatrix& h, std::span<const Complex> y,
                               double noise_var) {
  if (s.size() != h.cols() || y.size() != h.rows())
    throw LengthMismatch("log_likelihood_D: dimension mismatch");
  Complex r = y[j];
  for (std::size_t k = 0; k < s.size(); ++k) r -= h(j, k) * s[k];
  return -std::norm(r) / (2.0 * noise_var);
}

/// Max-log factor update over an explicit list of bits. Every configuration
/// of the listed bits is scored as
///   -|base - sum_p gains[p] x_p|^2 / (2 noise_var) + sum_{x_p = +1} alphas[p]
/// and for each target position q the result is
///   max_{x_q = +1} (score - alphas[q]) - max_{x_q = -1} score.
/// Both SBP and RBP route through this, so RBP with a full neighbourhood is
/// bit-identical to SBP.
inline void max_log_factor(Complex base, std::span<const Complex> gains,
                           std::span<const double> alphas, double noise_var,
                           std::span<const std::size_t> targets,
                           std::span<double> out) {
  const std::size_t n = gains.size();
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::array<double, kMaxEnumeratedBits> best_plus;
  std::array<double, kMaxEnumeratedBits> best_minus;
  best_plus.fill(kNegInf);
  best_minus.fill(kNegInf);
  const double denom = 2.0 * noise_var;

  const std::size_t configs = std::size_t{1} << n;
  for (std::size_t c = 0; c < configs; ++c) {
    // bit p of c set <=> x_p = -1
    Complex r = base;
    double prior = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      if ((c >> p) & 1U) {
        r += gains[p];
      } else {
        r -= gains[p];
        prior += alphas[p];
      }
    }
    const double score = -std::norm(r) / denom + prior;
    for (std::size_t q = 0; q < targets.size(); ++q) {
      const std::size_t t = targets[q];
      if ((c >> t) & 1U)
        best_minus[q] = max_log(best_minus[q], score);
      else
        best_plus[q] = max_log(best_plus[q], score - alphas[t]);
    }
  }
  for (std::size_t q = 0; q < targets.size(); ++q)
    out[q] = best_plus[q] - best_minus[q];
}

/// Standard BP factor update: exhaustive max-log over all M Nt bits.
/// `gains` is the Nr x (M Nt) per-bit gain matrix from bit_gains().
inline RealMatrix sbp_beta_update(const RealMatrix& alpha, const ComplexMatrix& gains,
                                  std::span<const Complex> y, double noise_var) {
  const std::size_t n_rx = gains.rows();
  const std::size_t n_bits = gains.cols();
  if (n_bits > kMaxEnumeratedBits)
    throw DimensionTooLarge("sbp_beta_update: M*Nt = " + std::to_string(n_bits) +
                            " exceeds enumeration limit");
  if (alpha.rows() != n_bits || alpha.cols() != n_rx || y.size() != n_rx)
    throw LengthMismatch("sbp_beta_update: dimension mismatch");

  std::array<std::size_t, kMaxEnumeratedBits> targets;
  std::iota(targets.begin(), targets.end(), std::size_t{0});
  std::array<double, kMaxEnumeratedBits> alphas;
  std::array<double, kMaxEnumeratedBits> out;

  RealMatrix beta(n_rx, n_bits);
  for (std::size_t j = 0; j < n_rx; ++j) {
    for (std::size_t t = 0; t < n_bits; ++t) alphas[t] = alpha(t, j);
    max_log_factor(y[j], gains.row(j), {alphas.data(), n_bits}, noise_var,
                   {targets.data(), n_bits}, {out.data(), n_bits});
    for (std::size_t i = 0; i < n_bits; ++i) beta(j, i) = out[i];
  }
  return beta;
}

/// alpha(i, j) = sum_{t != j} beta(t, i), clamped.
inline RealMatrix alpha_update(const RealMatrix& beta) {
  const std::size_t n_rx = beta.rows();
  const std::size_t n_bits = beta.cols();
  RealMatrix alpha(n_bits, n_rx);
  for (std::size_t i = 0; i < n_bits; ++i)
    for (std::size_t j = 0; j < n_rx; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < n_rx; ++t)
        if (t != j) s += beta(t, i);
      alpha(i, j) = clamp_llr(s);
    }
  return alpha;
}

/// Per-bit sum of all factor messages; hard decision by sign with sgn(0) = +1.
inline DetectionResult soft_output(const RealMatrix& beta) {
  DetectionResult r;
  r.soft_llrs.assign(beta.cols(), 0.0);
  for (std::size_t i = 0; i < beta.cols(); ++i) {
    double s = 0.0;
    for (std::size_t t = 0; t < beta.rows(); ++t) s += beta(t, i);
    r.soft_llrs[i] = s;
  }
  r.hard_bits.resize(r.soft_llrs.size());
  std::transform(r.soft_llrs.begin(), r.soft_llrs.end(), r.hard_bits.begin(),
                 hard_decision);
  return r;
}

// ---------------------------------------------------------------------------
// Edge selection and Gaussian interference model

/// Per (factor j, bit i) set of selected neighbour bits, each of size R_D,
/// stored sorted ascending.
class EdgeSet {
 public:
  EdgeSet() = default;
  EdgeSet(std::size_t n_rx, std::size_t n_bits, std::size_t degree)
      : n_rx_(n_rx), n_bits_(n_bits), degree_(degree),
        idx_(n_rx * n_bits * degree) {}

  [[nodiscard]] std::size_t n_rx() const noexcept { return n_rx_; }
  [[nodiscard]] std::size_t n_bits() const noexcept { return n_bits_; }
  [[nodiscard]] std::size_t degree() const noexcept { return degree_; }

  [[nodiscard]] std::span<const std::size_t> at(std::size_t j, std::size_t i) const {
    return {idx_.data() + (j * n_bits_ + i) * degree_, degree_};
  }
  void assign(std::size_t j, std::size_t i, std::span<const std::size_t> bits) {
    if (bits.size() != degree_) throw LengthMismatch("EdgeSet: wrong edge count");
    std::copy(bits.begin(), bits.end(), idx_.begin() + (j * n_bits_ + i) * degree_);
  }

 private:
  std::size_t n_rx_ = 0;
  std::size_t n_bits_ = 0;
  std::size_t degree_ = 0;
  std::vector<std::size_t> idx_;
};

/// Psi_{j,i}: bits of the rd1 symbols with the largest |h(j,k)|, k != k(i)
/// (ties go to the smaller k), plus the other M-1 bits of symbol k(i) when
/// rd2 = 1. Bit indices are 0-based; the result is sorted ascending.
inline std::vector<std::size_t> select_edges(std::span<const Complex> h_row,
                                             std::size_t i, std::size_t rd1,
                                             std::size_t rd2, std::size_t m) {
  const std::size_t n_tx = h_row.size();
  const std::size_t own = i / m;
  if (rd1 + 1 > n_tx) throw Error("select_edges: rd1 must lie in 0..Nt-1");

  std::vector<std::size_t> order;
  order.reserve(n_tx);
  for (std::size_t k = 0; k < n_tx; ++k)
    if (k != own) order.push_back(k);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(h_row[a]) > std::abs(h_row[b]);
  });

  std::vector<std::size_t> psi;
  psi.reserve(rd1 * m + rd2 * (m - 1));
  for (std::size_t n = 0; n < rd1; ++n)
    for (std::size_t b = 0; b < m; ++b) psi.push_back(order[n] * m + b);
  if (rd2 == 1)
    for (std::size_t b = 0; b < m; ++b)
      if (own * m + b != i) psi.push_back(own * m + b);
  std::sort(psi.begin(), psi.end());
  return psi;
}

inline EdgeSet build_edge_set(const ComplexMatrix& h, std::size_t m, std::size_t rd1,
                              std::size_t rd2) {
  const std::size_t n_bits = h.cols() * m;
  EdgeSet edges(h.rows(), n_bits, rd1 * m + rd2 * (m - 1));
  for (std::size_t j = 0; j < h.rows(); ++j)
    for (std::size_t i = 0; i < n_bits; ++i)
      edges.assign(j, i, select_edges(h.row(j), i, rd1, rd2, m));
  return edges;
}

/// Gaussian model of the unselected interference plus noise z_{j,i}.
struct InterferenceModel {
  ComplexMatrix mean;  // Nr x (M Nt), rebuilt every iteration
  RealMatrix variance; // Nr x (M Nt), fixed per channel realization
};

namespace detail {
// Bits t != i that are not in the (sorted) selection psi.
template <typename Fn>
void for_each_excluded(std::span<const std::size_t> psi, std::size_t i,
                       std::size_t n_bits, Fn&& fn) {
  std::size_t p = 0;
  for (std::size_t t = 0; t < n_bits; ++t) {
    while (p < psi.size() && psi[p] < t) ++p;
    if (t == i || (p < psi.size() && psi[p] == t)) continue;
    fn(t);
  }
}
}  // namespace detail

/// u = sum over excluded bits t of g(j,t) * E[x_t], with E[x_t] = tanh(alpha/2).
/// `alpha_col` holds alpha(t, j) for all t; `gain_row` is row j of bit_gains().
inline Complex interference_mean(std::span<const double> alpha_col,
                                 std::span<const std::size_t> psi, std::size_t i,
                                 std::span<const Complex> gain_row) {
  Complex u = 0.0;
  detail::for_each_excluded(psi, i, gain_row.size(), [&](std::size_t t) {
    u += gain_row[t] * std::tanh(clamp_llr(alpha_col[t]) / 2.0);
  });
  return u;
}

/// sigma_z^2 = sum over excluded bits of |g(j,t)|^2 * var(x_t) + sigma^2, with
/// the prior var(x_t) = 1. Never updated across iterations.
inline double interference_variance(std::span<const std::size_t> psi, std::size_t i,
                                    std::span<const Complex> gain_row,
                                    double noise_var) {
  double s = 0.0;
  detail::for_each_excluded(psi, i, gain_row.size(),
                            [&](std::size_t t) { s += std::norm(gain_row[t]); });
  return s + noise_var;
}

inline InterferenceModel make_interference_model(const EdgeSet& edges,
                                                 const ComplexMatrix& gains,
                                                 double noise_var) {
  InterferenceModel model{ComplexMatrix(gains.rows(), gains.cols()),
                          RealMatrix(gains.rows(), gains.cols())};
  for (std::size_t j = 0; j < gains.rows(); ++j)
    for (std::size_t i = 0; i < gains.cols(); ++i)
      model.variance(j, i) =
          interference_variance(edges.at(j, i), i, gains.row(j), noise_var);
  return model;
}

/// Rebuilds every u_{j,i} from the given alpha messages.
inline void update_interference_means(InterferenceModel& model, const RealMatrix& alpha,
                                      const EdgeSet& edges, const ComplexMatrix& gains) {
  std::vector<double> expect(gains.cols());
  for (std::size_t j = 0; j < gains.rows(); ++j) {
    for (std::size_t t = 0; t < gains.cols(); ++t)
      expect[t] = std::tanh(clamp_llr(alpha(t, j)) / 2.0);
    const auto g = gains.row(j);
    for (std::size_t i = 0; i < gains.cols(); ++i) {
      Complex u = 0.0;
      detail::for_each_excluded(edges.at(j, i), i, g.size(),
                                [&](std::size_t t) { u += g[t] * expect[t]; });
      model.mean(j, i) = u;
    }
  }
}

/// Relaxed log-likelihood of one partial hypothesis:
///   -|y_j - g(j,i) x_i - sum_{t in psi} g(j,t) x_t - u|^2 / (2 sigma_z^2).
/// `x_psi` lists the hypothesised values of the bits in `psi`, in order.
inline double rbp_D(int x_i, std::span<const int> x_psi, std::size_t i,
                    std::span<const std::size_t> psi, Complex y_j,
                    std::span<const Complex> gain_row, Complex u, double sigma2_z) {
  if (x_psi.size() != psi.size()) throw LengthMismatch("rbp_D: hypothesis length");
  Complex r = y_j - gain_row[i] * static_cast<double>(x_i) - u;
  for (std::size_t p = 0; p < psi.size(); ++p)
    r -= gain_row[psi[p]] * static_cast<double>(x_psi[p]);
  return -std::norm(r) / (2.0 * sigma2_z);
}

/// RBP(0,0) factor message in closed form: 2 Re(conj(g) (y - u)) / sigma_z^2.
inline double rbp_closed_form(Complex y_j, Complex gain, Complex u, double sigma2_z) {
  return 2.0 * (std::conj(gain) * (y_j - u)).real() / sigma2_z;
}

enum class RbpPath {
  Auto,       // closed form when R_D = 0, enumeration otherwise
  Enumerate,  // always enumerate
};

/// Relaxed BP factor update: max-log over x_i and the selected bits only,
/// with the unselected bits folded into the Gaussian interference model.
inline RealMatrix rbp_beta_update(const RealMatrix& alpha, const EdgeSet& edges,
                                  const InterferenceModel& model,
                                  const ComplexMatrix& gains, std::span<const Complex> y,
                                  RbpPath path = RbpPath::Auto) {
  const std::size_t n_rx = gains.rows();
  const std::size_t n_bits = gains.cols();
  const std::size_t degree = edges.degree();
  if (degree > kMaxSelectedEdges)
    throw DimensionTooLarge("rbp_beta_update: R_D = " + std::to_string(degree) +
                            " exceeds enumeration limit");
  if (alpha.rows() != n_bits || alpha.cols() != n_rx || y.size() != n_rx ||
      edges.n_rx() != n_rx || edges.n_bits() != n_bits)
    throw LengthMismatch("rbp_beta_update: dimension mismatch");

  RealMatrix beta(n_rx, n_bits);
  if (degree == 0 && path == RbpPath::Auto) {
    for (std::size_t j = 0; j < n_rx; ++j)
      for (std::size_t i = 0; i < n_bits; ++i)
        beta(j, i) = rbp_closed_form(y[j], gains(j, i), model.mean(j, i),
                                     model.variance(j, i));
    return beta;
  }

  std::array<Complex, kMaxSelectedEdges + 1> g;
  std::array<double, kMaxSelectedEdges + 1> a;
  for (std::size_t j = 0; j < n_rx; ++j) {
    for (std::size_t i = 0; i < n_bits; ++i) {
      // Merge i into the sorted selection, remembering where it lands.
      const auto psi = edges.at(j, i);
      std::size_t target = 0;
      std::size_t n = 0;
      bool placed = false;
      for (std::size_t p = 0; p <= psi.size(); ++p) {
        if (!placed && (p == psi.size() || psi[p] > i)) {
          target = n;
          g[n] = gains(j, i);
          a[n++] = alpha(i, j);
          placed = true;
        }
        if (p < psi.size()) {
          g[n] = gains(j, psi[p]);
          a[n++] = alpha(psi[p], j);
        }
      }
      double out = 0.0;
      max_log_factor(y[j] - model.mean(j, i), {g.data(), n}, {a.data(), n},
                     model.variance(j, i), {&target, 1}, {&out, 1});
      beta(j, i) = out;
    }
  }
  return beta;
}

// ---------------------------------------------------------------------------
// MMSE

struct MmseEstimate {
  ComplexVector s_hat;
  ComplexMatrix k;  // (H^H H + sigma^2 I)^{-1}; the error covariance is sigma^2 k
};

inline MmseEstimate mmse_filter(const ComplexMatrix& h, std::span<const Complex> y,
                                double noise_var) {
  ComplexMatrix a = gram(h);
  for (std::size_t k = 0; k < a.rows(); ++k) a(k, k) += noise_var;
  const ComplexVector rhs_vec = adjoint_times(h, y);
  ComplexMatrix rhs(h.cols(), 1);
  std::copy(rhs_vec.begin(), rhs_vec.end(), rhs.data().begin());
  const ComplexMatrix s = hermitian_solve(a, rhs);
  ComplexMatrix k = hermitian_solve(a, ComplexMatrix::identity(h.cols()));
  // Restore exact Hermitian symmetry lost to rounding.
  for (std::size_t r = 0; r < k.rows(); ++r) {
    k(r, r) = {k(r, r).real(), 0.0};
    for (std::size_t c = r + 1; c < k.cols(); ++c) {
      const Complex avg = 0.5 * (k(r, c) + std::conj(k(c, r)));
      k(r, c) = avg;
      k(c, r) = std::conj(avg);
    }
  }
  return {ComplexVector(s.data().begin(), s.data().end()), std::move(k)};
}

/// Pseudo-prior LLR for bit i (0-based) from the MMSE estimate:
/// 2 Re(s_hat_k) / K(k,k) for BPSK; for 4-QAM the estimate is rescaled by
/// sqrt2 and the second bit of a symbol reads the imaginary part.
inline double mmse_prior_llr(std::span<const Complex> s_hat, const ComplexMatrix& k,
                             std::size_t i, std::size_t m) {
  const std::size_t sym = i / m;
  const double var = k(sym, sym).real();
  if (m == 1) return 2.0 * s_hat[sym].real() / var;
  const Complex v = s_hat[sym] * std::numbers::sqrt2;
  return 2.0 * (i % m == 0 ? v.real() : v.imag()) / var;
}

/// mmse_prior_llr() with the MMSE error variance sigma^2 K(k,k) in the
/// denominator, which puts it on the same scale as the factor messages.
inline double mmse_bit_llr(const MmseEstimate& est, double noise_var, std::size_t i,
                           std::size_t m) {
  const double llr = mmse_prior_llr(est.s_hat, est.k, i, m);
  return noise_var > 0.0 ? llr / noise_var : llr;
}

// ---------------------------------------------------------------------------
// Baselines

inline DetectionResult detect_ml(const ComplexMatrix& h, std::span<const Complex> y,
                                 std::size_t m) {
  const ComplexMatrix gains = bit_gains(h, m);
  const std::size_t n_bits = gains.cols();
  if (n_bits > kMaxEnumeratedBits)
    throw DimensionTooLarge("ML: M*Nt = " + std::to_string(n_bits) +
                            " exceeds enumeration limit");
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_config = 0;
  const std::size_t configs = std::size_t{1} << n_bits;
  for (std::size_t c = 0; c < configs; ++c) {
    double dist = 0.0;
    for (std::size_t j = 0; j < gains.rows(); ++j) {
      Complex r = y[j];
      for (std::size_t t = 0; t < n_bits; ++t)
        r += ((c >> t) & 1U) ? gains(j, t) : -gains(j, t);
      dist += std::norm(r);
    }
    if (dist < best) {
      best = dist;
      best_config = c;
    }
  }
  DetectionResult out;
  out.hard_bits.resize(n_bits);
  out.soft_llrs.resize(n_bits);
  for (std::size_t t = 0; t < n_bits; ++t) {
    out.hard_bits[t] = ((best_config >> t) & 1U) ? -1 : 1;
    out.soft_llrs[t] = kLlrClamp * out.hard_bits[t];
  }
  out.llr_scale = 0.0;
  return out;
}

inline DetectionResult detect_mmse(const ComplexMatrix& h, std::span<const Complex> y,
                                   double noise_var, std::size_t m) {
  const MmseEstimate est = mmse_filter(h, y, noise_var);
  DetectionResult out;
  const std::size_t n_bits = h.cols() * m;
  out.soft_llrs.resize(n_bits);
  out.hard_bits.resize(n_bits);
  for (std::size_t i = 0; i < n_bits; ++i) {
    out.soft_llrs[i] = clamp_llr(mmse_bit_llr(est, noise_var, i, m));
    out.hard_bits[i] = hard_decision(out.soft_llrs[i]);
  }
  return out;
}

/// Ordered MMSE successive interference cancellation: at every stage the
/// remaining stream with the smallest MMSE error variance is sliced and its
/// contribution subtracted from y.
inline DetectionResult detect_mmse_sic(const ComplexMatrix& h, std::span<const Complex> y,
                                       double noise_var, std::size_t m) {
  const std::size_t n_tx = h.cols();
  std::vector<std::size_t> remaining(n_tx);
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  ComplexVector residual(y.begin(), y.end());

  DetectionResult out;
  out.soft_llrs.assign(n_tx * m, 0.0);
  out.hard_bits.assign(n_tx * m, 1);

  while (!remaining.empty()) {
    ComplexMatrix sub(h.rows(), remaining.size());
    for (std::size_t j = 0; j < h.rows(); ++j)
      for (std::size_t c = 0; c < remaining.size(); ++c) sub(j, c) = h(j, remaining[c]);
    const MmseEstimate est = mmse_filter(sub, residual, noise_var);

    std::size_t pick = 0;
    for (std::size_t c = 1; c < remaining.size(); ++c)
      if (est.k(c, c).real() < est.k(pick, pick).real()) pick = c;

    const std::size_t k = remaining[pick];
    BitVector sym_bits(m);
    for (std::size_t b = 0; b < m; ++b) {
      const double llr = clamp_llr(mmse_bit_llr(est, noise_var, pick * m + b, m));
      out.soft_llrs[k * m + b] = llr;
      out.hard_bits[k * m + b] = sym_bits[b] = hard_decision(llr);
    }
    const Complex s = modulate(sym_bits, m)[0];
    for (std::size_t j = 0; j < h.rows(); ++j) residual[j] -= h(j, k) * s;
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Message passing

/// Initial bit-to-factor messages: zero, or the MMSE pseudo-priors for
/// MMSE-RBP (the same value on every edge of a bit).
inline RealMatrix initial_alpha(const DetectorSpec& spec, const ComplexMatrix& h,
                                std::span<const Complex> y, double noise_var,
                                std::size_t m) {
  const std::size_t n_bits = h.cols() * m;
  RealMatrix alpha(n_bits, h.rows());
  if (spec.kind != DetectorKind::MMSE_RBP) return alpha;
  const MmseEstimate est = mmse_filter(h, y, noise_var);
  for (std::size_t i = 0; i < n_bits; ++i) {
    const double a = clamp_llr(mmse_bit_llr(est, noise_var, i, m));
    for (std::size_t j = 0; j < h.rows(); ++j) alpha(i, j) = a;
  }
  return alpha;
}

/// Flooding schedule: iteration l computes every beta from the alpha of
/// iteration l-1 (with the interference means rebuilt from that alpha), then
/// every alpha from the new beta. For MMSE-RBP the pseudo-prior stays
/// attached to its bit, so alpha = prior + sum_{t != j} beta(t, i). With
/// L = 0 the soft output is the initial alpha.
inline DetectionResult detect_message_passing(const DetectorSpec& spec,
                                              const ComplexMatrix& h,
                                              std::span<const Complex> y,
                                              double noise_var, std::size_t m,
                                              const DetectOptions& options = {}) {
  const ComplexMatrix gains = bit_gains(h, m);
  const std::size_t n_bits = gains.cols();
  RealMatrix alpha = initial_alpha(spec, h, y, noise_var, m);
  const bool has_prior = spec.kind == DetectorKind::MMSE_RBP;
  const RealMatrix prior = alpha;
  RealMatrix beta(h.rows(), n_bits);

  EdgeSet edges;
  InterferenceModel model;
  if (spec.is_relaxed()) {
    edges = build_edge_set(h, m, spec.rd1, spec.rd2);
    model = make_interference_model(edges, gains, noise_var);
  }

  DetectionResult result;
  for (std::size_t l = 1; l <= spec.iterations; ++l) {
    if (spec.is_relaxed()) {
      update_interference_means(model, alpha, edges, gains);
      beta = rbp_beta_update(alpha, edges, model, gains, y);
    } else {
      beta = sbp_beta_update(alpha, gains, y, noise_var);
    }
    alpha = alpha_update(beta);
    if (has_prior)
      for (std::size_t k = 0; k < alpha.data().size(); ++k)
        alpha.data()[k] = clamp_llr(prior.data()[k] + alpha.data()[k]);
    if (options.record_soft_history)
      result.per_iteration_soft.push_back(soft_output(beta).soft_llrs);
    if (options.record_messages) {
      MessageState st;
      st.alpha = alpha;
      st.beta = beta;
      result.message_history.push_back(std::move(st));
    }
  }

  DetectionResult final_out;
  if (spec.iterations == 0) {
    final_out.soft_llrs.resize(n_bits);
    for (std::size_t i = 0; i < n_bits; ++i)
      final_out.soft_llrs[i] = h.rows() ? alpha(i, 0) : 0.0;
    final_out.hard_bits.resize(n_bits);
    std::transform(final_out.soft_llrs.begin(), final_out.soft_llrs.end(),
                   final_out.hard_bits.begin(), hard_decision);
  } else {
    final_out = soft_output(beta);
  }
  result.hard_bits = std::move(final_out.hard_bits);
  result.soft_llrs = std::move(final_out.soft_llrs);
  result.iterations_run = spec.iterations;
  return result;
}

/// Runs one detection. A pure function of its arguments.
inline DetectionResult detect(const DetectorSpec& spec, const ComplexMatrix& h,
                              std::span<const Complex> y, double noise_var,
                              std::size_t m = 1, const DetectOptions& options = {}) {
  if (y.size() != h.rows()) throw LengthMismatch("detect: y has wrong length");
  spec.validate({h.cols(), h.rows(), m});
  switch (spec.kind) {
    case DetectorKind::ML: return detect_ml(h, y, m);
    case DetectorKind::MMSE: return detect_mmse(h, y, noise_var, m);
    case DetectorKind::MMSE_SIC: return detect_mmse_sic(h, y, noise_var, m);
    case DetectorKind::SBP:
    case DetectorKind::RBP:
    case DetectorKind::MMSE_RBP:
      return detect_message_passing(spec, h, y, noise_var, m, options);
  }
  throw Error("detect: unknown detector kind");
}

}  // namespace relaxbp
