#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace relaxbp {

using Complex = std::complex<double>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : Error {
  using Error::Error;
};

struct DimensionTooLarge : Error {
  using Error::Error;
};

struct LengthMismatch : Error {
  using Error::Error;
};

struct IoFailure : Error {
  using Error::Error;
};

/// Dense row-major complex matrix. Sized for MIMO problems (at most 16x16 or
/// so), so there is no blocking or sparsity.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}
  ComplexMatrix(std::size_t rows, std::size_t cols,
                std::initializer_list<Complex> values)
      : rows_(rows), cols_(cols), data_(values) {
    if (data_.size() != rows * cols)
      throw LengthMismatch("ComplexMatrix: initializer has wrong length");
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t k = 0; k < n; ++k) m(k, k) = 1.0;
    return m;
  }

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  Complex& operator()(std::size_t r, std::size_t c) noexcept {
    return data_[r * cols_ + c];
  }
  const Complex& operator()(std::size_t r, std::size_t c) const noexcept {
    return data_[r * cols_ + c];
  }

  [[nodiscard]] std::span<const Complex> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  [[nodiscard]] std::span<const Complex> data() const noexcept { return data_; }
  [[nodiscard]] std::span<Complex> data() noexcept { return data_; }

  bool operator==(const ComplexMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

using ComplexVector = std::vector<Complex>;

/// H^H H, computed so that the result is exactly Hermitian: the lower
/// triangle is written as the conjugate of the upper one.
inline ComplexMatrix gram(const ComplexMatrix& h) {
  const std::size_t n = h.cols();
  ComplexMatrix g(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      Complex acc = 0.0;
      for (std::size_t j = 0; j < h.rows(); ++j)
        acc += std::conj(h(j, a)) * h(j, b);
      if (a == b) acc = {acc.real(), 0.0};
      g(a, b) = acc;
      g(b, a) = std::conj(acc);
    }
  }
  return g;
}

/// H^H y.
inline ComplexVector adjoint_times(const ComplexMatrix& h,
                                   std::span<const Complex> y) {
  if (y.size() != h.rows())
    throw LengthMismatch("adjoint_times: dimension mismatch");
  ComplexVector out(h.cols());
  for (std::size_t k = 0; k < h.cols(); ++k) {
    Complex acc = 0.0;
    for (std::size_t j = 0; j < h.rows(); ++j) acc += std::conj(h(j, k)) * y[j];
    out[k] = acc;
  }
  return out;
}

inline ComplexVector multiply(const ComplexMatrix& a,
                              std::span<const Complex> x) {
  if (x.size() != a.cols()) throw LengthMismatch("multiply: dimension mismatch");
  ComplexVector out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    Complex acc = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) acc += a(r, c) * x[c];
    out[r] = acc;
  }
  return out;
}

inline ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw LengthMismatch("multiply: dimension mismatch");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex v = a(r, k);
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += v * b(k, c);
    }
  return out;
}

/// Frobenius norm.
inline double norm(const ComplexMatrix& a) {
  double s = 0.0;
  for (const Complex& v : a.data()) s += std::norm(v);
  return std::sqrt(s);
}

/// Solves A X = B for Hermitian positive definite A by Cholesky (A = L L^H).
/// Throws SingularMatrix when a pivot drops below 1e-14 relative to the
/// largest diagonal entry of A.
inline ComplexMatrix hermitian_solve(const ComplexMatrix& a,
                                     const ComplexMatrix& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n)
    throw LengthMismatch("hermitian_solve: dimension mismatch");

  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    scale = std::max(scale, std::abs(a(k, k).real()));
  const double tiny = 1e-14 * std::max(scale, 1.0);

  ComplexMatrix l(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    double d = a(c, c).real();
    for (std::size_t k = 0; k < c; ++k) d -= std::norm(l(c, k));
    if (!(d > tiny) || !std::isfinite(d))
      throw SingularMatrix("hermitian_solve: pivot " + std::to_string(c) +
                           " is not positive");
    const double pivot = std::sqrt(d);
    l(c, c) = pivot;
    for (std::size_t r = c + 1; r < n; ++r) {
      Complex s = a(r, c);
      for (std::size_t k = 0; k < c; ++k) s -= l(r, k) * std::conj(l(c, k));
      l(r, c) = s / pivot;
    }
  }

  ComplexMatrix x = b;
  for (std::size_t col = 0; col < b.cols(); ++col) {
    // L z = b
    for (std::size_t r = 0; r < n; ++r) {
      Complex s = x(r, col);
      for (std::size_t k = 0; k < r; ++k) s -= l(r, k) * x(k, col);
      x(r, col) = s / l(r, r).real();
    }
    // L^H x = z
    for (std::size_t r = n; r-- > 0;) {
      Complex s = x(r, col);
      for (std::size_t k = r + 1; k < n; ++k) s -= std::conj(l(k, r)) * x(k, col);
      x(r, col) = s / l(r, r).real();
    }
  }
  return x;
}

/// log(e^a + e^b) ~ max(a, b).
constexpr double max_log(double a, double b) noexcept { return a < b ? b : a; }

}  // namespace relaxbp
