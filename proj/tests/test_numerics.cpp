#include <gtest/gtest.h>

#include "relaxbp/channel.hpp"
#include "relaxbp/numerics.hpp"

namespace {

using namespace relaxbp;

ComplexMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  RandomStream rng(seed);
  ComplexMatrix m(r, c);
  for (Complex& v : m.data()) v = rng.complex_normal(1.0);
  return m;
}

TEST(Gram, IdentityMapsToIdentity) {
  EXPECT_EQ(gram(ComplexMatrix::identity(2)), ComplexMatrix::identity(2));
}

TEST(Gram, ScalarIsSquaredMagnitude) {
  const ComplexMatrix g = gram(ComplexMatrix(1, 1, {Complex(3, 4)}));
  EXPECT_EQ(g(0, 0), Complex(25, 0));
}

TEST(Gram, MatchesTripleLoop) {
  const ComplexMatrix h = random_matrix(4, 4, 5);
  const ComplexMatrix g = gram(h);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) {
      Complex want = 0.0;
      for (std::size_t j = 0; j < 4; ++j) want += std::conj(h(j, a)) * h(j, b);
      EXPECT_NEAR(std::abs(g(a, b) - want), 0.0, 1e-12);
    }
}

TEST(Gram, ExactlyHermitian) {
  const ComplexMatrix g = gram(random_matrix(5, 3, 9));
  for (std::size_t a = 0; a < 3; ++a) {
    EXPECT_EQ(g(a, a).imag(), 0.0);
    for (std::size_t b = 0; b < 3; ++b) EXPECT_EQ(g(a, b), std::conj(g(b, a)));
  }
}

TEST(HermitianSolve, IdentityReturnsRhs) {
  const ComplexMatrix b(2, 1, {Complex(1, 2), Complex(-3, 0.5)});
  EXPECT_EQ(hermitian_solve(ComplexMatrix::identity(2), b), b);
}

TEST(HermitianSolve, DiagonalScaling) {
  const ComplexMatrix a(2, 2, {2.0, 0.0, 0.0, 2.0});
  const ComplexMatrix x = hermitian_solve(a, ComplexMatrix(2, 1, {4.0, 6.0}));
  EXPECT_NEAR(std::abs(x(0, 0) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(x(1, 0) - 3.0), 0.0, 1e-15);
}

TEST(HermitianSolve, ResidualOnRandomSystems) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ComplexMatrix a = gram(random_matrix(6, 4, seed));
    for (std::size_t k = 0; k < 4; ++k) a(k, k) += 0.1;
    const ComplexMatrix b = random_matrix(4, 3, seed + 1000);
    const ComplexMatrix x = hermitian_solve(a, b);
    ComplexMatrix r = multiply(a, x);
    for (std::size_t k = 0; k < r.data().size(); ++k) r.data()[k] -= b.data()[k];
    EXPECT_LE(norm(r) / norm(b), 1e-10) << "seed " << seed;
  }
}

TEST(HermitianSolve, RankDeficientThrows) {
  // Two identical columns: H^H H is singular.
  ComplexMatrix h(3, 2);
  for (std::size_t j = 0; j < 3; ++j) h(j, 0) = h(j, 1) = Complex(1.0 + j, -0.5);
  EXPECT_THROW(hermitian_solve(gram(h), ComplexMatrix::identity(2)), SingularMatrix);
  EXPECT_THROW(hermitian_solve(ComplexMatrix(2, 2), ComplexMatrix::identity(2)),
               SingularMatrix);
}

TEST(HermitianSolve, ShapeMismatchThrows) {
  EXPECT_THROW(hermitian_solve(ComplexMatrix::identity(2), ComplexMatrix(3, 1)),
               LengthMismatch);
}

TEST(MaxLog, Examples) {
  EXPECT_EQ(max_log(0.0, 0.0), 0.0);
  EXPECT_EQ(max_log(-3.5, 1.25), 1.25);
  EXPECT_EQ(max_log(1e6, -1e6), 1e6);
}

TEST(MaxLog, BoundsTheExactLogSum) {
  for (double a = -5.0; a <= 5.0; a += 0.25)
    for (double b = -5.0; b <= 5.0; b += 0.25) {
      const double exact = std::log(std::exp(a) + std::exp(b));
      const double approx = max_log(a, b);
      EXPECT_LE(approx, exact + 1e-12);
      EXPECT_GE(approx, exact - std::log(2.0) - 1e-12);
    }
}

TEST(Multiply, MatrixVectorAndMismatch) {
  const ComplexMatrix a(2, 2, {1.0, 2.0, Complex(0, 1), 0.0});
  const ComplexVector y = multiply(a, ComplexVector{1.0, 1.0});
  EXPECT_EQ(y[0], Complex(3, 0));
  EXPECT_EQ(y[1], Complex(0, 1));
  EXPECT_THROW(multiply(a, ComplexVector{1.0}), LengthMismatch);
  EXPECT_THROW(ComplexMatrix(2, 2, {1.0}), LengthMismatch);
}

}  // namespace
