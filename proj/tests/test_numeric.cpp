#include <gtest/gtest.h>

#include "bdssd/matrix.hpp"
#include "bdssd/numeric.hpp"

using namespace bdssd;

TEST(ParseNumber, DecimalsAreExact) {
  EXPECT_EQ(parse_number("0.49").exact, Rational(49, 100));
  EXPECT_EQ(parse_number("3/4").exact, Rational(3, 4));
  EXPECT_EQ(parse_number("-2.5e-3").exact, Rational(-1, 400));
  EXPECT_EQ(parse_number("12").exact, Rational(12));
  EXPECT_DOUBLE_EQ(parse_number("0.49").value, 0.49);
}

TEST(ParseNumber, RejectsGarbage) {
  for (const char* bad : {"", "abc", "1/0", "1/", "0.5x", "--1"}) {
    try {
      parse_number(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << bad;
    }
  }
}

TEST(ShortestRepr, RoundTrips) {
  for (double x : {0.1, 0.49, 1.0 / 3.0, 1e-300, 123456.789, -0.0}) {
    EXPECT_EQ(std::stod(shortest_repr(x)), x);
  }
  EXPECT_EQ(shortest_repr(0.49), "0.49");
}

TEST(NumericMode, Parses) {
  EXPECT_EQ(parse_numeric_mode("rational"), NumericMode::Rational);
  EXPECT_EQ(parse_numeric_mode("float"), NumericMode::Float);
  EXPECT_THROW(parse_numeric_mode("quad"), Error);
}

TEST(Matrix, ProductAndShapeErrors) {
  Matrix<Rational> a(2, 2), b(2, 1);
  a(0, 0) = 1;
  a(0, 1) = Rational(1, 2);
  a(1, 1) = 3;
  b(0, 0) = 2;
  b(1, 0) = 4;
  const auto c = a * b;
  EXPECT_EQ(c(0, 0), Rational(4));
  EXPECT_EQ(c(1, 0), Rational(12));
  try {
    (void)(b * b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Matrix, DeterminantAndInverse) {
  Matrix<double> m(3, 3);
  const double vals[3][3] = {{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = vals[i][j];
  EXPECT_NEAR(determinant(m), 4.0, 1e-14);
  const auto inv = inverse(m);
  const auto id = m * inv;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(id(i, j), i == j ? 1.0 : 0.0, 1e-14);
  Matrix<double> singular(2, 2, 1.0);
  EXPECT_THROW(inverse(singular), Error);
}
