#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bdssd/error.hpp"
#include "bdssd/numeric.hpp"

namespace bdssd {

/// Small dense row-major matrix. Sized for state spaces of birth-and-death
/// chains, where d is at most a few thousand.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, const T& fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  template <class U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(i, j) = scalar_cast<U>((*this)(i, j));
    return out;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

template <class T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows())
    throw Error(ErrorCode::ShapeMismatch, "matrix product " + std::to_string(a.rows()) + "x" +
                                              std::to_string(a.cols()) + " * " +
                                              std::to_string(b.rows()) + "x" +
                                              std::to_string(b.cols()));
  Matrix<T> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T& aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

template <class T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::ShapeMismatch, "matrix difference of unequal shapes");
  Matrix<T> c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

/// Induced infinity norm: largest absolute row sum.
template <class T>
T inf_norm(const Matrix<T>& m) {
  T best(0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    T sum(0);
    for (const T& x : m.row(i)) sum += Scalar<T>::abs(x);
    if (sum > best) best = sum;
  }
  return best;
}

/// Determinant by LU with partial pivoting.
double determinant(Matrix<double> m);

/// Inverse by Gauss-Jordan with partial pivoting. Throws SingularMatrix.
Matrix<double> inverse(const Matrix<double>& m);

}  // namespace bdssd
