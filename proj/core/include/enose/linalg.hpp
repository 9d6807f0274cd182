#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace enose {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const;
  Matrix transposed() const;

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Eigen-decomposition of a symmetric matrix. Eigenvalues are sorted in
/// descending order (ties keep the original diagonal index order); column j of
/// `vectors` is the unit eigenvector for `values[j]`, signed so that its
/// largest-magnitude entry is positive.
struct SymmetricEigen {
  std::vector<double> values;
  Matrix vectors;
  int sweeps = 0;
};

/// Cyclic Jacobi rotation solver. Throws std::invalid_argument for non-square
/// input and std::runtime_error if off-diagonal mass fails to vanish within
/// `max_sweeps`.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, int max_sweeps = 100);

/// Least-squares solution of A x = b via Householder QR with column scaling.
/// Throws std::domain_error when A is (numerically) rank deficient.
std::vector<double> least_squares(const Matrix& a, std::span<const double> b);

}  // namespace enose
