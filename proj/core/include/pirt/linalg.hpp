#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace pirt {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Proxy matrices are stored d x r so that
// column j is proxy j; embedding batches are stored n x d, one row per sample.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vec>& rows);
  static Matrix from_columns(const std::vector<Vec>& columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  Vec column(std::size_t c) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  Matrix& operator+=(const Matrix& other);
  Matrix& operator*=(double scale);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vec data_;
};

double dot(std::span<const double> a, std::span<const double> b);

double l2_norm(std::span<const double> v);

// Cosine of the angle between a and b, clamped to [-1, 1].
// Throws Error(ZeroVector) if either input has zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// P^T P for a d x r matrix. The upper triangle is computed and mirrored so the
// result is exactly symmetric.
Matrix gram_matrix(const Matrix& p);

double frobenius_sq(const Matrix& m);

Matrix transpose(const Matrix& m);

Matrix matmul(const Matrix& a, const Matrix& b);

// Throws Error(NonFiniteValue) naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

}  // namespace pirt
