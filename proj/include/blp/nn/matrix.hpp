#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "blp/errors.hpp"

namespace blp {

// Dense row-major matrix of doubles. A single point x in R^d is a 1 x d row.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                       " != " + std::to_string(rows_) + "x" +
                       std::to_string(cols_));
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m;
    for (const auto& r : rows) m.append_row(std::vector<double>(r));
    return m;
  }

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

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  // Appending to an empty 0x0 matrix fixes the column count.
  void append_row(std::span<const double> r) {
    if (rows_ == 0 && cols_ == 0) cols_ = r.size();
    if (r.size() != cols_)
      throw ShapeError("append_row: width " + std::to_string(r.size()) +
                       " != " + std::to_string(cols_));
    data_.insert(data_.end(), r.begin(), r.end());
    ++rows_;
  }

  void append_rows(const Matrix& other) {
    for (std::size_t r = 0; r < other.rows(); ++r) append_row(other.row(r));
  }

  void reserve_rows(std::size_t n) { data_.reserve(n * cols_); }

  Matrix select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto src = row(idx[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const noexcept {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.cols() != b.cols()) throw ShapeError("vstack: column mismatch");
  Matrix out = a;
  out.append_rows(b);
  return out;
}

}  // namespace blp
