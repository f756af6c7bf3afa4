#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sllb {

// Dense row-major f64 matrix sized for mini-batch work.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int64_t rows, int64_t cols);
  Matrix(int64_t rows, int64_t cols, std::vector<double> data);

  int64_t rows() const { return rows_; }
  int64_t cols() const { return cols_; }

  double& operator()(int64_t i, int64_t j) {
    return data_[static_cast<size_t>(i * cols_ + j)];
  }
  double operator()(int64_t i, int64_t j) const {
    return data_[static_cast<size_t>(i * cols_ + j)];
  }
  double* row(int64_t i) { return data_.data() + i * cols_; }
  const double* row(int64_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  Matrix select_rows(const std::vector<int64_t>& idx) const;

 private:
  int64_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);       // a(m,k) * b(k,n)
Matrix matmul_at_b(const Matrix& a, const Matrix& b);  // a(m,p)^T * b(m,n) -> (p,n)
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);  // a(m,n) * b(p,n)^T -> (m,p)

}  // namespace sllb
