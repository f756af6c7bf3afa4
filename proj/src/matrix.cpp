#include "sllb/matrix.hpp"

#include <string>

#include "sllb/error.hpp"

namespace sllb {

Matrix::Matrix(int64_t rows, int64_t cols)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows * cols), 0.0) {
  if (rows < 0 || cols < 0) throw ValidationError("Matrix: negative dimensions");
}

Matrix::Matrix(int64_t rows, int64_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0) throw ValidationError("Matrix: negative dimensions");
  if (data_.size() != static_cast<size_t>(rows_ * cols_)) {
    throw ValidationError("Matrix: data length does not match rows*cols");
  }
}

Matrix Matrix::select_rows(const std::vector<int64_t>& idx) const {
  Matrix out(static_cast<int64_t>(idx.size()), cols_);
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= rows_) {
      throw ValidationError("select_rows: index " + std::to_string(idx[i]) + " out of range");
    }
    const double* src = row(idx[i]);
    double* dst = out.row(static_cast<int64_t>(i));
    for (int64_t j = 0; j < cols_; ++j) dst[j] = src[j];
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ValidationError("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  const int64_t n = b.cols();
  for (int64_t i = 0; i < a.rows(); ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (int64_t k = 0; k < a.cols(); ++k) {
      const double aik = ai[k];
      const double* bk = b.row(k);
      for (int64_t j = 0; j < n; ++j) ci[j] += aik * bk[j];
    }
  }
  return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ValidationError("matmul_at_b: row counts differ");
  Matrix c(a.cols(), b.cols());
  const int64_t n = b.cols();
  for (int64_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    const double* bi = b.row(i);
    for (int64_t p = 0; p < a.cols(); ++p) {
      const double aip = ai[p];
      double* cp = c.row(p);
      for (int64_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
    }
  }
  return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ValidationError("matmul_a_bt: column counts differ");
  Matrix c(a.rows(), b.rows());
  for (int64_t i = 0; i < a.rows(); ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int64_t p = 0; p < b.rows(); ++p) {
      const double* bp = b.row(p);
      double acc = 0.0;
      for (int64_t j = 0; j < a.cols(); ++j) acc += ai[j] * bp[j];
      ci[p] = acc;
    }
  }
  return c;
}

}  // namespace sllb
