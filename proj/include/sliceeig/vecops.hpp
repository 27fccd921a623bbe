#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

// Small dense kernels shared across the library.  Everything operates on
// std::vector<double> (or std::complex<double>) with plain loops; problem
// sizes here are desk scale, so clarity wins over blocking tricks.

namespace sliceeig {

using Vec = std::vector<double>;
using CVec = std::vector<std::complex<double>>;

inline constexpr double kPi = 3.14159265358979323846;

inline double dot(const Vec& x, const Vec& y) {
  assert(x.size() == y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double nrm2(const Vec& x) { return std::sqrt(dot(x, x)); }

// y += a*x
inline void axpy(double a, const Vec& x, Vec& y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline void scal(double a, Vec& x) {
  for (auto& v : x) v *= a;
}

inline void caxpy(std::complex<double> a, const CVec& x, CVec& y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double cnrm2(const CVec& x) {
  double s = 0.0;
  for (const auto& v : x) s += std::norm(v);
  return std::sqrt(s);
}

// Column-major dense matrix.  Used for Lanczos bases, Ritz vectors and the
// small projected problems; not meant as a general linear-algebra type.
class DenseMat {
 public:
  DenseMat() = default;
  DenseMat(int rows, int cols) : rows_(rows), cols_(cols), a_(std::size_t(rows) * cols, 0.0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return a_[std::size_t(j) * rows_ + i]; }
  double operator()(int i, int j) const { return a_[std::size_t(j) * rows_ + i]; }

  double* col(int j) { return a_.data() + std::size_t(j) * rows_; }
  const double* col(int j) const { return a_.data() + std::size_t(j) * rows_; }

  void col_copy(int j, const Vec& v) {
    assert((int)v.size() == rows_);
    std::copy(v.begin(), v.end(), col(j));
  }
  Vec col_vec(int j) const { return Vec(col(j), col(j) + rows_); }

  // Append a column (grows storage; rows fixed).
  void push_col(const Vec& v) {
    assert(rows_ == 0 || (int)v.size() == rows_);
    if (rows_ == 0) rows_ = (int)v.size();
    a_.insert(a_.end(), v.begin(), v.end());
    ++cols_;
  }

  // y = M(:,0:k)*x over the first k columns.
  void mult_cols(int k, const double* x, Vec& y) const {
    y.assign(rows_, 0.0);
    for (int j = 0; j < k; ++j) {
      const double* cj = col(j);
      const double xj = x[j];
      if (xj == 0.0) continue;
      for (int i = 0; i < rows_; ++i) y[i] += xj * cj[i];
    }
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> a_;
};

}  // namespace sliceeig
