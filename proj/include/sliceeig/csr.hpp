#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "sliceeig/vecops.hpp"

// Compressed sparse row storage for real square matrices.  The eigensolvers
// only ever see abstract operators, but generators, file I/O and the direct
// factorizations all work on this concrete type.

namespace sliceeig {

struct Triplet {
  int row = 0;
  int col = 0;
  double val = 0.0;
};

class CsrMatrix {
 public:
  CsrMatrix() = default;

  // Build from coordinate triplets; duplicate entries are summed, explicit
  // zeros kept out, column indices sorted within each row.
  static CsrMatrix from_triplets(int n, std::vector<Triplet> t) {
    if (n < 0) throw std::invalid_argument("CsrMatrix: negative dimension");
    for (const auto& e : t) {
      if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n)
        throw std::out_of_range("CsrMatrix: triplet index out of range");
    }
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    CsrMatrix m;
    m.n_ = n;
    m.row_ptr_.assign(n + 1, 0);
    std::size_t i = 0;
    while (i < t.size()) {
      std::size_t j = i + 1;
      double v = t[i].val;
      while (j < t.size() && t[j].row == t[i].row && t[j].col == t[i].col) {
        v += t[j].val;
        ++j;
      }
      if (v != 0.0) {
        m.col_idx_.push_back(t[i].col);
        m.vals_.push_back(v);
        ++m.row_ptr_[t[i].row + 1];
      }
      i = j;
    }
    for (int r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  static CsrMatrix identity(int n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return from_triplets(n, std::move(t));
  }

  // Symmetric tridiagonal Toeplitz helper: diag d, off-diagonals e.
  static CsrMatrix tridiag_toeplitz(int n, double e, double d) {
    std::vector<Triplet> t;
    t.reserve(3 * n);
    for (int i = 0; i < n; ++i) {
      if (i > 0) t.push_back({i, i - 1, e});
      t.push_back({i, i, d});
      if (i < n - 1) t.push_back({i, i + 1, e});
    }
    return from_triplets(n, std::move(t));
  }

  static CsrMatrix diag(const Vec& d) {
    std::vector<Triplet> t;
    t.reserve(d.size());
    for (int i = 0; i < (int)d.size(); ++i) t.push_back({i, i, d[i]});
    return from_triplets((int)d.size(), std::move(t));
  }

  int n() const { return n_; }
  int nnz() const { return (int)vals_.size(); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& vals() const { return vals_; }

  double coeff(int i, int j) const {
    for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
      if (col_idx_[k] == j) return vals_[k];
    return 0.0;
  }

  void matvec(const Vec& x, Vec& y) const {
    y.assign(n_, 0.0);
    for (int i = 0; i < n_; ++i) {
      double s = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[col_idx_[k]];
      y[i] = s;
    }
  }

  Vec matvec(const Vec& x) const {
    Vec y;
    matvec(x, y);
    return y;
  }

  // Complex right-hand side against the real matrix.
  void matvec(const CVec& x, CVec& y) const {
    y.assign(n_, {0.0, 0.0});
    for (int i = 0; i < n_; ++i) {
      std::complex<double> s = 0.0;
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += vals_[k] * x[col_idx_[k]];
      y[i] = s;
    }
  }

  // Numerical symmetry check: |a_ij - a_ji| <= tol * max(1, |a_ij|) with
  // matching sparsity patterns.
  bool is_symmetric(double tol = 1e-14) const {
    for (int i = 0; i < n_; ++i) {
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        const int j = col_idx_[k];
        const double aij = vals_[k];
        const double aji = coeff(j, i);
        if (std::abs(aij - aji) > tol * std::max(1.0, std::abs(aij))) return false;
      }
    }
    return true;
  }

  // Max absolute column sum; for symmetric input this equals the 1- and
  // infinity-norms and is the scale used in residual thresholds.
  double one_norm() const {
    Vec colsum(n_, 0.0);
    for (int i = 0; i < n_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        colsum[col_idx_[k]] += std::abs(vals_[k]);
    double m = 0.0;
    for (double s : colsum) m = std::max(m, s);
    return m;
  }

  std::vector<Triplet> to_triplets() const {
    std::vector<Triplet> t;
    t.reserve(vals_.size());
    for (int i = 0; i < n_; ++i)
      for (int k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
        t.push_back({i, col_idx_[k], vals_[k]});
    return t;
  }

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> vals_;
};

}  // namespace sliceeig
