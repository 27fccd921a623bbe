#pragma once

#include "sliceeig/cholesky.hpp"

// Complex-symmetric LDL^T factorization of A - sigma*B (sigma off the real
// axis), for the shifted solves of rational filters.  Same RCM + elimination
// tree machinery as the SPD factorization, with 1x1 complex pivots; if a
// pivot degenerates the routine refactors densely with partial pivoting.

namespace sliceeig {

class ShiftedFactor {
 public:
  using Cplx = std::complex<double>;

  static ShiftedFactor factor(const CsrMatrix& a, const CsrMatrix& b, Cplx sigma,
                              int dense_limit = 2000) {
    if (a.n() != b.n()) throw std::invalid_argument("factor_shifted: size mismatch");
    ShiftedFactor f;
    f.n_ = a.n();
    f.sigma_ = sigma;

    // C = A - sigma B on the union pattern.
    std::vector<Triplet> tre;
    std::vector<std::pair<std::pair<int, int>, Cplx>> entries;
    entries.reserve(a.nnz() + b.nnz());
    for (const auto& t : a.to_triplets()) entries.push_back({{t.row, t.col}, Cplx(t.val, 0.0)});
    for (const auto& t : b.to_triplets()) entries.push_back({{t.row, t.col}, -sigma * t.val});
    std::sort(entries.begin(), entries.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    std::vector<int> rows, cols;
    CVec vals;
    std::size_t i = 0;
    while (i < entries.size()) {
      Cplx v = entries[i].second;
      std::size_t j = i + 1;
      while (j < entries.size() && entries[j].first == entries[i].first) v += entries[j++].second;
      rows.push_back(entries[i].first.first);
      cols.push_back(entries[i].first.second);
      vals.push_back(v);
      i = j;
    }

    if (!f.try_sparse(rows, cols, vals)) {
      if (f.n_ > dense_limit)
        throw std::runtime_error("factor_shifted: degenerate pivot and problem too large for the dense fallback");
      f.factor_dense(rows, cols, vals);
    }
    return f;
  }

  int n() const { return n_; }
  Cplx sigma() const { return sigma_; }

  // y = (A - sigma B)^{-1} x
  CVec solve(const CVec& x) const {
    if (dense_) return solve_dense(x);
    CVec u(n_);
    for (int i = 0; i < n_; ++i) u[i] = x[perm_[i]];
    // L y = u (unit lower)
    for (int j = 0; j < n_; ++j)
      for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) u[row_idx_[p]] -= lval_[p] * u[j];
    // D z = y
    for (int j = 0; j < n_; ++j) u[j] /= d_[j];
    // L^T w = z
    for (int j = n_ - 1; j >= 0; --j) {
      Cplx s = u[j];
      for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) s -= lval_[p] * u[row_idx_[p]];
      u[j] = s;
    }
    CVec y(n_);
    for (int i = 0; i < n_; ++i) y[perm_[i]] = u[i];
    return y;
  }

 private:
  int n_ = 0;
  Cplx sigma_;
  bool dense_ = false;
  std::vector<int> perm_, iperm_;
  // Unit lower L in CSC (strictly lower entries only) and diagonal D.
  std::vector<int> col_ptr_, row_idx_;
  CVec lval_, d_;
  // Dense LU with partial pivoting (fallback).
  std::vector<Cplx> lu_;
  std::vector<int> piv_;

  bool try_sparse(const std::vector<int>& rows, const std::vector<int>& cols, const CVec& vals) {
    // Symmetrized pattern for ordering.
    std::vector<Triplet> pat;
    pat.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) pat.push_back({rows[k], cols[k], 1.0});
    const CsrMatrix patm = CsrMatrix::from_triplets(n_, std::move(pat));
    perm_ = detail::rcm_order(patm);
    iperm_.assign(n_, 0);
    for (int i = 0; i < n_; ++i) iperm_[perm_[i]] = i;

    double cmax = 0.0;
    for (const auto& v : vals) cmax = std::max(cmax, std::abs(v));
    const double pivot_tol = 1e-12 * cmax;

    std::vector<std::vector<int>> rowpat(n_);
    std::vector<CVec> rowval(n_);
    CVec diag(n_, Cplx(0.0, 0.0));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const int i = iperm_[rows[k]];
      const int j = iperm_[cols[k]];
      if (j < i) {
        rowpat[i].push_back(j);
        rowval[i].push_back(vals[k]);
      } else if (j == i) {
        diag[i] = vals[k];
      }
    }

    const std::vector<int> parent = detail::etree(rowpat);
    std::vector<int> s(n_), stamp(n_, 0), stk(n_), count(n_, 0);
    for (int k = 0; k < n_; ++k) {
      const int top = detail::ereach(rowpat[k], k, parent, s, stamp, stk);
      for (int t = top; t < n_; ++t) ++count[s[t]];
    }
    col_ptr_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_ptr_[j + 1] = col_ptr_[j] + count[j];
    row_idx_.assign(col_ptr_[n_], 0);
    lval_.assign(col_ptr_[n_], Cplx(0.0, 0.0));
    d_.assign(n_, Cplx(0.0, 0.0));

    std::vector<int> next(col_ptr_.begin(), col_ptr_.end() - 1);
    std::fill(stamp.begin(), stamp.end(), 0);
    CVec x(n_, Cplx(0.0, 0.0));
    for (int k = 0; k < n_; ++k) {
      const int top = detail::ereach(rowpat[k], k, parent, s, stamp, stk);
      for (std::size_t q = 0; q < rowpat[k].size(); ++q) x[rowpat[k][q]] = rowval[k][q];
      Cplx dk = diag[k];
      for (int t = top; t < n_; ++t) {
        const int j = s[t];
        const Cplx y = x[j];  // = L(k,j) * d_j
        x[j] = Cplx(0.0, 0.0);
        const Cplx lkj = y / d_[j];
        for (int p = col_ptr_[j]; p < next[j]; ++p) x[row_idx_[p]] -= lval_[p] * y;
        dk -= lkj * y;
        row_idx_[next[j]] = k;
        lval_[next[j]] = lkj;
        ++next[j];
      }
      if (std::abs(dk) <= pivot_tol) return false;  // degenerate: dense fallback
      d_[k] = dk;
    }
    return true;
  }

  void factor_dense(const std::vector<int>& rows, const std::vector<int>& cols, const CVec& vals) {
    dense_ = true;
    lu_.assign((std::size_t)n_ * n_, Cplx(0.0, 0.0));
    for (std::size_t k = 0; k < rows.size(); ++k)
      lu_[(std::size_t)cols[k] * n_ + rows[k]] = vals[k];
    piv_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      int p = j;
      for (int i = j + 1; i < n_; ++i)
        if (std::abs(lu_[(std::size_t)j * n_ + i]) > std::abs(lu_[(std::size_t)j * n_ + p])) p = i;
      piv_[j] = p;
      if (p != j)
        for (int c = 0; c < n_; ++c) std::swap(lu_[(std::size_t)c * n_ + j], lu_[(std::size_t)c * n_ + p]);
      const Cplx pj = lu_[(std::size_t)j * n_ + j];
      if (pj == Cplx(0.0, 0.0))
        throw std::runtime_error("factor_shifted: singular shifted matrix");
      for (int i = j + 1; i < n_; ++i) {
        const Cplx m = lu_[(std::size_t)j * n_ + i] / pj;
        lu_[(std::size_t)j * n_ + i] = m;
        if (m != Cplx(0.0, 0.0))
          for (int c = j + 1; c < n_; ++c)
            lu_[(std::size_t)c * n_ + i] -= m * lu_[(std::size_t)c * n_ + j];
      }
    }
  }

  CVec solve_dense(const CVec& x) const {
    CVec u = x;
    // elimination swapped whole rows: permute first, then substitute
    for (int j = 0; j < n_; ++j) std::swap(u[j], u[piv_[j]]);
    for (int j = 0; j < n_; ++j)
      for (int i = j + 1; i < n_; ++i) u[i] -= lu_[(std::size_t)j * n_ + i] * u[j];
    for (int j = n_ - 1; j >= 0; --j) {
      u[j] /= lu_[(std::size_t)j * n_ + j];
      for (int i = 0; i < j; ++i) u[i] -= lu_[(std::size_t)j * n_ + i] * u[j];
    }
    return u;
  }
};

inline ShiftedFactor factor_shifted(const CsrMatrix& a, const CsrMatrix& b,
                                    std::complex<double> sigma, int dense_limit = 2000) {
  return ShiftedFactor::factor(a, b, sigma, dense_limit);
}

}  // namespace sliceeig
