#pragma once

#include <queue>

#include "sliceeig/operators.hpp"

// Sparse SPD factorization B = G G^T with G = P L: reverse Cuthill-McKee
// ordering plus an up-looking Cholesky driven by the elimination tree.
// Dense inputs of moderate size fall back to a dense factorization.
//
// Besides the plain solve, the factor exposes the triangular pieces
// separately: the congruence transform G^-1 A G^-T of a pencil, the
// start-vector correction of sampling routines, and the shifted solves of the
// transformed problem all need G and G^-T on their own.

namespace sliceeig {

namespace detail {

// Reverse Cuthill-McKee on the undirected graph of a symmetric pattern.
// Returns perm with perm[new_pos] = old_index.
inline std::vector<int> rcm_order(const CsrMatrix& a) {
  const int n = a.n();
  std::vector<int> deg(n);
  for (int i = 0; i < n; ++i) deg[i] = a.row_ptr()[i + 1] - a.row_ptr()[i];

  std::vector<int> order;
  order.reserve(n);
  std::vector<char> seen(n, 0);
  std::vector<int> level, next;

  for (;;) {
    // Start each component from a minimum-degree vertex.
    int start = -1;
    for (int i = 0; i < n; ++i)
      if (!seen[i] && (start == -1 || deg[i] < deg[start])) start = i;
    if (start == -1) break;

    seen[start] = 1;
    level = {start};
    while (!level.empty()) {
      for (int v : level) order.push_back(v);
      next.clear();
      for (int v : level) {
        for (int k = a.row_ptr()[v]; k < a.row_ptr()[v + 1]; ++k) {
          const int u = a.col_idx()[k];
          if (!seen[u]) {
            seen[u] = 1;
            next.push_back(u);
          }
        }
      }
      std::sort(next.begin(), next.end(), [&](int x, int y) {
        return deg[x] != deg[y] ? deg[x] < deg[y] : x < y;
      });
      level.swap(next);
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

// Elimination tree of the permuted pattern; `upper` holds, per row k, the
// indices i < k with entry (k,i) present (i.e. the struct of row k's lower
// triangle).
inline std::vector<int> etree(const std::vector<std::vector<int>>& upper) {
  const int n = (int)upper.size();
  std::vector<int> parent(n, -1), ancestor(n, -1);
  for (int k = 0; k < n; ++k) {
    for (int i : upper[k]) {
      int j = i;
      while (ancestor[j] != -1 && ancestor[j] != k) {
        const int nxt = ancestor[j];
        ancestor[j] = k;
        j = nxt;
      }
      if (ancestor[j] == -1) {
        ancestor[j] = k;
        parent[j] = k;
      }
    }
  }
  return parent;
}

// Pattern of row k of L in topological order (descendants first); returns the
// start position into s (entries s[top..n-1]).
inline int ereach(const std::vector<int>& rowpat, int k, const std::vector<int>& parent,
                  std::vector<int>& s, std::vector<int>& stamp, std::vector<int>& stk) {
  const int n = (int)stamp.size();
  int top = n;
  stamp[k] = k + 1;
  for (int i : rowpat) {
    int len = 0, j = i;
    while (stamp[j] != k + 1) {
      stk[len++] = j;
      stamp[j] = k + 1;
      j = parent[j];
    }
    while (len > 0) s[--top] = stk[--len];
  }
  return top;
}

}  // namespace detail

class SpdFactor {
 public:
  // Factor a symmetric positive definite matrix.  Throws (naming the pivot)
  // if a non-positive pivot shows up.
  static SpdFactor factor(const CsrMatrix& b, int dense_limit = 2000) {
    if (!b.is_symmetric()) throw std::invalid_argument("factor_spd: matrix is not symmetric");
    SpdFactor f;
    f.n_ = b.n();
    const double density = b.n() ? double(b.nnz()) / (double(b.n()) * b.n()) : 0.0;
    if (b.n() <= dense_limit && density > 0.25) {
      f.factor_dense(b);
    } else {
      f.factor_sparse(b);
    }
    return f;
  }

  int n() const { return n_; }
  const std::vector<int>& perm() const { return perm_; }
  long factor_nnz() const { return dense_ ? (long)n_ * (n_ + 1) / 2 : (long)lval_.size(); }

  // y = B^-1 x
  Vec solve(const Vec& x) const {
    Vec u = gather(x);
    lsolve(u);
    ltsolve(u);
    return scatter(u);
  }

  // y = G^-T x with G = P L  (congruence transform / start-vector correction)
  Vec solve_gt(const Vec& x) const {
    Vec u = x;
    ltsolve(u);
    return scatter(u);
  }

  // y = G^-1 x
  Vec solve_g(const Vec& x) const {
    Vec u = gather(x);
    lsolve(u);
    return u;
  }

  // y = G x
  Vec mul_g(const Vec& x) const {
    Vec u = x;
    lmul(u);
    return scatter(u);
  }

  // y = G^T x
  Vec mul_gt(const Vec& x) const {
    Vec u = gather(x);
    ltmul(u);
    return u;
  }

  // Complex variants of the G operations (shifted solves of transformed
  // pencils run through these).
  CVec mul_g(const CVec& x) const { return cplx([&](Vec& re, Vec& im) { lmul(re); lmul(im); }, x, false); }
  CVec mul_gt(const CVec& x) const { return cplx([&](Vec& re, Vec& im) { ltmul(re); ltmul(im); }, x, true); }

 private:
  int n_ = 0;
  bool dense_ = false;
  std::vector<int> perm_;   // perm_[new] = old
  std::vector<int> iperm_;  // iperm_[old] = new
  // Sparse L in CSC, diagonal entry first in each column.
  std::vector<int> col_ptr_, row_idx_;
  Vec lval_;
  // Dense L (lower), column-major, when the dense path is taken.
  DenseMat ldense_;

  Vec gather(const Vec& x) const {
    Vec u(n_);
    for (int i = 0; i < n_; ++i) u[i] = x[perm_[i]];
    return u;
  }
  Vec scatter(const Vec& u) const {
    Vec y(n_);
    for (int i = 0; i < n_; ++i) y[perm_[i]] = u[i];
    return y;
  }

  template <class F>
  CVec cplx(F&& op, const CVec& x, bool gather_first) const {
    Vec re(n_), im(n_);
    if (gather_first) {
      for (int i = 0; i < n_; ++i) {
        re[i] = x[perm_[i]].real();
        im[i] = x[perm_[i]].imag();
      }
    } else {
      for (int i = 0; i < n_; ++i) {
        re[i] = x[i].real();
        im[i] = x[i].imag();
      }
    }
    op(re, im);
    CVec y(n_);
    if (gather_first) {
      for (int i = 0; i < n_; ++i) y[i] = {re[i], im[i]};
    } else {
      for (int i = 0; i < n_; ++i) y[perm_[i]] = {re[i], im[i]};
    }
    return y;
  }

  void lsolve(Vec& x) const {
    if (dense_) {
      for (int j = 0; j < n_; ++j) {
        x[j] /= ldense_(j, j);
        for (int i = j + 1; i < n_; ++i) x[i] -= ldense_(i, j) * x[j];
      }
      return;
    }
    for (int j = 0; j < n_; ++j) {
      const int p0 = col_ptr_[j];
      x[j] /= lval_[p0];
      for (int p = p0 + 1; p < col_ptr_[j + 1]; ++p) x[row_idx_[p]] -= lval_[p] * x[j];
    }
  }

  void ltsolve(Vec& x) const {
    if (dense_) {
      for (int j = n_ - 1; j >= 0; --j) {
        double s = x[j];
        for (int i = j + 1; i < n_; ++i) s -= ldense_(i, j) * x[i];
        x[j] = s / ldense_(j, j);
      }
      return;
    }
    for (int j = n_ - 1; j >= 0; --j) {
      const int p0 = col_ptr_[j];
      double s = x[j];
      for (int p = p0 + 1; p < col_ptr_[j + 1]; ++p) s -= lval_[p] * x[row_idx_[p]];
      x[j] = s / lval_[p0];
    }
  }

  void lmul(Vec& x) const {
    if (dense_) {
      for (int i = n_ - 1; i >= 0; --i) {
        double s = 0.0;
        for (int j = 0; j <= i; ++j) s += ldense_(i, j) * x[j];
        x[i] = s;
      }
      return;
    }
    Vec y(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) y[row_idx_[p]] += lval_[p] * x[j];
    }
    x = std::move(y);
  }

  void ltmul(Vec& x) const {
    if (dense_) {
      for (int j = 0; j < n_; ++j) {
        double s = 0.0;
        for (int i = j; i < n_; ++i) s += ldense_(i, j) * x[i];
        x[j] = s;
      }
      return;
    }
    Vec y(n_, 0.0);
    for (int j = 0; j < n_; ++j) {
      double s = 0.0;
      for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) s += lval_[p] * x[row_idx_[p]];
      y[j] = s;
    }
    x = std::move(y);
  }

  void factor_dense(const CsrMatrix& b) {
    dense_ = true;
    perm_.resize(n_);
    iperm_.resize(n_);
    for (int i = 0; i < n_; ++i) perm_[i] = iperm_[i] = i;
    ldense_ = DenseMat(n_, n_);
    for (const auto& t : b.to_triplets())
      if (t.row >= t.col) ldense_(t.row, t.col) = t.val;
    for (int j = 0; j < n_; ++j) {
      double d = ldense_(j, j);
      for (int k = 0; k < j; ++k) d -= ldense_(j, k) * ldense_(j, k);
      if (d <= 0.0)
        throw std::runtime_error("factor_spd: non-positive pivot at index " + std::to_string(j));
      d = std::sqrt(d);
      ldense_(j, j) = d;
      for (int i = j + 1; i < n_; ++i) {
        double s = ldense_(i, j);
        for (int k = 0; k < j; ++k) s -= ldense_(i, k) * ldense_(j, k);
        ldense_(i, j) = s / d;
      }
    }
  }

  void factor_sparse(const CsrMatrix& b) {
    perm_ = detail::rcm_order(b);
    iperm_.assign(n_, 0);
    for (int i = 0; i < n_; ++i) iperm_[perm_[i]] = i;

    // Permuted lower-triangle structure of each row, plus diagonal values.
    std::vector<std::vector<int>> rowpat(n_);
    std::vector<std::vector<double>> rowval(n_);
    Vec diag(n_, 0.0);
    for (int iold = 0; iold < n_; ++iold) {
      const int i = iperm_[iold];
      for (int k = b.row_ptr()[iold]; k < b.row_ptr()[iold + 1]; ++k) {
        const int j = iperm_[b.col_idx()[k]];
        if (j < i) {
          rowpat[i].push_back(j);
          rowval[i].push_back(b.vals()[k]);
        } else if (j == i) {
          diag[i] = b.vals()[k];
        }
      }
    }

    const std::vector<int> parent = detail::etree(rowpat);

    // Symbolic pass: column counts (diagonal included).
    std::vector<int> s(n_), stamp(n_, 0), stk(n_), count(n_, 1);
    for (int k = 0; k < n_; ++k) {
      const int top = detail::ereach(rowpat[k], k, parent, s, stamp, stk);
      for (int t = top; t < n_; ++t) ++count[s[t]];
    }
    col_ptr_.assign(n_ + 1, 0);
    for (int j = 0; j < n_; ++j) col_ptr_[j + 1] = col_ptr_[j] + count[j];
    row_idx_.assign(col_ptr_[n_], 0);
    lval_.assign(col_ptr_[n_], 0.0);

    // Numeric pass (up-looking).
    std::vector<int> next(col_ptr_.begin(), col_ptr_.end() - 1);
    std::fill(stamp.begin(), stamp.end(), 0);
    Vec x(n_, 0.0);
    for (int k = 0; k < n_; ++k) {
      const int top = detail::ereach(rowpat[k], k, parent, s, stamp, stk);
      for (std::size_t q = 0; q < rowpat[k].size(); ++q) x[rowpat[k][q]] = rowval[k][q];
      double d = diag[k];
      for (int t = top; t < n_; ++t) {
        const int j = s[t];
        const double lkj = x[j] / lval_[col_ptr_[j]];
        x[j] = 0.0;
        for (int p = col_ptr_[j] + 1; p < next[j]; ++p) x[row_idx_[p]] -= lval_[p] * lkj;
        d -= lkj * lkj;
        row_idx_[next[j]] = k;
        lval_[next[j]] = lkj;
        ++next[j];
      }
      if (d <= 0.0)
        throw std::runtime_error("factor_spd: non-positive pivot at index " +
                                 std::to_string(perm_[k]));
      row_idx_[next[k]] = k;
      lval_[next[k]] = std::sqrt(d);
      ++next[k];
    }
  }
};

inline SpdFactor factor_spd(const CsrMatrix& b, int dense_limit = 2000) {
  return SpdFactor::factor(b, dense_limit);
}

// Operator handles over a factor (captured by reference).
inline Operator make_solve_operator(const SpdFactor& f) {
  return Operator{f.n(), [&f](const Vec& x, Vec& y) { y = f.solve(x); }};
}

}  // namespace sliceeig
