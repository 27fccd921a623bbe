#pragma once

#include <stdexcept>

#include "sliceeig/csr.hpp"
#include "sliceeig/tridiag_eig.hpp"

// Dense symmetric eigensolver: Householder reduction to tridiagonal form with
// accumulated transforms, then the implicit-QL iteration.  Intended as the
// brute-force reference for small problems and for the projected matrices of
// the thick-restart solvers; guarded against accidental use on large inputs.

namespace sliceeig {

class DenseSym {
 public:
  DenseSym() = default;
  explicit DenseSym(int n) : a_(n, n) {}
  explicit DenseSym(const DenseMat& m) : a_(m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("DenseSym: not square");
  }
  explicit DenseSym(const CsrMatrix& s) : a_(s.n(), s.n()) {
    for (const auto& t : s.to_triplets()) a_(t.row, t.col) = t.val;
  }

  int n() const { return a_.rows(); }
  double operator()(int i, int j) const { return a_(i, j); }
  // Mirrored write keeps the stored matrix exactly symmetric.
  void set(int i, int j, double v) {
    a_(i, j) = v;
    a_(j, i) = v;
  }
  const DenseMat& mat() const { return a_; }

  Vec matvec(const Vec& x) const {
    Vec y(n(), 0.0);
    for (int j = 0; j < n(); ++j) {
      const double* cj = a_.col(j);
      for (int i = 0; i < n(); ++i) y[i] += cj[i] * x[j];
    }
    return y;
  }

 private:
  DenseMat a_;
};

namespace detail {

// Householder reduction of a (full, symmetric) matrix held in z to
// tridiagonal (d, e), accumulating the orthogonal transform into z itself.
inline void householder_tridiag(DenseMat& z, Vec& d, Vec& e) {
  const int n = z.rows();
  d.assign(n, 0.0);
  e.assign(n, 0.0);

  for (int i = n - 1; i >= 1; --i) {
    const int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        const double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k) z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    const int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

}  // namespace detail

inline EigDecomp dense_sym_eig(const DenseSym& a, bool want_vectors, int size_guard = 5000) {
  const int n = a.n();
  if (n > size_guard)
    throw std::invalid_argument("dense_sym_eig: matrix exceeds the size guard");

  DenseMat z = a.mat();
  EigDecomp out;
  Vec e;
  detail::householder_tridiag(z, out.values, e);
  // The reduction stores the coupling of d[i-1],d[i] at e[i]; the QL kernel
  // wants it at e[i-1].
  if (!e.empty()) {
    e.erase(e.begin());
    e.push_back(0.0);
  }
  if (want_vectors) {
    detail::ql_implicit(out.values, e, &z);
    out.vectors = std::move(z);
    detail::sort_eigs(out.values, &out.vectors);
    out.have_vectors = true;
  } else {
    detail::ql_implicit(out.values, e, nullptr);
    detail::sort_eigs(out.values, nullptr);
  }
  return out;
}

}  // namespace sliceeig
