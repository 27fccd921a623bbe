#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "sliceeig/vecops.hpp"

// Symmetric tridiagonal eigensolver: implicit-shift QL iteration with
// Wilkinson shifts, optionally accumulating the rotations into an eigenvector
// matrix.  Deterministic for a given input.  This is the workhorse behind the
// projected problems of every Lanczos-type routine in the library, so it is
// kept self-contained and dependency-free.

namespace sliceeig {

struct TriDiag {
  Vec alpha;  // diagonal, length m
  Vec beta;   // off-diagonal, length m-1
};

struct EigDecomp {
  Vec values;        // ascending
  DenseMat vectors;  // column j is the eigenvector of values[j] (if requested)
  bool have_vectors = false;
};

namespace detail {

// QL sweeps on (d, e); e[i] couples d[i] and d[i+1], e[m-1] is workspace.
// If z is non-null its columns are rotated along (z must have m columns).
inline void ql_implicit(Vec& d, Vec& e, DenseMat* z) {
  const int m = (int)d.size();
  if (m == 0) return;
  e.resize(m);
  e[m - 1] = 0.0;

  for (int l = 0; l < m; ++l) {
    int iter = 0;
    int split;
    do {
      for (split = l; split < m - 1; ++split) {
        const double dd = std::abs(d[split]) + std::abs(d[split + 1]);
        if (std::abs(e[split]) <= 1e-16 * dd) break;
      }
      if (split != l) {
        if (iter++ == 60)
          throw std::runtime_error("ql_implicit: too many iterations (should not happen)");
        // Wilkinson shift from the top 2x2 of the unreduced block.
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[split] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = split - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[split] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z) {
            double* zi = z->col(i);
            double* zi1 = z->col(i + 1);
            for (int k = 0; k < z->rows(); ++k) {
              f = zi1[k];
              zi1[k] = s * zi[k] + c * f;
              zi[k] = c * zi[k] - s * f;
            }
          }
        }
        if (r == 0.0 && split - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[split] = 0.0;
      }
    } while (split != l);
  }
}

// Sort eigenvalues ascending, permuting matching columns of z.
inline void sort_eigs(Vec& d, DenseMat* z) {
  const int m = (int)d.size();
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) { return d[a] < d[b]; });
  Vec ds(m);
  for (int j = 0; j < m; ++j) ds[j] = d[perm[j]];
  d.swap(ds);
  if (z) {
    DenseMat zs(z->rows(), m);
    for (int j = 0; j < m; ++j)
      std::copy(z->col(perm[j]), z->col(perm[j]) + z->rows(), zs.col(j));
    *z = std::move(zs);
  }
}

}  // namespace detail

inline EigDecomp sym_tridiag_eig(const TriDiag& t, bool want_vectors) {
  const int m = (int)t.alpha.size();
  if (m > 0 && (int)t.beta.size() != m - 1)
    throw std::invalid_argument("sym_tridiag_eig: beta must have length m-1");

  EigDecomp out;
  out.values = t.alpha;
  Vec e = t.beta;
  e.resize(std::max(m, 1));
  if (want_vectors) {
    out.vectors = DenseMat(m, m);
    for (int j = 0; j < m; ++j) out.vectors(j, j) = 1.0;
    detail::ql_implicit(out.values, e, &out.vectors);
    detail::sort_eigs(out.values, &out.vectors);
    out.have_vectors = true;
  } else {
    detail::ql_implicit(out.values, e, nullptr);
    detail::sort_eigs(out.values, nullptr);
  }
  return out;
}

}  // namespace sliceeig
