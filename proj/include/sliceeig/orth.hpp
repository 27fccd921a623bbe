#pragma once

#include <numeric>

#include "sliceeig/operators.hpp"

// Classical Gram-Schmidt with one conditional re-pass (CGS2).  The re-pass
// fires when the first pass removes too much of the vector, per the usual
// norm-drop criterion with factor 1/sqrt(2).

namespace sliceeig {

inline constexpr double kDgksEta = 0.70710678118654752;  // 1/sqrt(2)
inline constexpr double kBreakdownTol = 1e-14;

namespace detail {
// One classical pass: t := t - subside * (dotside' * t); coefficients are all
// measured against the incoming t (optionally pre-weighted through w).
inline void cgs_pass(Vec& t, const Vec& weighted, const DenseMat& dotside,
                     const DenseMat& subside, int k, double* h) {
  if (k == 0) return;
  Vec c(k);
  for (int j = 0; j < k; ++j)
    c[j] = std::inner_product(dotside.col(j), dotside.col(j) + dotside.rows(), weighted.begin(),
                              0.0);
  for (int j = 0; j < k; ++j) {
    const double* sj = subside.col(j);
    const double cj = c[j];
    for (int i = 0; i < subside.rows(); ++i) t[i] -= cj * sj[i];
    if (h) h[j] += cj;
  }
}
}  // namespace detail

// Orthogonalize v in place against the first k columns of q under ip and
// normalize it.  Returns the norm of the remainder before normalization, or
// 0.0 when v lies in the span of q to working precision (breakdown: the
// caller should draw a fresh vector).
inline double cgs2_orthogonalize(Vec& v, const DenseMat& q, int k, const InnerProduct& ip) {
  const double initial = ip.norm(v);
  if (initial == 0.0) return 0.0;

  double before = initial;
  double after = initial;
  for (int pass = 0; pass < 2; ++pass) {
    if (ip.euclidean()) {
      detail::cgs_pass(v, v, q, q, k, nullptr);
    } else {
      Vec bv;
      ip.b->apply(v, bv);
      detail::cgs_pass(v, bv, q, q, k, nullptr);
    }
    after = ip.norm(v);
    if (after > kDgksEta * before) break;
    before = after;
  }

  if (after <= kBreakdownTol * initial) return 0.0;
  scal(1.0 / after, v);
  return after;
}

// Paired-basis variant used inside the B-weighted recurrences: removes from t
// its components along span(subside) with coefficients measured against
// dotside,
//   t := t - sum_j  <dotside_j, t> subside_j,
// where (dotside_j, subside_j) are (w_j, z_j) pairs with z = B w (or swapped).
// The plain euclidean norm of t serves as the re-pass criterion.  If h is
// non-null the coefficients are accumulated into it (h[j] += c_j).
inline void paired_cgs2(Vec& t, const DenseMat& dotside, const DenseMat& subside, int k,
                        double* h = nullptr) {
  double before = nrm2(t);
  if (before == 0.0 || k == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    detail::cgs_pass(t, t, dotside, subside, k, h);
    const double after = nrm2(t);
    if (after > kDgksEta * before) break;
    before = after;
  }
}

}  // namespace sliceeig
