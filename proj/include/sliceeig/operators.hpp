#pragma once

#include <functional>
#include <stdexcept>

#include "sliceeig/csr.hpp"

// Matrix-free operator handles.  Solvers only ever see these callbacks, so a
// user can plug in any representation (assembled matrix, stencil code,
// factorization, polynomial approximation) without touching the algorithms.

namespace sliceeig {

// Real linear map y = Op(x).
struct Operator {
  int n = 0;
  std::function<void(const Vec&, Vec&)> apply;

  Vec operator()(const Vec& x) const {
    Vec y;
    apply(x, y);
    return y;
  }
};

// Complex linear map, used for the shifted solves of rational filters.
struct ComplexOperator {
  int n = 0;
  std::function<void(const CVec&, CVec&)> apply;
};

// The operator view of an assembled matrix.  The matrix is captured by
// reference: it must outlive the handle.
inline Operator make_operator(const CsrMatrix& a) {
  return Operator{a.n(), [&a](const Vec& x, Vec& y) { a.matvec(x, y); }};
}

inline ComplexOperator make_complex_operator(const CsrMatrix& a) {
  return ComplexOperator{a.n(), [&a](const CVec& x, CVec& y) { a.matvec(x, y); }};
}

// Operation counts accumulated by filter application and the drivers.
// One application of an operator counts as one, regardless of arithmetic.
struct Counters {
  long n_A_matvec = 0;
  long n_B_matvec = 0;
  long n_B_solve = 0;
  long n_shift_solve = 0;
  double t_mv = 0.0;     // seconds in matrix-vector products
  double t_orth = 0.0;   // seconds in (re)orthogonalization
  double t_sv = 0.0;     // seconds in triangular/shifted solves
  double t_total = 0.0;  // wall time of the driver

  Counters& operator+=(const Counters& o) {
    n_A_matvec += o.n_A_matvec;
    n_B_matvec += o.n_B_matvec;
    n_B_solve += o.n_B_solve;
    n_shift_solve += o.n_shift_solve;
    t_mv += o.t_mv;
    t_orth += o.t_orth;
    t_sv += o.t_sv;
    t_total += o.t_total;
    return *this;
  }
};

// Inner-product context for the Lanczos-type routines: euclidean when b is
// null, x' B y otherwise.  The B-weighted Lanczos recurrence additionally
// needs B^-1 applications (b_solve).
struct InnerProduct {
  const Operator* b = nullptr;
  const Operator* b_solve = nullptr;

  bool euclidean() const { return b == nullptr; }

  double dot(const Vec& x, const Vec& y) const {
    if (!b) return sliceeig::dot(x, y);
    Vec by;
    b->apply(y, by);
    return sliceeig::dot(x, by);
  }

  double norm(const Vec& x) const {
    const double s = dot(x, x);
    if (s < 0.0)
      throw std::runtime_error("InnerProduct: non-positive norm (B is not positive definite?)");
    return std::sqrt(s);
  }
};

}  // namespace sliceeig
