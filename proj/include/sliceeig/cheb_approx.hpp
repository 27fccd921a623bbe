#pragma once

#include <string>

#include "sliceeig/lanczos.hpp"
#include "sliceeig/operators.hpp"

// Chebyshev least-squares polynomial approximation of B^-1 or B^-1/2 on an
// interval [lmin, lmax] with lmin > 0.  This replaces triangular solves with
// matrix-vector products wherever a factorization of B is unwanted: the
// coefficients come from a discrete least-squares fit (Chebyshev weight) on a
// 4*max_deg-point Chebyshev grid of the mapped interval.

namespace sliceeig {

enum class ScalarFun { Inverse, InverseSqrt };

struct ChebApprox {
  ScalarFun fun = ScalarFun::Inverse;
  double lmin = 0.0, lmax = 0.0;  // fit interval
  Vec coeff;                      // Chebyshev coefficients, degree = coeff.size()-1
  double achieved_rel_error = 0.0;

  int degree() const { return (int)coeff.size() - 1; }

  // Scalar evaluation p(t) by the Clenshaw recurrence on the mapped argument.
  double eval(double t) const {
    const double c = 0.5 * (lmax + lmin), h = 0.5 * (lmax - lmin);
    const double x = (t - c) / h;
    double b1 = 0.0, b2 = 0.0;
    for (int j = (int)coeff.size() - 1; j >= 1; --j) {
      const double b0 = 2.0 * x * b1 - b2 + coeff[j];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + coeff[0];
  }
};

inline ChebApprox ls_pol_approx(ScalarFun fun, const SpectralBounds& bounds, double tol,
                                int max_deg = 300) {
  if (bounds.lmin <= 0.0)
    throw std::invalid_argument("ls_pol_approx: interval must be positive (B must be SPD)");
  if (bounds.lmax <= bounds.lmin)
    throw std::invalid_argument("ls_pol_approx: empty interval");

  const double pi = 3.14159265358979323846;
  const double c = 0.5 * (bounds.lmax + bounds.lmin), h = 0.5 * (bounds.lmax - bounds.lmin);
  auto f = [&](double t) { return fun == ScalarFun::Inverse ? 1.0 / t : 1.0 / std::sqrt(t); };

  // Discrete Chebyshev-weighted least squares on N nodes: with Chebyshev
  // points the normal equations collapse to the discrete cosine sums below.
  const int N = 4 * max_deg;
  Vec fx(N), xs(N);
  for (int i = 0; i < N; ++i) {
    xs[i] = std::cos(pi * (i + 0.5) / N);
    fx[i] = f(c + h * xs[i]);
  }
  Vec coef(max_deg + 1, 0.0);
  for (int j = 0; j <= max_deg; ++j) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += fx[i] * std::cos(j * std::acos(xs[i]));
    coef[j] = (j == 0 ? 1.0 : 2.0) * s / N;
  }

  // Smallest degree whose truncation meets the relative tolerance on a fine
  // grid of the interval.
  const int ngrid = 2000;
  for (int d = 1; d <= max_deg; ++d) {
    ChebApprox ap{fun, bounds.lmin, bounds.lmax, Vec(coef.begin(), coef.begin() + d + 1), 0.0};
    double worst = 0.0;
    for (int i = 0; i <= ngrid; ++i) {
      const double t = bounds.lmin + (bounds.lmax - bounds.lmin) * i / ngrid;
      worst = std::max(worst, std::abs(ap.eval(t) - f(t)) / std::abs(f(t)));
    }
    if (worst <= tol) {
      ap.achieved_rel_error = worst;
      return ap;
    }
    if (d == max_deg)
      throw std::runtime_error("ls_pol_approx: tolerance not reached; best relative error " +
                               std::to_string(worst) + " at degree " + std::to_string(max_deg));
  }
  throw std::logic_error("ls_pol_approx: unreachable");
}

// y = p(B) v via the three-term Chebyshev recurrence; deg B products.
inline void apply_cheb(const ChebApprox& ap, const Operator& b, const Vec& v, Vec& y,
                       Counters* counters = nullptr) {
  const double c = 0.5 * (ap.lmax + ap.lmin), h = 0.5 * (ap.lmax - ap.lmin);
  auto mapped = [&](const Vec& x, Vec& out) {
    b.apply(x, out);
    if (counters) ++counters->n_B_matvec;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - c * x[i]) / h;
  };

  Vec w0 = v, w1;
  y.assign(v.size(), 0.0);
  axpy(ap.coeff[0], w0, y);
  if (ap.degree() >= 1) {
    mapped(w0, w1);
    axpy(ap.coeff[1], w1, y);
  }
  for (int j = 2; j <= ap.degree(); ++j) {
    Vec w2;
    mapped(w1, w2);
    for (std::size_t i = 0; i < w2.size(); ++i) w2[i] = 2.0 * w2[i] - w0[i];
    axpy(ap.coeff[j], w2, y);
    w0 = std::move(w1);
    w1 = std::move(w2);
  }
}

}  // namespace sliceeig
