#pragma once

#include "sliceeig/lanczos.hpp"
#include "sliceeig/operators.hpp"

// Balanced damped Chebyshev bandpass filters.  A filter for a slice
// [xi, eta] of the spectrum is the normalized, damping-smoothed Chebyshev
// expansion of a Dirac delta centered at a point gamma inside the mapped
// slice; gamma is chosen so both slice endpoints take the same filter value,
// and the degree is the smallest one pushing those endpoint values under a
// threshold tau.

namespace sliceeig {

enum class Damping { None, LanczosSigma, Jackson };

struct SpectralMap {
  double c = 0.0;  // midpoint of the spectral interval
  double d = 1.0;  // half-width
  SpectralMap() = default;
  explicit SpectralMap(const SpectralBounds& b)
      : c(0.5 * (b.lmax + b.lmin)), d(0.5 * (b.lmax - b.lmin)) {
    if (!(d > 0.0)) throw std::invalid_argument("SpectralMap: empty spectral interval");
  }
  double to_ref(double lambda) const { return (lambda - c) / d; }
  double from_ref(double t) const { return c + d * t; }
};

// Delta-expansion coefficients: mu_0 = 1/2, mu_j = cos(j acos gamma).
inline Vec chebyshev_coeffs(double gamma, int k) {
  if (!(std::abs(gamma) < 1.0))
    throw std::invalid_argument("chebyshev_coeffs: center must lie strictly inside (-1,1)");
  if (k < 0) throw std::invalid_argument("chebyshev_coeffs: negative degree");
  const double ac = std::acos(gamma);
  Vec mu(k + 1);
  mu[0] = 0.5;
  for (int j = 1; j <= k; ++j) mu[j] = std::cos(j * ac);
  return mu;
}

inline Vec damping_multipliers(int k, Damping kind) {
  Vec s(k + 1, 1.0);
  switch (kind) {
    case Damping::None:
      break;
    case Damping::LanczosSigma: {
      const double th = kPi / (k + 1);
      for (int j = 1; j <= k; ++j) s[j] = std::sin(j * th) / (j * th);
      break;
    }
    case Damping::Jackson: {
      const double q = kPi / (k + 2);
      const double ct = std::cos(q) / std::sin(q);
      for (int j = 1; j <= k; ++j)
        s[j] = ((k + 2 - j) * std::cos(j * q) + std::sin(j * q) * ct) / (k + 2);
      break;
    }
  }
  return s;
}

namespace detail {

// Sum_j coef[j] T_j(t) by the three-term recurrence.
inline double cheb_series(const Vec& coef, double t) {
  double acc = coef[0];
  if (coef.size() == 1) return acc;
  double tkm = 1.0, tk = t;
  acc += coef[1] * tk;
  for (std::size_t j = 2; j < coef.size(); ++j) {
    const double tn = 2.0 * t * tk - tkm;
    tkm = tk;
    tk = tn;
    acc += coef[j] * tk;
  }
  return acc;
}

}  // namespace detail

struct PolynomialFilter {
  int k = 0;             // degree
  double gamma = 0.0;    // expansion center in (-1,1)
  Vec mu;                // damped coefficients, normalized so rho(gamma) = 1
  SpectralMap map;       // spectral interval transform
  double tau = 0.8;      // endpoint threshold used during degree selection
  double ta = -1.0, tb = 1.0;  // mapped slice endpoints
  double bar = 0.0;      // Ritz acceptance bar
  Damping damping = Damping::LanczosSigma;
  bool cap_reached = false;  // degree cap hit before endpoints fell under tau
};

inline double eval_pol(const PolynomialFilter& f, double t) {
  if (std::abs(t) > 1.0 + 1e-12)
    throw std::invalid_argument("eval_pol: point outside the mapped interval [-1,1]");
  return detail::cheb_series(f.mu, std::clamp(t, -1.0, 1.0));
}

namespace detail {

// Damped (unnormalized) filter numerator and its gamma-derivative at t.
// N(t; gamma)  = sum_j s_j mu_j(gamma) T_j(t)
// dN/dgamma    = sum_j s_j T_j(t) j sin(j acos gamma)/sqrt(1-gamma^2)
inline void balance_values(const Vec& s, double gamma, double ta, double tb, double& g,
                           double& dg) {
  const int k = (int)s.size() - 1;
  const double ac = std::acos(gamma);
  const double rs = 1.0 / std::sqrt(std::max(1e-30, 1.0 - gamma * gamma));
  g = 0.0;
  dg = 0.0;
  double ta_km = 1.0, ta_k = ta, tb_km = 1.0, tb_k = tb;
  for (int j = 1; j <= k; ++j) {
    if (j > 1) {
      const double na = 2.0 * ta * ta_k - ta_km;
      ta_km = ta_k;
      ta_k = na;
      const double nb = 2.0 * tb * tb_k - tb_km;
      tb_km = tb_k;
      tb_k = nb;
    }
    const double dt = ta_k - tb_k;
    g += s[j] * std::cos(j * ac) * dt;
    dg += s[j] * j * std::sin(j * ac) * rs * dt;
  }
}

}  // namespace detail

// Center gamma making the damped degree-k filter take equal values at both
// mapped endpoints.  Newton from the midpoint with a bisection fallback.
// At very low degrees relative to a narrow slice the balanced center can
// fall slightly outside the slice, so the search runs over all of (-1,1);
// by the time the degree-selection loop accepts a filter, the center sits
// inside the slice.
inline double balance_center(int k, double ta, double tb, Damping kind) {
  if (!(ta < tb) || ta < -1.0 - 1e-12 || tb > 1.0 + 1e-12)
    throw std::invalid_argument("balance_center: bad mapped interval");
  const Vec s = damping_multipliers(k, kind);
  const double lo = -1.0 + 1e-12, hi = 1.0 - 1e-12;
  double gamma = 0.5 * (ta + tb);
  double g, dg;
  for (int it = 0; it < 50; ++it) {
    detail::balance_values(s, gamma, ta, tb, g, dg);
    if (std::abs(g) <= 1e-12 * (std::abs(dg) + 1.0)) return gamma;
    if (dg == 0.0) break;
    gamma = std::clamp(gamma - g / dg, lo, hi);
  }
  detail::balance_values(s, gamma, ta, tb, g, dg);
  if (std::abs(g) <= 1e-12 * (std::abs(dg) + 1.0)) return gamma;

  // Bisection: the difference is positive when centered near ta, negative
  // near tb.  Try the slice bracket first, then the whole mapped interval.
  double a = ta, b = tb, ga, gb, dum;
  detail::balance_values(s, a, ta, tb, ga, dum);
  detail::balance_values(s, b, ta, tb, gb, dum);
  if (ga * gb > 0.0) {
    a = lo;
    b = hi;
    detail::balance_values(s, a, ta, tb, ga, dum);
    detail::balance_values(s, b, ta, tb, gb, dum);
    if (ga * gb > 0.0) throw std::runtime_error("balance_center: no balanced center found");
  }
  for (int it = 0; it < 200; ++it) {
    gamma = 0.5 * (a + b);
    detail::balance_values(s, gamma, ta, tb, g, dum);
    if (std::abs(g) <= 1e-14 || b - a <= 1e-15) return gamma;
    ((ga * g > 0.0) ? a : b) = gamma;
    (ga * g > 0.0 ? ga : gb) = g;
  }
  return gamma;
}

struct PolyOpts {
  double tau = 0.8;
  int max_deg = 3000;
  Damping damping = Damping::LanczosSigma;
};

namespace detail {

// Final (damped, normalized) coefficient vector for a given degree/center.
inline Vec normalized_filter_coeffs(int k, double gamma, Damping kind) {
  Vec mu = chebyshev_coeffs(gamma, k);
  const Vec s = damping_multipliers(k, kind);
  for (int j = 0; j <= k; ++j) mu[j] *= s[j];
  const double denom = cheb_series(mu, gamma);
  if (denom == 0.0) throw std::runtime_error("find_pol: degenerate normalization");
  for (auto& m : mu) m /= denom;
  return mu;
}

}  // namespace detail

// Build the lowest-degree balanced filter for slice [xi, eta] of a spectrum
// with the given bounds.  Slices touching a spectral endpoint get a
// one-sided filter: the center is pinned next to that endpoint and only the
// interior endpoint value must fall under tau.
inline PolynomialFilter find_pol(double xi, double eta, const SpectralBounds& bounds,
                                 const PolyOpts& opts = {}) {
  if (!(eta > xi)) throw std::invalid_argument("find_pol: degenerate interval");
  if (eta < bounds.lmin || xi > bounds.lmax)
    throw std::invalid_argument("find_pol: interval does not overlap the spectrum");

  PolynomialFilter f;
  f.map = SpectralMap(bounds);
  f.tau = opts.tau;
  f.damping = opts.damping;
  const double ta_raw = f.map.to_ref(xi), tb_raw = f.map.to_ref(eta);
  f.ta = std::clamp(ta_raw, -1.0, 1.0);
  f.tb = std::clamp(tb_raw, -1.0, 1.0);
  const bool left_open = ta_raw <= -1.0 + 1e-12;   // slice touches lmin
  const bool right_open = tb_raw >= 1.0 - 1e-12;   // slice touches lmax
  const double width = f.tb - f.ta;
  if (!(width > 0.0)) throw std::invalid_argument("find_pol: empty mapped interval");

  for (int k = 2;; ++k) {
    if (left_open && right_open) {
      f.gamma = 0.5 * (f.ta + f.tb);
    } else if (left_open) {
      f.gamma = -1.0 + std::min(0.01, 0.1 * width);
    } else if (right_open) {
      f.gamma = 1.0 - std::min(0.01, 0.1 * width);
    } else {
      f.gamma = balance_center(k, f.ta, f.tb, opts.damping);
    }
    f.k = k;
    f.mu = detail::normalized_filter_coeffs(k, f.gamma, opts.damping);
    const double ra = eval_pol(f, f.ta), rb = eval_pol(f, f.tb);
    bool ok;
    if (left_open && right_open)
      ok = true;
    else if (left_open)
      ok = rb <= opts.tau;
    else if (right_open)
      ok = ra <= opts.tau;
    else
      ok = ra <= opts.tau && rb <= opts.tau && f.gamma > f.ta && f.gamma < f.tb;
    if (ok || k >= opts.max_deg) {
      f.cap_reached = !ok;
      if (left_open || right_open) {
        // one-sided filter: the acceptance bar is the lowest value the
        // filter takes anywhere over the slice
        double bar = std::min(ra, rb);
        for (int i = 1; i < 200; ++i)
          bar = std::min(bar, eval_pol(f, f.ta + width * i / 200.0));
        f.bar = bar;
      } else {
        f.bar = std::min(ra, rb);
      }
      return f;
    }
  }
}

// out = rho(Ahat) v with Ahat = (A - c I)/d; exactly k A-products.
inline void apply_pol(const PolynomialFilter& f, const Operator& op_a, const Vec& v, Vec& out,
                      Counters* cnt = nullptr) {
  const int n = op_a.n;
  const double c = f.map.c, invd = 1.0 / f.map.d;
  Vec prev = v, cur(n), tmp(n);
  out.assign(n, 0.0);
  axpy(f.mu[0], prev, out);
  auto ahat = [&](const Vec& x, Vec& y) {
    op_a.apply(x, y);
    for (int i = 0; i < n; ++i) y[i] = (y[i] - c * x[i]) * invd;
    if (cnt) ++cnt->n_A_matvec;
  };
  ahat(prev, cur);
  axpy(f.mu[1], cur, out);
  for (int j = 2; j <= f.k; ++j) {
    ahat(cur, tmp);
    for (int i = 0; i < n; ++i) tmp[i] = 2.0 * tmp[i] - prev[i];
    std::swap(prev, cur);
    std::swap(cur, tmp);
    axpy(f.mu[j], cur, out);
  }
}

// Generalized pencil apply acting on z-side vectors (z = B w):
// out = rho(Ahat) z with Ahat = (A B^-1 - c I)/d; exactly k A-products and
// k B-solves.
inline void apply_pol(const PolynomialFilter& f, const Operator& op_a, const Operator& b_solve,
                      const Vec& v, Vec& out, Counters* cnt = nullptr) {
  const int n = op_a.n;
  const double c = f.map.c, invd = 1.0 / f.map.d;
  Vec prev = v, cur(n), tmp(n), t(n);
  out.assign(n, 0.0);
  axpy(f.mu[0], prev, out);
  auto ahat = [&](const Vec& x, Vec& y) {
    b_solve.apply(x, t);
    op_a.apply(t, y);
    for (int i = 0; i < n; ++i) y[i] = (y[i] - c * x[i]) * invd;
    if (cnt) {
      ++cnt->n_A_matvec;
      ++cnt->n_B_solve;
    }
  };
  ahat(prev, cur);
  axpy(f.mu[1], cur, out);
  for (int j = 2; j <= f.k; ++j) {
    ahat(cur, tmp);
    for (int i = 0; i < n; ++i) tmp[i] = 2.0 * tmp[i] - prev[i];
    std::swap(prev, cur);
    std::swap(cur, tmp);
    axpy(f.mu[j], cur, out);
  }
}

}  // namespace sliceeig
