#pragma once

#include "sliceeig/filter_poly.hpp"
#include "sliceeig/lanczos.hpp"

// Spectral density (density of states) estimators.  Both methods sample the
// matrix only through operator applications with a handful of random probe
// vectors, and return a smooth curve phi on a uniform grid over the spectral
// interval, normalized to unit integral, so that n * integral(phi, [xi,eta])
// estimates the eigenvalue count inside [xi, eta].

namespace sliceeig {

enum class DosMethod { Kpm, Lanczos };

struct DosConfig {
  DosMethod method = DosMethod::Kpm;
  int m = 60;        // Chebyshev degree (kpm) or Lanczos steps (lanczos)
  int n_vec = 40;    // number of random probe vectors
  int npts = 300;    // output grid size
  double gaussian_sigma = 0.0;  // lanczos smoothing width; 0 picks the default
  std::uint64_t seed = 1234;
};

struct DosCurve {
  Vec xdos;             // uniform grid over the spectral interval
  Vec ydos;             // density values >= 0, unit trapezoid integral
  double nev_est = 0.0; // estimated eigenvalue count over the whole grid
  int n = 0;            // dimension of the sampled matrix
};

namespace detail {

inline void dos_validate(const Operator& op, const SpectralBounds& b, const DosConfig& cfg) {
  if (!(b.lmin < b.lmax)) throw std::invalid_argument("dos: empty spectral interval");
  if (cfg.m < 1 || cfg.n_vec < 1 || cfg.npts < 2)
    throw std::invalid_argument("dos: need m >= 1, n_vec >= 1, npts >= 2");
  if (op.n < 1) throw std::invalid_argument("dos: empty operator");
}

inline Vec dos_grid(const SpectralBounds& b, int npts) {
  Vec x(npts);
  for (int i = 0; i < npts; ++i) x[i] = b.lmin + (b.lmax - b.lmin) * i / (npts - 1);
  return x;
}

inline double trapezoid(const Vec& x, const Vec& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

// Clip negatives, scale to unit integral, fill the count estimate.
inline void dos_finalize(DosCurve& c) {
  for (double& v : c.ydos) v = std::max(v, 0.0);
  const double mass = trapezoid(c.xdos, c.ydos);
  if (!(mass > 0.0)) throw std::runtime_error("dos: vanishing density estimate");
  for (double& v : c.ydos) v /= mass;
  c.nev_est = c.n * trapezoid(c.xdos, c.ydos);
}

// Accumulate the Ritz-value Gaussians of one Lanczos run into ydos.
inline void add_ritz_gaussians(const TriDiag& tri, const Vec& x, double sigma, Vec& ydos) {
  EigDecomp d = sym_tridiag_eig(tri, true);
  const int steps = (int)d.values.size();
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * kPi));
  for (int i = 0; i < steps; ++i) {
    const double theta = d.values[i];
    const double tau2 = d.vectors(0, i) * d.vectors(0, i);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double u = (x[j] - theta) / sigma;
      ydos[j] += tau2 * norm * std::exp(-0.5 * u * u);
    }
  }
}

}  // namespace detail

// Kernel polynomial estimate: Jackson-damped Chebyshev moments of the mapped
// operator, sampled by Rademacher probes, against the Chebyshev weight
//   phi(t) ~ 2/(pi sqrt(1-t^2)) * sum_k' g_k zeta_k T_k(t) .
inline DosCurve kpm_dos(const Operator& op, const SpectralBounds& bounds, const DosConfig& cfg = {}) {
  detail::dos_validate(op, bounds, cfg);
  const SpectralMap map{bounds};
  const int n = op.n, m = cfg.m;

  // Mapped operator applications t = (A w - c w) / d.
  auto mapped = [&](const Vec& w, Vec& t) {
    op.apply(w, t);
    for (int i = 0; i < n; ++i) t[i] = (t[i] - map.c * w[i]) / map.d;
  };

  Vec zeta(m + 1, 0.0);
  Rng rng(cfg.seed);
  Vec w0, w1(n), t(n);
  for (int l = 0; l < cfg.n_vec; ++l) {
    const Vec v = rng.rademacher_vec(n);
    w0 = v;
    mapped(w0, w1);
    zeta[0] += dot(v, w0);
    if (m >= 1) zeta[1] += dot(v, w1);
    for (int k = 2; k <= m; ++k) {
      mapped(w1, t);
      for (int i = 0; i < n; ++i) t[i] = 2.0 * t[i] - w0[i];
      zeta[k] += dot(v, t);
      w0.swap(w1);
      w1.swap(t);
    }
  }
  for (double& z : zeta) z /= (double)cfg.n_vec * n;

  const Vec g = damping_multipliers(m, Damping::Jackson);
  DosCurve c;
  c.n = n;
  c.xdos = detail::dos_grid(bounds, cfg.npts);
  c.ydos.resize(cfg.npts);
  for (int i = 0; i < cfg.npts; ++i) {
    const double th = map.to_ref(c.xdos[i]);
    double s = 0.5 * g[0] * zeta[0];
    const double ang = std::acos(std::min(1.0, std::max(-1.0, th)));
    for (int k = 1; k <= m; ++k) s += g[k] * zeta[k] * std::cos(k * ang);
    const double under = std::max(1.0 - th * th, 1e-10);
    c.ydos[i] = 2.0 / (kPi * std::sqrt(under)) * s / map.d;
  }
  // The Chebyshev weight diverges at the interval ends, turning the tiny
  // residual moment sum there into a one-cell spike that would swallow the
  // normalization; the end samples take their neighbor's value instead.
  c.ydos[0] = c.ydos[1];
  c.ydos[cfg.npts - 1] = c.ydos[cfg.npts - 2];
  detail::dos_finalize(c);
  return c;
}

// Lanczos quadrature estimate: each probe contributes its Ritz values as
// Gaussian nodes weighted by the squared first eigenvector components.
inline DosCurve lan_dos(const Operator& op, const SpectralBounds& bounds, const DosConfig& cfg = {}) {
  detail::dos_validate(op, bounds, cfg);
  const double sigma = cfg.gaussian_sigma > 0.0
                           ? cfg.gaussian_sigma
                           : 0.4 * (bounds.lmax - bounds.lmin) / std::sqrt((double)cfg.m);
  DosCurve c;
  c.n = op.n;
  c.xdos = detail::dos_grid(bounds, cfg.npts);
  c.ydos.assign(cfg.npts, 0.0);

  InnerProduct euclid;
  Rng rng(cfg.seed);
  for (int l = 0; l < cfg.n_vec; ++l) {
    LanczosState st = lanczos_run(op, euclid, rng.normal_vec(op.n), cfg.m);
    detail::add_ritz_gaussians(st.tri, c.xdos, sigma, c.ydos);
  }
  detail::dos_finalize(c);
  return c;
}

// Pencil (A,B) density via B-inner-product Lanczos.  The probe vector is
// corrected by b_halfsolve (an application of B^(-1/2) or L^(-T)) so that its
// B-norm statistics match a Euclidean probe of the equivalent standard
// problem; op_b supplies the B products of the weighted recurrence.
inline DosCurve dos_generalized(const Operator& op_a, const Operator& b_solve,
                                const Operator& b_halfsolve, const Operator& op_b,
                                const SpectralBounds& bounds, const DosConfig& cfg = {}) {
  detail::dos_validate(op_a, bounds, cfg);
  const double sigma = cfg.gaussian_sigma > 0.0
                           ? cfg.gaussian_sigma
                           : 0.4 * (bounds.lmax - bounds.lmin) / std::sqrt((double)cfg.m);
  DosCurve c;
  c.n = op_a.n;
  c.xdos = detail::dos_grid(bounds, cfg.npts);
  c.ydos.assign(cfg.npts, 0.0);

  InnerProduct ip;
  ip.b = &op_b;
  ip.b_solve = &b_solve;
  Rng rng(cfg.seed);
  Vec start;
  for (int l = 0; l < cfg.n_vec; ++l) {
    b_halfsolve.apply(rng.normal_vec(op_a.n), start);
    LanczosState st = lanczos_run(op_a, ip, start, cfg.m);
    detail::add_ritz_gaussians(st.tri, c.xdos, sigma, c.ydos);
  }
  detail::dos_finalize(c);
  return c;
}

namespace detail {

// Cumulative curve mass from the grid start to t, with linear interpolation
// inside the cell containing t.
inline double dos_cumulative(const DosCurve& c, double t) {
  const Vec& x = c.xdos;
  const Vec& y = c.ydos;
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (t >= x[i]) {
      s += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    } else {
      const double f = (t - x[i - 1]) / (x[i] - x[i - 1]);
      if (f > 0.0) {
        const double yt = y[i - 1] + f * (y[i] - y[i - 1]);
        s += 0.5 * (yt + y[i - 1]) * (t - x[i - 1]);
      }
      break;
    }
  }
  return s;
}

}  // namespace detail

// Estimated eigenvalue count over [xi, eta]: the integral of n * phi.
inline double dos_count(const DosCurve& c, double xi, double eta) {
  if (c.xdos.size() < 2) throw std::invalid_argument("dos_count: curve has no grid");
  const double slack = 1e-12 * (c.xdos.back() - c.xdos.front());
  if (xi > eta || xi < c.xdos.front() - slack || eta > c.xdos.back() + slack)
    throw std::invalid_argument("dos_count: interval outside the curve range");
  return c.n * (detail::dos_cumulative(c, eta) - detail::dos_cumulative(c, xi));
}

}  // namespace sliceeig
