#pragma once

#include "sliceeig/filter_poly.hpp"
#include "sliceeig/tridiag_eig.hpp"

// Rational filters for a slice, in the coordinates that map the slice to
// [-1,1].  A Cauchy filter discretizes the contour integral of the resolvent
// around the unit circle; a least-squares filter keeps the quadrature poles
// (possibly repeated) and refits the coefficients to the step function under
// a weighted L2 norm.  Conjugate pole pairs are folded, so only the
// upper-half-plane poles are stored and the filter reads
//   rho(t) = (2/s) * Re sum_j sum_k alpha_jk / (t - sigma_j)^k .

namespace sliceeig {

namespace detail {

// n-point Gauss-Legendre nodes/weights on [-1,1] via the Jacobi matrix.
inline void gauss_legendre(int n, Vec& x, Vec& w) {
  TriDiag t;
  t.alpha.assign(n, 0.0);
  t.beta.resize(n - 1);
  for (int j = 1; j < n; ++j) t.beta[j - 1] = j / std::sqrt(4.0 * j * j - 1.0);
  EigDecomp d = sym_tridiag_eig(t, true);
  x = d.values;
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = d.vectors(0, i);
    w[i] = 2.0 * v0 * v0;
  }
}

}  // namespace detail

enum class ContourRule { GaussLegendre, Midpoint };
enum class RatKind { Ls, Cauchy };

struct CauchyPoles {
  CVec poles;  // upper half-plane, on the unit circle
  CVec alpha;  // contour-quadrature coefficients of the simple poles
};

// Quadrature nodes of the resolvent contour integral around the unit circle,
// folded to the p upper-half poles.  Angles are placed on [0, pi] so the pole
// set is symmetric under reflection t -> -t.
inline CauchyPoles cauchy_poles(int p, ContourRule rule) {
  if (p < 1) throw std::invalid_argument("cauchy_poles: need at least one pole");
  Vec theta(p), wtheta(p);
  if (rule == ContourRule::Midpoint) {
    for (int j = 0; j < p; ++j) {
      theta[j] = (2.0 * j + 1.0) * kPi / (2.0 * p);
      wtheta[j] = kPi / p;
    }
  } else {
    Vec x, w;
    detail::gauss_legendre(p, x, w);
    for (int j = 0; j < p; ++j) {
      theta[j] = 0.5 * kPi * (x[j] + 1.0);
      wtheta[j] = 0.5 * kPi * w[j];
    }
  }
  CauchyPoles out;
  out.poles.resize(p);
  out.alpha.resize(p);
  for (int j = 0; j < p; ++j) {
    const std::complex<double> s{std::cos(theta[j]), std::sin(theta[j])};
    out.poles[j] = s;
    // 1/(2 pi i) * integrand i s e^{i theta} / (s - z): the 1/(z - sigma)
    // form flips the sign.
    out.alpha[j] = -wtheta[j] / (2.0 * kPi) * s;
  }
  return out;
}

struct RatWeight {
  double inside = 0.01;  // weight over the slice [-1,1]
  // Truncation half-width of the fitting domain.  The window hugs the slice
  // so that the near-boundary region dominates the outside error: with a wide
  // window the fit spends its freedom on the far tail and repeating a pole no
  // longer steepens the cross-boundary decay (taller peak, sharper drop).
  double beta = 1.5;
};

namespace detail {

// rho_raw(t) = 2 Re sum_j sum_k alpha[j][k-1]/(t-sigma_j)^k  (unscaled)
inline double rat_raw(const CVec& poles, const std::vector<CVec>& alpha, double t) {
  std::complex<double> acc = 0.0;
  for (std::size_t j = 0; j < poles.size(); ++j) {
    const std::complex<double> inv = 1.0 / (t - poles[j]);
    std::complex<double> pw = inv;
    for (const auto& a : alpha[j]) {
      acc += a * pw;
      pw *= inv;
    }
  }
  return 2.0 * acc.real();
}

// Real basis values at t for coefficient layout (j,k) -> columns 2m, 2m+1:
//   column 2m   <- Re(alpha_jk):  2 Re (t-sigma_j)^-k
//   column 2m+1 <- Im(alpha_jk): -2 Im (t-sigma_j)^-k
inline void rat_basis(const CVec& poles, const std::vector<int>& mult, double t, Vec& bs) {
  int m = 0;
  for (std::size_t j = 0; j < poles.size(); ++j) {
    const std::complex<double> inv = 1.0 / (t - poles[j]);
    std::complex<double> pw = inv;
    for (int k = 1; k <= mult[j]; ++k) {
      bs[2 * m] = 2.0 * pw.real();
      bs[2 * m + 1] = -2.0 * pw.imag();
      pw *= inv;
      ++m;
    }
  }
}

// Quadrature sweep over the 3-panel fitting domain [-beta,-1]|[-1,1]|[1,beta].
// Calls f(t, w(t)*quadrature_weight, h(t)) per node.
template <class F>
inline void fit_quadrature(const RatWeight& w, F&& f) {
  Vec gx, gw;
  gauss_legendre(64, gx, gw);
  const double panels[3][2] = {{-w.beta, -1.0}, {-1.0, 1.0}, {1.0, w.beta}};
  for (int pnl = 0; pnl < 3; ++pnl) {
    const double a = panels[pnl][0], b = panels[pnl][1];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const bool inside = pnl == 1;
    const double wt = inside ? w.inside : 1.0;
    for (int q = 0; q < 64; ++q)
      f(mid + half * gx[q], wt * half * gw[q], inside ? 1.0 : 0.0);
  }
}

}  // namespace detail

// Least-squares coefficients for the given (distinct, upper-half) poles with
// multiplicities: minimizes the weighted L2 distance to the step function
// over the mapped slice.
inline std::vector<CVec> ls_coeffs(const CVec& poles, const std::vector<int>& mult,
                                   const RatWeight& weight = {}) {
  if (poles.size() != mult.size()) throw std::invalid_argument("ls_coeffs: size mismatch");
  int total = 0;
  for (std::size_t j = 0; j < poles.size(); ++j) {
    if (!(poles[j].imag() > 0.0))
      throw std::invalid_argument("ls_coeffs: poles must lie in the upper half-plane");
    if (mult[j] < 1) throw std::invalid_argument("ls_coeffs: multiplicities must be >= 1");
    for (std::size_t i = 0; i < j; ++i)
      if (std::abs(poles[i] - poles[j]) < 1e-14)
        throw std::invalid_argument("ls_coeffs: repeated poles belong in multiplicities");
    total += mult[j];
  }
  if (total < 1 || total > 40)
    throw std::invalid_argument("ls_coeffs: total pole multiplicity must be in [1,40]");

  const int nb = 2 * total;
  DenseMat g(nb, nb);
  Vec rhs(nb, 0.0), bs(nb);
  detail::fit_quadrature(weight, [&](double t, double wq, double h) {
    detail::rat_basis(poles, mult, t, bs);
    for (int m = 0; m < nb; ++m) {
      if (h != 0.0) rhs[m] += wq * h * bs[m];
      for (int l = 0; l <= m; ++l) g(m, l) += wq * bs[m] * bs[l];
    }
  });
  for (int m = 0; m < nb; ++m)
    for (int l = m + 1; l < nb; ++l) g(m, l) = g(l, m);

  // Names the pole/power a degenerate pivot column belongs to.
  auto column_blame = [&](int col) {
    int m = col / 2, j = 0;
    while (m >= mult[j]) m -= mult[j++];
    return "pole " + std::to_string(j + 1) + " (sigma = " + std::to_string(poles[j].real()) +
           " + " + std::to_string(poles[j].imag()) + "i, power " + std::to_string(m + 1) + ")";
  };

  // Equilibrate, then LU with partial pivoting on the Gram system.
  Vec d(nb);
  for (int m = 0; m < nb; ++m) {
    if (!(g(m, m) > 0.0))
      throw std::runtime_error("ls_coeffs: rank-deficient basis at " + column_blame(m));
    d[m] = 1.0 / std::sqrt(g(m, m));
  }
  for (int m = 0; m < nb; ++m)
    for (int l = 0; l < nb; ++l) g(m, l) *= d[m] * d[l];
  for (int m = 0; m < nb; ++m) rhs[m] *= d[m];

  std::vector<int> piv(nb);
  for (int k = 0; k < nb; ++k) {
    int pk = k;
    for (int i = k + 1; i < nb; ++i)
      if (std::abs(g(i, k)) > std::abs(g(pk, k))) pk = i;
    if (std::abs(g(pk, k)) < 1e-12)
      throw std::runtime_error("ls_coeffs: rank-deficient Gram matrix at " + column_blame(k));
    if (pk != k)
      for (int l = 0; l < nb; ++l) std::swap(g(k, l), g(pk, l));
    piv[k] = pk;
    for (int i = k + 1; i < nb; ++i) {
      g(i, k) /= g(k, k);
      for (int l = k + 1; l < nb; ++l) g(i, l) -= g(i, k) * g(k, l);
    }
  }
  // rows were swapped wholesale during elimination, so permute the rhs
  // up front and substitute on clean triangles
  for (int k = 0; k < nb; ++k) std::swap(rhs[k], rhs[piv[k]]);
  for (int k = 0; k < nb; ++k)
    for (int i = k + 1; i < nb; ++i) rhs[i] -= g(i, k) * rhs[k];
  for (int k = nb - 1; k >= 0; --k) {
    for (int l = k + 1; l < nb; ++l) rhs[k] -= g(k, l) * rhs[l];
    rhs[k] /= g(k, k);
  }

  std::vector<CVec> alpha(poles.size());
  int m = 0;
  for (std::size_t j = 0; j < poles.size(); ++j) {
    alpha[j].resize(mult[j]);
    for (int k = 0; k < mult[j]; ++k, ++m) alpha[j][k] = {d[2 * m] * rhs[2 * m], d[2 * m + 1] * rhs[2 * m + 1]};
  }
  return alpha;
}

// Weighted L2 distance (squared) between the step function and the filter
// with the given coefficients; the quantity ls_coeffs minimizes.
inline double ls_objective(const CVec& poles, const std::vector<CVec>& alpha,
                           const RatWeight& weight = {}) {
  double obj = 0.0;
  detail::fit_quadrature(weight, [&](double t, double wq, double h) {
    const double e = h - detail::rat_raw(poles, alpha, t);
    obj += wq * e * e;
  });
  return obj;
}

struct RationalFilter {
  int p = 0;                  // upper-half pole count
  CVec poles;                 // mapped coordinates (slice -> [-1,1])
  std::vector<int> mult;      // multiplicities k_j
  std::vector<CVec> alpha;    // alpha[j][k-1], unscaled
  double s = 1.0;             // scale 2*rho_raw(1): endpoint values become 1/2
  SpectralMap map;            // slice transform; pole j sits at c + d*poles[j]
  double bar = 0.5;           // Ritz acceptance bar
  RatKind kind = RatKind::Ls;

  int total_mult() const {
    int t = 0;
    for (int k : mult) t += k;
    return t;
  }
  // Shift of the factorization backing pole j: A - shift * B.
  std::complex<double> shift(int j) const { return map.c + map.d * poles[j]; }
};

// Scaled filter value at a point t in mapped coordinates.
inline double eval_rat(const RationalFilter& f, double t) {
  return detail::rat_raw(f.poles, f.alpha, t) / f.s;
}

struct RatOpts {
  int p = 3;
  int repeats = 1;            // uniform multiplicity
  std::vector<int> mult;      // per-pole override (empty: uniform)
  ContourRule rule = ContourRule::GaussLegendre;
  RatKind kind = RatKind::Ls;
  RatWeight weight = {};
};

inline RationalFilter find_ratf(double xi, double eta, const RatOpts& opts = {}) {
  if (!(eta > xi)) throw std::invalid_argument("find_ratf: degenerate interval");
  RationalFilter f;
  f.map = SpectralMap(SpectralBounds{xi, eta});
  f.kind = opts.kind;
  CauchyPoles cp = cauchy_poles(opts.p, opts.rule);
  f.p = opts.p;
  f.poles = cp.poles;
  f.mult = opts.mult.empty() ? std::vector<int>(opts.p, opts.repeats) : opts.mult;
  if ((int)f.mult.size() != opts.p) throw std::invalid_argument("find_ratf: multiplicity size");
  if (opts.kind == RatKind::Cauchy) {
    for (int k : f.mult)
      if (k != 1)
        throw std::invalid_argument("find_ratf: the Cauchy construction has simple poles only");
    f.alpha.resize(opts.p);
    for (int j = 0; j < opts.p; ++j) f.alpha[j] = {cp.alpha[j]};
  } else {
    f.alpha = ls_coeffs(f.poles, f.mult, opts.weight);
  }
  f.s = 2.0 * detail::rat_raw(f.poles, f.alpha, 1.0);
  if (!(std::abs(f.s) > 1e-14)) throw std::runtime_error("find_ratf: vanishing endpoint value");
  f.bar = 0.5;
  return f;
}

// out = rho(pencil) v via one factorization per pole:
//   out = (2/s) Re sum_j sum_k alpha_jk d^k [(A - shift_j B)^-1 B]^k v .
// pole_solvers[j] must apply (A - shift(j) B)^-1; op_b null means B = I.
// Counters: sum k_j shifted solves, and as many B-products when generalized.
inline void apply_rat(const RationalFilter& f, const std::vector<ComplexOperator>& pole_solvers,
                      const Operator* op_b, const Vec& v, Vec& out, Counters* cnt = nullptr) {
  if ((int)pole_solvers.size() != f.p)
    throw std::invalid_argument("apply_rat: one solver per pole required");
  const int n = (int)v.size();
  CVec acc(n, 0.0), y(n), t(n);
  Vec re(n), im(n), tre(n), tim(n);
  for (int j = 0; j < f.p; ++j) {
    for (int i = 0; i < n; ++i) y[i] = v[i];
    std::complex<double> dk = 1.0;
    for (int k = 1; k <= f.mult[j]; ++k) {
      if (op_b) {
        for (int i = 0; i < n; ++i) {
          re[i] = y[i].real();
          im[i] = y[i].imag();
        }
        op_b->apply(re, tre);
        op_b->apply(im, tim);
        for (int i = 0; i < n; ++i) y[i] = {tre[i], tim[i]};
        if (cnt) ++cnt->n_B_matvec;
      }
      pole_solvers[j].apply(y, t);
      y.swap(t);
      if (cnt) ++cnt->n_shift_solve;
      dk *= f.map.d;
      caxpy(f.alpha[j][k - 1] * dk, y, acc);
    }
  }
  out.resize(n);
  for (int i = 0; i < n; ++i) out[i] = 2.0 * acc[i].real() / f.s;
}

}  // namespace sliceeig
