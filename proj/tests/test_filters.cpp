#include <catch2/catch_amalgamated.hpp>

#include "sliceeig/dense_eig.hpp"
#include "sliceeig/filter_poly.hpp"
#include "sliceeig/filter_rat.hpp"
#include "sliceeig/laplacian.hpp"
#include "sliceeig/shifted_ldlt.hpp"
#include "test_util.hpp"

using namespace sliceeig;

namespace {
// Filter built directly from a degree/center pair (tests of the raw series).
PolynomialFilter raw_filter(int k, double gamma, Damping kind) {
  PolynomialFilter f;
  f.k = k;
  f.gamma = gamma;
  f.damping = kind;
  f.mu = detail::normalized_filter_coeffs(k, gamma, kind);
  return f;
}
}  // namespace

TEST_CASE("delta expansion coefficients") {
  Vec mu = chebyshev_coeffs(0.0, 2);
  CHECK(mu[0] == 0.5);
  CHECK(mu[1] == Catch::Approx(0.0).margin(1e-16));
  CHECK(mu[2] == Catch::Approx(-1.0));

  Vec near_one = chebyshev_coeffs(1.0 - 1e-12, 6);
  for (int j = 1; j <= 6; ++j) CHECK(near_one[j] == Catch::Approx(1.0).margin(1e-5));

  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const double g = 2.0 * rng.uniform() - 1.0;
    if (std::abs(g) >= 1.0) continue;
    Vec m = chebyshev_coeffs(g, 9);
    for (int j = 1; j <= 9; ++j) CHECK(std::abs(m[j]) <= 1.0 + 1e-15);
  }

  CHECK_THROWS_AS(chebyshev_coeffs(1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(chebyshev_coeffs(-1.5, 3), std::invalid_argument);
}

TEST_CASE("damping multipliers") {
  for (auto kind : {Damping::None, Damping::LanczosSigma, Damping::Jackson}) {
    Vec s = damping_multipliers(8, kind);
    CHECK(s[0] == 1.0);
    for (double v : s) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0 + 1e-15);
    }
  }
  Vec s1 = damping_multipliers(1, Damping::LanczosSigma);
  CHECK(s1[1] == Catch::Approx(2.0 / kPi).epsilon(1e-14));
  Vec none = damping_multipliers(5, Damping::None);
  for (double v : none) CHECK(v == 1.0);
}

TEST_CASE("filter evaluation: undamped degree-2 closed form") {
  // mu = (1/2, 0, -1) normalized by 3/2: rho(t) = 1 - (4/3) t^2
  PolynomialFilter f = raw_filter(2, 0.0, Damping::None);
  CHECK(eval_pol(f, 0.0) == Catch::Approx(1.0).epsilon(1e-15));
  CHECK(eval_pol(f, 1.0) == Catch::Approx(-1.0 / 3.0).epsilon(1e-14));
  for (double t : {-0.9, -0.3, 0.2, 0.7})
    CHECK(eval_pol(f, t) == Catch::Approx(1.0 - 4.0 / 3.0 * t * t).epsilon(1e-14));
  CHECK_THROWS_AS(eval_pol(f, 1.2), std::invalid_argument);
}

TEST_CASE("filter normalization at the center") {
  Rng rng(8);
  for (int rep = 0; rep < 25; ++rep) {
    const int k = 2 + int(rng.uniform() * 40);
    const double g = 1.6 * rng.uniform() - 0.8;
    for (auto kind : {Damping::None, Damping::LanczosSigma, Damping::Jackson}) {
      PolynomialFilter f = raw_filter(k, g, kind);
      CHECK(eval_pol(f, g) == Catch::Approx(1.0).margin(1e-14));
    }
  }
}

TEST_CASE("balancing the filter center") {
  // symmetric interval -> gamma = 0
  CHECK(balance_center(10, -0.4, 0.4, Damping::LanczosSigma) == Catch::Approx(0.0).margin(1e-12));

  // degree-16 filter for [0.2, 0.4]: endpoint values match after balancing
  const double g = balance_center(16, 0.2, 0.4, Damping::LanczosSigma);
  CHECK(g > 0.2);
  CHECK(g < 0.4);
  PolynomialFilter f = raw_filter(16, g, Damping::LanczosSigma);
  CHECK(std::abs(eval_pol(f, 0.2) - eval_pol(f, 0.4)) <= 1e-10);

  // self-check across degrees and damping kinds
  Rng rng(9);
  for (int rep = 0; rep < 15; ++rep) {
    const double a = -0.9 + 1.0 * rng.uniform();
    const double b = a + 0.05 + 0.5 * rng.uniform();
    const int k = 3 + int(rng.uniform() * 30);
    for (auto kind : {Damping::LanczosSigma, Damping::Jackson}) {
      const double c = balance_center(k, a, b, kind);
      PolynomialFilter fc = raw_filter(k, c, kind);
      CHECK(std::abs(eval_pol(fc, a) - eval_pol(fc, b)) <= 1e-10);
    }
  }
}

TEST_CASE("find_pol: interior slice invariants and minimal degree") {
  SpectralBounds bounds{-1.0, 1.0};
  PolynomialFilter f = find_pol(0.2, 0.4, bounds);
  CHECK(f.k >= 2);
  CHECK_FALSE(f.cap_reached);
  CHECK(eval_pol(f, f.gamma) == Catch::Approx(1.0).margin(1e-14));
  const double ra = eval_pol(f, f.ta), rb = eval_pol(f, f.tb);
  CHECK(std::abs(ra - rb) <= 1e-10);
  CHECK(ra <= 0.8);
  CHECK(rb <= 0.8);
  CHECK(f.bar == Catch::Approx(std::min(ra, rb)));
  CHECK(f.gamma > f.ta);
  CHECK(f.gamma < f.tb);

  // one degree lower cannot satisfy the threshold (minimality)
  PolyOpts capped;
  capped.max_deg = f.k - 1;
  PolynomialFilter g = find_pol(0.2, 0.4, bounds, capped);
  CHECK(g.cap_reached);

  // eigenvalues inside the slice sit above the acceptance bar
  for (int i = 1; i < 60; ++i) {
    const double t = 0.2 + 0.2 * i / 60.0;
    CHECK(eval_pol(f, t) >= f.bar - 1e-12);
  }
}

TEST_CASE("find_pol: wanted eigenvalues map above the threshold") {
  PolynomialFilter f = find_pol(0.0, 0.3, SpectralBounds{-1.0, 1.0});
  double inside_min = 1.0;
  for (int i = 1; i < 100; ++i)
    inside_min = std::min(inside_min, eval_pol(f, 0.3 * i / 100.0));
  CHECK(inside_min >= f.bar - 1e-12);
  CHECK(f.bar > 0.7);
  CHECK(f.bar <= 0.8);
}

TEST_CASE("find_pol: wide slices get single-digit degrees") {
  PolynomialFilter f = find_pol(-0.5, 0.5, SpectralBounds{-1.0, 1.0});
  CHECK(f.k <= 9);

  // halving the width around a fixed center never lowers the degree
  int last = 0;
  for (double w : {0.4, 0.2, 0.1, 0.05, 0.025}) {
    PolynomialFilter g = find_pol(0.1 - w, 0.1 + w, SpectralBounds{-1.0, 1.0});
    CHECK(g.k >= last);
    last = g.k;
  }
}

// Oscillation is measured as the tallest ripple lobe: the largest interior
// local maximum of |rho| outside a 0.1-widened copy of the interval.  The
// main lobe's monotone shoulder is not a ripple and is excluded with it.
namespace {
double ripple_height(const PolynomialFilter& f, double lo, double hi) {
  const int n = 2000;
  std::vector<double> a(n + 1);
  for (int i = 0; i <= n; ++i) a[i] = std::abs(eval_pol(f, -1.0 + 2.0 * i / n));
  double mx = 0.0;
  for (int i = 1; i < n; ++i) {
    const double t = -1.0 + 2.0 * i / n;
    if (t > lo && t < hi) continue;
    if (a[i] >= a[i - 1] && a[i] >= a[i + 1]) mx = std::max(mx, a[i]);
  }
  return mx;
}
}  // namespace

TEST_CASE("find_pol: damping suppresses out-of-band oscillation") {
  const double g = balance_center(16, 0.2, 0.4, Damping::LanczosSigma);
  PolynomialFilter damped = raw_filter(16, g, Damping::LanczosSigma);
  const double gu = balance_center(16, 0.2, 0.4, Damping::None);
  PolynomialFilter undamped = raw_filter(16, gu, Damping::None);
  const double rip_d = ripple_height(damped, 0.1, 0.5);
  const double rip_u = ripple_height(undamped, 0.1, 0.5);
  CHECK(rip_d < rip_u);
  CHECK(rip_d <= 0.05);
}

TEST_CASE("find_pol: boundary slices") {
  SpectralBounds bounds{0.0, 8.0};
  PolynomialFilter f = find_pol(0.0, 0.5, bounds);
  CHECK(f.ta == -1.0);
  CHECK(f.gamma == Catch::Approx(-1.0 + std::min(0.01, 0.1 * (f.tb + 1.0))));
  CHECK(eval_pol(f, f.tb) <= 0.8);
  CHECK(f.bar > 0.0);
  for (int i = 0; i <= 100; ++i) {
    const double t = f.ta + (f.tb - f.ta) * i / 100.0;
    CHECK(eval_pol(f, t) >= f.bar - 1e-12);
  }

  PolynomialFilter r = find_pol(7.5, 8.0, bounds);
  CHECK(r.tb == 1.0);
  CHECK(r.gamma > 0.9);
  CHECK(eval_pol(r, r.ta) <= 0.8);

  CHECK_THROWS_AS(find_pol(0.5, 0.5, bounds), std::invalid_argument);
  CHECK_THROWS_AS(find_pol(9.0, 10.0, bounds), std::invalid_argument);
}

TEST_CASE("apply_pol on a diagonal matrix matches pointwise evaluation") {
  const int n = 120;
  Vec d(n);
  Rng rng(10);
  for (auto& v : d) v = 8.0 * rng.uniform();
  auto a = CsrMatrix::diag(d);
  SpectralBounds bounds{0.0, 8.0};
  PolynomialFilter f = find_pol(3.0, 4.0, bounds);
  Operator op = make_operator(a);
  Vec v(n, 1.0), out;
  Counters cnt;
  apply_pol(f, op, v, out, &cnt);
  CHECK(cnt.n_A_matvec == f.k);
  for (int i = 0; i < n; ++i)
    CHECK(out[i] == Catch::Approx(eval_pol(f, f.map.to_ref(d[i]))).margin(1e-12));
}

TEST_CASE("apply_pol leaves eigenvectors on the filter curve") {
  auto a = gen_laplacian({40});
  SpectralBounds bounds{0.0, 4.0};
  PolynomialFilter f = find_pol(1.0, 1.5, bounds);
  const double pi = kPi;
  const int k = 7;
  const double lam = 4.0 * std::pow(std::sin(k * pi / 82.0), 2);
  Vec v(40);
  for (int i = 0; i < 40; ++i) v[i] = std::sin(k * pi * (i + 1) / 41.0);
  scal(1.0 / nrm2(v), v);
  Operator op = make_operator(a);
  Vec out;
  apply_pol(f, op, v, out);
  const double rho = eval_pol(f, f.map.to_ref(lam));
  for (int i = 0; i < 40; ++i) CHECK(out[i] == Catch::Approx(rho * v[i]).margin(1e-10));
}

TEST_CASE("generalized apply_pol works on the B-image side") {
  const int n = 100;
  Vec da(n), db(n);
  Rng rng(11);
  for (int i = 0; i < n; ++i) {
    db[i] = 0.5 + rng.uniform();
    da[i] = db[i] * 8.0 * rng.uniform();  // pencil eigenvalue in [0,8]
  }
  auto a = CsrMatrix::diag(da);
  Vec dbinv(n);
  for (int i = 0; i < n; ++i) dbinv[i] = 1.0 / db[i];
  auto binv = CsrMatrix::diag(dbinv);
  SpectralBounds bounds{0.0, 8.0};
  PolynomialFilter f = find_pol(2.0, 3.0, bounds);
  Operator op_a = make_operator(a);
  Operator b_solve = make_operator(binv);
  Vec z(n, 1.0), out;
  Counters cnt;
  apply_pol(f, op_a, b_solve, z, out, &cnt);
  CHECK(cnt.n_A_matvec == f.k);
  CHECK(cnt.n_B_solve == f.k);
  // z-side action: Ahat = (A B^-1 - c)/d is diagonal with entries at the
  // pencil eigenvalues
  for (int i = 0; i < n; ++i)
    CHECK(out[i] == Catch::Approx(eval_pol(f, f.map.to_ref(da[i] / db[i]))).margin(1e-11));
}

TEST_CASE("filter separation on an analytic spectrum") {
  Vec eigs = laplacian_analytic_eigs({60});
  SpectralBounds bounds{0.0, 4.0};
  const double xi = 1.0, eta = 1.5;
  PolynomialFilter f = find_pol(xi, eta, bounds);
  const double w = eta - xi;
  for (double lam : eigs) {
    if (lam < xi || lam > eta) continue;
    for (double mu : eigs) {
      if (mu >= xi - w && mu <= eta + w) continue;
      CHECK(eval_pol(f, f.map.to_ref(lam)) > eval_pol(f, f.map.to_ref(mu)));
    }
  }
}

// ---------------------------------------------------------------------------
// rational filters
// ---------------------------------------------------------------------------

TEST_CASE("midpoint contour poles and the closed-form filter") {
  CauchyPoles cp = cauchy_poles(3, ContourRule::Midpoint);
  REQUIRE(cp.poles.size() == 3);
  const double angles[3] = {kPi / 6.0, kPi / 2.0, 5.0 * kPi / 6.0};
  for (int j = 0; j < 3; ++j) {
    CHECK(cp.poles[j].real() == Catch::Approx(std::cos(angles[j])).margin(1e-15));
    CHECK(cp.poles[j].imag() == Catch::Approx(std::sin(angles[j])).margin(1e-15));
    CHECK(std::abs(cp.alpha[j]) == Catch::Approx(1.0 / 6.0).epsilon(1e-14));
  }

  // midpoint rule quadrature telescopes to 1/(1 + t^(2p))
  std::vector<CVec> alpha(3);
  for (int j = 0; j < 3; ++j) alpha[j] = {cp.alpha[j]};
  for (int i = 0; i <= 120; ++i) {
    const double t = -3.0 + 6.0 * i / 120.0;
    CHECK(detail::rat_raw(cp.poles, alpha, t) ==
          Catch::Approx(1.0 / (1.0 + std::pow(t, 6))).margin(1e-13));
  }

  CauchyPoles single = cauchy_poles(1, ContourRule::Midpoint);
  CHECK(std::abs(single.poles[0] - std::complex<double>(0.0, 1.0)) < 1e-15);
}

TEST_CASE("gauss-legendre contour poles") {
  CauchyPoles cp = cauchy_poles(3, ContourRule::GaussLegendre);
  // odd count: the middle angle is pi/2, i.e. the pole +i
  CHECK(std::abs(cp.poles[1] - std::complex<double>(0.0, 1.0)) < 1e-13);
  std::vector<CVec> alpha(3);
  for (int j = 0; j < 3; ++j) alpha[j] = {cp.alpha[j]};
  const double at0 = detail::rat_raw(cp.poles, alpha, 0.0);
  CHECK(at0 > 0.9);
  CHECK(at0 < 1.1);

  // conjugate folding: the 2 Re form equals the explicit sum over all 2p poles
  for (double t : {-1.7, -0.4, 0.3, 2.2}) {
    std::complex<double> full = 0.0;
    for (int j = 0; j < 3; ++j) {
      full += cp.alpha[j] / (t - cp.poles[j]);
      full += std::conj(cp.alpha[j]) / (t - std::conj(cp.poles[j]));
    }
    CHECK(std::abs(full.imag()) <= 1e-15);
    CHECK(full.real() == Catch::Approx(detail::rat_raw(cp.poles, alpha, t)).margin(1e-14));
  }
}

TEST_CASE("single-pole midpoint filter closed form") {
  CauchyPoles cp = cauchy_poles(1, ContourRule::Midpoint);
  // alpha = -i/2: rho_raw(t) = 2 Re(-i/2/(t-i)) = 1/(t^2+1)
  CHECK(std::abs(cp.alpha[0] - std::complex<double>(0.0, -0.5)) < 1e-15);
  std::vector<CVec> alpha{{cp.alpha[0]}};
  CHECK(detail::rat_raw(cp.poles, alpha, 0.0) == Catch::Approx(1.0).epsilon(1e-14));
  for (double t : {-2.0, -0.5, 0.7, 3.0})
    CHECK(detail::rat_raw(cp.poles, alpha, t) ==
          Catch::Approx(1.0 / (t * t + 1.0)).epsilon(1e-13));
}

TEST_CASE("find_ratf: endpoint scaling and decay") {
  for (auto kind : {RatKind::Cauchy, RatKind::Ls}) {
    for (auto rule : {ContourRule::GaussLegendre, ContourRule::Midpoint}) {
      for (int p : {1, 2, 3, 4}) {
        RatOpts opts;
        opts.p = p;
        opts.rule = rule;
        opts.kind = kind;
        RationalFilter f = find_ratf(-1.0, 1.0, opts);
        CHECK(eval_rat(f, 1.0) == Catch::Approx(0.5).margin(1e-10));
        CHECK(eval_rat(f, -1.0) == Catch::Approx(0.5).margin(1e-10));
        CHECK(f.bar == 0.5);
        CHECK(std::abs(eval_rat(f, 50.0)) < 1e-2);
      }
    }
  }
  // repeated poles are an LS feature
  RatOpts bad;
  bad.kind = RatKind::Cauchy;
  bad.repeats = 2;
  CHECK_THROWS_AS(find_ratf(-1.0, 1.0, bad), std::invalid_argument);
}

TEST_CASE("find_ratf maps a general slice") {
  RatOpts opts;
  opts.p = 2;
  RationalFilter f = find_ratf(3.0, 5.0, opts);
  CHECK(f.map.c == Catch::Approx(4.0));
  CHECK(f.map.d == Catch::Approx(1.0));
  CHECK(eval_rat(f, f.map.to_ref(3.0)) == Catch::Approx(0.5).margin(1e-10));
  CHECK(eval_rat(f, f.map.to_ref(5.0)) == Catch::Approx(0.5).margin(1e-10));
  // the factorization shifts sit at c + d*sigma
  for (int j = 0; j < f.p; ++j) {
    CHECK(f.shift(j).real() == Catch::Approx(4.0 + f.poles[j].real()));
    CHECK(f.shift(j).imag() == Catch::Approx(f.poles[j].imag()));
  }
}

TEST_CASE("least-squares coefficients: optimality and amplification") {
  for (auto rule : {ContourRule::GaussLegendre, ContourRule::Midpoint}) {
    CauchyPoles cp = cauchy_poles(3, rule);
    std::vector<int> mult(3, 1);
    std::vector<CVec> cauchy_alpha(3);
    for (int j = 0; j < 3; ++j) cauchy_alpha[j] = {cp.alpha[j]};
    std::vector<CVec> ls_alpha = ls_coeffs(cp.poles, mult);
    CHECK(ls_objective(cp.poles, ls_alpha) <= ls_objective(cp.poles, cauchy_alpha) + 1e-14);

    // the L-S filter amplifies the interior above the step approximations
    RatOpts lso, co;
    lso.rule = co.rule = rule;
    lso.kind = RatKind::Ls;
    co.kind = RatKind::Cauchy;
    RationalFilter fls = find_ratf(-1.0, 1.0, lso);
    RationalFilter fc = find_ratf(-1.0, 1.0, co);
    CHECK(eval_rat(fls, 0.0) > eval_rat(fc, 0.0));
  }
}

TEST_CASE("reflection symmetry of symmetric filters") {
  RatOpts opts;
  RationalFilter f = find_ratf(-1.0, 1.0, opts);
  for (int i = 0; i <= 50; ++i) {
    const double t = 3.0 * i / 50.0;
    CHECK(eval_rat(f, t) == Catch::Approx(eval_rat(f, -t)).margin(1e-8));
  }
}

TEST_CASE("repeating the pole at i steepens the decay") {
  double last = 1e30;
  for (int k : {2, 4, 6}) {
    RatOpts opts;
    opts.p = 1;
    opts.rule = ContourRule::Midpoint;
    opts.kind = RatKind::Ls;
    opts.repeats = k;
    RationalFilter f = find_ratf(-1.0, 1.0, opts);
    const double v = std::abs(eval_rat(f, 1.5));
    CHECK(v < last);
    last = v;
  }
}

TEST_CASE("default single-pole repeated-twice configuration") {
  RatOpts opts;
  opts.p = 1;
  opts.rule = ContourRule::Midpoint;
  opts.repeats = 2;
  RationalFilter f = find_ratf(-1.0, 1.0, opts);
  CHECK(f.total_mult() == 2);
  CHECK(std::abs(f.poles[0] - std::complex<double>(0.0, 1.0)) < 1e-15);
  CHECK(eval_rat(f, 1.0) == Catch::Approx(0.5).margin(1e-10));
  CHECK(eval_rat(f, 0.0) > 1.0);
}

TEST_CASE("cauchy filters approximate the step function") {
  RatOpts opts;
  opts.p = 8;
  opts.kind = RatKind::Cauchy;
  RationalFilter f = find_ratf(-1.0, 1.0, opts);
  double worst = 0.0;
  for (int i = 0; i < 400; ++i) {
    const double t = -4.0 + 8.0 * i / 399.0;
    if (std::abs(std::abs(t) - 1.0) <= 0.1) continue;
    const double h = std::abs(t) < 1.0 ? 1.0 : 0.0;
    worst = std::max(worst, std::abs(eval_rat(f, t) - h));
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("ls_coeffs input validation") {
  CVec poles{{0.0, 1.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(ls_coeffs(poles, {1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(ls_coeffs({{0.5, -0.5}}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(ls_coeffs({{0.0, 1.0}}, {41}), std::invalid_argument);
  CHECK_THROWS_AS(ls_coeffs({{0.0, 1.0}}, {0}), std::invalid_argument);
}

TEST_CASE("apply_rat on a diagonal matrix matches pointwise evaluation") {
  const int n = 90;
  Vec d(n);
  Rng rng(12);
  for (auto& v : d) v = -3.0 + 6.0 * rng.uniform();
  RatOpts opts;
  opts.p = 2;
  RationalFilter f = find_ratf(-1.0, 1.0, opts);
  std::vector<ComplexOperator> solvers;
  for (int j = 0; j < f.p; ++j) {
    const std::complex<double> sh = f.shift(j);
    solvers.push_back(ComplexOperator{n, [d, sh](const CVec& x, CVec& y) {
                                        y.resize(x.size());
                                        for (std::size_t i = 0; i < x.size(); ++i)
                                          y[i] = x[i] / (d[i] - sh);
                                      }});
  }
  Vec v(n), out;
  for (auto& x : v) x = rng.normal();
  Counters cnt;
  apply_rat(f, solvers, nullptr, v, out, &cnt);
  CHECK(cnt.n_shift_solve == f.total_mult());
  CHECK(cnt.n_B_matvec == 0);
  for (int i = 0; i < n; ++i)
    CHECK(out[i] == Catch::Approx(eval_rat(f, d[i]) * v[i]).margin(1e-11));
}

TEST_CASE("apply_rat on a pencil maps eigenvectors onto the filter curve") {
  const int n = 50;
  auto a = CsrMatrix::tridiag_toeplitz(n, -1.0, 2.0);
  auto b = CsrMatrix::tridiag_toeplitz(n, 1.0 / 6.0, 2.0 / 3.0);
  // pencil eigenpair: lambda_k = 6(1-c)/(2+c), c = cos(k pi/(n+1)); the
  // eigenvectors are the sine modes for both A and B
  const int k = 5;
  const double c = std::cos(k * kPi / (n + 1));
  const double lam = 6.0 * (1.0 - c) / (2.0 + c);
  Vec u(n);
  for (int i = 0; i < n; ++i) u[i] = std::sin(k * kPi * (i + 1) / (n + 1));
  scal(1.0 / nrm2(u), u);

  RatOpts opts;
  opts.p = 2;
  opts.repeats = 2;
  RationalFilter f = find_ratf(lam - 0.05, lam + 0.07, opts);
  std::vector<ComplexOperator> solvers;
  std::vector<ShiftedFactor> facs;
  facs.reserve(f.p);
  for (int j = 0; j < f.p; ++j) facs.push_back(factor_shifted(a, b, f.shift(j)));
  for (int j = 0; j < f.p; ++j)
    solvers.push_back(ComplexOperator{n, [&facs, j](const CVec& x, CVec& y) { y = facs[j].solve(x); }});
  Operator op_b = make_operator(b);
  Vec out;
  Counters cnt;
  apply_rat(f, solvers, &op_b, u, out, &cnt);
  CHECK(cnt.n_shift_solve == 4);
  CHECK(cnt.n_B_matvec == 4);
  const double rho = eval_rat(f, f.map.to_ref(lam));
  CHECK(rho > 1.0);  // wanted eigenvalue amplified
  for (int i = 0; i < n; ++i) CHECK(out[i] == Catch::Approx(rho * u[i]).margin(1e-9));
}
