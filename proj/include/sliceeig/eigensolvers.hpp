#pragma once

#include <chrono>
#include <limits>
#include <numeric>
#include <utility>

#include "sliceeig/cholesky.hpp"
#include "sliceeig/filter_poly.hpp"
#include "sliceeig/filter_rat.hpp"
#include "sliceeig/lanczos.hpp"
#include "sliceeig/shifted_ldlt.hpp"

// Slice eigensolvers: filtered Lanczos drivers (non-restarted and
// thick-restarted, with polynomial or rational filters) plus filtered
// subspace iteration, for standard and generalized symmetric problems.
//
// All Lanczos drivers share one skeleton: run a (weighted) three-term
// recurrence on the deflated filtered operator with full
// reorthogonalization; every ncycle steps sum the Ritz values above the
// filter's acceptance bar and declare the run stagnant once that sum stops
// moving; then treat every Ritz pair above the bar as a candidate, compute
// its Rayleigh quotient against the original pencil, reject candidates
// outside the slice, and residual-test the rest.
//
// Pencil handling (see the recurrence notes in lanczos.hpp):
//
//   standard      basis orthonormal, operator rho(Ahat) acts on the basis
//                 vectors themselves
//   poly + B      basis B-orthonormal with the auxiliary sequence z = B w;
//                 the filter acts on the z sequence (k A-products and k
//                 B-solves per application) and Ritz vectors are W y
//   rational + B  basis orthonormal in the B^{-1} inner product with the
//                 auxiliary sequence z = B^{-1} w; the filter acts on z
//                 (sum k_j shifted solves plus as many B-products) and the
//                 approximate eigenvectors are Z y.  The start vector is a
//                 random z_1 with unit B-norm, so w_1 = B z_1 needs no solve.
//
// Deflation: locked vectors U (B-orthonormal in the generalized case) are
// projected out of every operator output, (I - U U^T) rho(A) in the standard
// case and the pencil analogue otherwise, so a locked direction can never
// re-enter as a candidate.

namespace sliceeig {

struct SolverConfig {
  int m = 0;              // restart dimension; 0 picks max(4*est_count, 80)
  long max_its = 0;       // Lanczos-step budget; 0 picks 40*est_count + 300
  int ncycle = 30;        // period of the stagnation checks
  double tau1 = 0.0;      // stagnation tolerance; 0 adapts to max(1e-12, 1e-10*|tnew|)
  double res_tol = 1e-8;  // accept when ||A u - lambda B u|| <= res_tol * max(1, |lambda|)
  int est_count = 20;     // eigenvalue-count estimate feeding the defaults
  unsigned long seed = 1234;
};

// One candidate from the projected problem: the filtered operator's Ritz
// value theta, the Rayleigh quotient lambda of the Ritz vector u against the
// original pencil, and the residual norm ||A u - lambda B u||.
struct RitzPair {
  double theta = 0.0;
  double lambda = 0.0;
  Vec u;
  double residual = 0.0;
};

// Locked eigenpairs fed back into a driver so that a later run on the same
// slice skips them.  Columns must be orthonormal (B-orthonormal for a
// generalized run) to 1e-10.
struct DeflationSet {
  DenseMat u;
  Vec values;
  int count() const { return u.cols(); }
};

struct EigenResults {
  Vec eigenvalues;   // ascending within the slice
  DenseMat vectors;  // column i pairs with eigenvalues[i]
  Vec residuals;     // ||A u - lambda B u|| per pair
  long niter = 0;    // Lanczos steps (or subspace-iteration cycles)
  Counters counters;
  bool hit_max_its = false;  // budget ran out with unconverged candidates
};

// Rayleigh quotient and residual of a trial vector against A (or the pencil
// (A, B) when b is non-null): lambda = u'Au / u'Bu and r = ||Au - lambda Bu||.
inline std::pair<double, double> rayleigh_and_residual(const CsrMatrix& a, const CsrMatrix* b,
                                                       const Vec& u) {
  if ((int)u.size() != a.n())
    throw std::invalid_argument("rayleigh_and_residual: vector size mismatch");
  Vec au;
  a.matvec(u, au);
  Vec mu;
  if (b) {
    if (b->n() != a.n()) throw std::invalid_argument("rayleigh_and_residual: pencil size mismatch");
    b->matvec(u, mu);
  } else {
    mu = u;
  }
  const double uu = dot(u, mu);
  if (!(uu > 0.0))
    throw std::invalid_argument("rayleigh_and_residual: zero (or B-degenerate) vector");
  const double lambda = dot(u, au) / uu;
  Vec r = au;
  axpy(-lambda, mu, r);
  return {lambda, nrm2(r)};
}

// Standard-form operator for the pencil (A, B): v -> G^{-1} A G^{-T} v with
// B = G G^T from the Cholesky factorization.  Its eigenvalues equal the
// pencil's; eigenvectors map back through x = G^{-T} y.  The matrix and the
// factorization are captured by reference and must outlive the handle.
inline Operator transform_with_cholesky(const CsrMatrix& a, const SpdFactor& bfac) {
  return Operator{a.n(), [&a, &bfac](const Vec& x, Vec& y) {
                    Vec t = bfac.solve_gt(x);
                    y = bfac.solve_g(a.matvec(t));
                  }};
}

namespace detail {

class ScopedTimer {
 public:
  explicit ScopedTimer(double& acc) : acc_(acc), t0_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    acc_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  double& acc_;
  std::chrono::steady_clock::time_point t0_;
};

// Wall-clock mark for t_total; accumulated explicitly before the results
// object is assembled (a scope guard would fire after the copy out).
inline std::chrono::steady_clock::time_point tick() { return std::chrono::steady_clock::now(); }
inline double tock(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline SolverConfig resolve_config(SolverConfig cfg, const char* who) {
  if (cfg.est_count < 0) throw std::invalid_argument(std::string(who) + ": negative est_count");
  if (cfg.m == 0) cfg.m = std::max(4 * cfg.est_count, 80);
  if (cfg.max_its == 0) cfg.max_its = 40L * cfg.est_count + 300;
  if (cfg.m < 4) throw std::invalid_argument(std::string(who) + ": restart dimension m < 4");
  if (cfg.ncycle < 1) throw std::invalid_argument(std::string(who) + ": ncycle < 1");
  if (!(cfg.res_tol > 0.0)) throw std::invalid_argument(std::string(who) + ": res_tol <= 0");
  if (cfg.max_its < 1) throw std::invalid_argument(std::string(who) + ": max_its < 1");
  return cfg;
}

// Shared state of one slice solve: the pencil, the filtered operator, the
// locked set, the counters, and the acceptance rules.
struct SliceSolve {
  const CsrMatrix* a = nullptr;
  const CsrMatrix* b = nullptr;  // null: standard problem
  bool weighted = false;         // run the B-weighted recurrence
  bool ritz_from_z = false;      // Ritz vectors combine the auxiliary basis
  double bar = 0.0;              // filtered-value acceptance bar
  double xi = 0.0, eta = 0.0;
  SolverConfig cfg;
  Rng rng{1234};
  Counters cnt;

  // Filter application (not deflated; deflect() composes on top).
  std::function<void(const Vec&, Vec&)> filt;
  // Recurrence inner-product pair: the metric M and M^{-1}.  Polynomial
  // pencils run with M = B; rational pencils with M = B^{-1}, so the two
  // operators swap roles there.
  Operator ip_b, ip_bsolve;

  // Locked pairs in problem coordinates with their B-images.  The first
  // `preloaded` columns came from the caller and are not reported again.
  DenseMat lock_u, lock_bu;
  Vec lock_val, lock_res;
  int preloaded = 0;

  int n() const { return a->n(); }
  double bar_eff() const { return bar * (1.0 - 1e-4); }

  double stagnation_tol(double tnew) const {
    return cfg.tau1 > 0.0 ? cfg.tau1 : std::max(1e-12, 1e-10 * std::abs(tnew));
  }

  // Slice membership with a small relative slack so converged pairs sitting
  // on a breakpoint are not dropped by rounding.
  bool in_slice(double lam) const {
    const double slo = 10.0 * cfg.res_tol * std::max(1.0, std::abs(xi));
    const double shi = 10.0 * cfg.res_tol * std::max(1.0, std::abs(eta));
    return lam >= xi - slo && lam <= eta + shi;
  }

  bool converged(double lam, double r) const {
    return r <= cfg.res_tol * std::max(1.0, std::abs(lam));
  }

  // Projector applied to every operator output.  The output lives in basis
  // coordinates for the standard problem, in z = Bx coordinates for the
  // polynomial pencil and in x coordinates for the rational pencil; the
  // matching forms of (I - U U^T B) are
  //   standard  t -= U  (U'  t)
  //   poly+B    t -= BU (U'  t)
  //   rat+B     t -= U  (BU' t)
  void deflect(Vec& t) const {
    const int k = lock_u.cols();
    if (k == 0) return;
    if (!weighted) {
      cgs_pass(t, t, lock_u, lock_u, k, nullptr);
    } else if (!ritz_from_z) {
      cgs_pass(t, t, lock_u, lock_bu, k, nullptr);
    } else {
      cgs_pass(t, t, lock_bu, lock_u, k, nullptr);
    }
  }

  void apply_filtered(const Vec& in, Vec& out) {
    filt(in, out);
    deflect(out);
  }

  // B-orthogonal projection of an x-coordinate vector against the locked set.
  void project_x(Vec& x) const {
    const int k = lock_u.cols();
    if (k == 0) return;
    cgs_pass(x, x, weighted ? lock_bu : lock_u, lock_u, k, nullptr);
  }

  // Fresh start pair (w, z) normalized in the run's inner product with the
  // locked directions projected out.
  void start_pair(Vec& w, Vec& z) {
    for (int attempt = 0; attempt < 16; ++attempt) {
      double nb = 0.0;
      if (!weighted) {
        w = rng.normal_vec(n());
        project_x(w);
        nb = nrm2(w);
        z = w;
      } else if (!ritz_from_z) {
        w = rng.normal_vec(n());
        project_x(w);
        ip_b.apply(w, z);  // self-timed
        ++cnt.n_B_matvec;
        nb = std::sqrt(std::max(0.0, dot(w, z)));
      } else {
        // rational pencil: draw z in x coordinates, then w = B z
        z = rng.normal_vec(n());
        project_x(z);
        ip_bsolve.apply(z, w);  // self-timed
        ++cnt.n_B_matvec;
        nb = std::sqrt(std::max(0.0, dot(z, w)));
      }
      if (nb > kBreakdownTol) {
        scal(1.0 / nb, w);
        if (weighted) scal(1.0 / nb, z);
        if (!weighted) z = w;
        return;
      }
    }
    throw std::runtime_error("eigensolver: could not draw a start vector outside the locked set");
  }

  // One evaluated candidate: basis combinations, Rayleigh quotient, residual.
  struct Cand {
    double theta = 0.0;
    double lambda = 0.0;
    double res = 0.0;
    double ylast = 0.0;  // trailing component of the projected eigenvector
    Vec u, bu;           // normalized Ritz vector and its B-image
    Vec cw, cz;          // raw basis combinations W y and Z y (restart seeds)
    bool inside = false;
    bool good = false;
  };

  Cand eval_candidate(double theta, const DenseMat& w_basis, const DenseMat& z_basis, int steps,
                      const double* y, bool keep_combos) {
    Cand c;
    c.theta = theta;
    c.ylast = y[steps - 1];
    Vec cw(n(), 0.0), cz;
    w_basis.mult_cols(steps, y, cw);
    if (weighted) z_basis.mult_cols(steps, y, cz);
    c.u = ritz_from_z ? cz : cw;
    if (keep_combos) {
      c.cw = std::move(cw);
      c.cz = std::move(cz);
    }

    Vec au;
    {
      ScopedTimer g(cnt.t_mv);
      a->matvec(c.u, au);
    }
    ++cnt.n_A_matvec;
    double uu;
    if (b) {
      {
        ScopedTimer g(cnt.t_mv);
        b->matvec(c.u, c.bu);
      }
      ++cnt.n_B_matvec;
      uu = dot(c.u, c.bu);
    } else {
      uu = dot(c.u, c.u);
    }
    if (!(uu > 0.0)) return c;  // degenerate combination; stays rejected
    c.lambda = dot(c.u, au) / uu;
    Vec r = au;
    axpy(-c.lambda, b ? c.bu : c.u, r);
    // Report a unit (B-)norm vector; the residual scales along.
    const double s = 1.0 / std::sqrt(uu);
    scal(s, c.u);
    if (b) scal(s, c.bu);
    c.res = s * nrm2(r);
    c.inside = in_slice(c.lambda);
    c.good = converged(c.lambda, c.res);
    return c;
  }

  void lock_pair(Cand&& c) {
    lock_u.push_col(c.u);
    if (weighted) lock_bu.push_col(c.bu);
    lock_val.push_back(c.lambda);
    lock_res.push_back(c.res);
  }

  // Everything locked past the preload, sorted ascending.
  EigenResults results(long its, bool warn) {
    const int k = lock_u.cols() - preloaded;
    std::vector<int> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int i, int j) { return lock_val[preloaded + i] < lock_val[preloaded + j]; });
    EigenResults r;
    r.vectors = DenseMat(n(), 0);
    for (int i : idx) {
      r.eigenvalues.push_back(lock_val[preloaded + i]);
      r.residuals.push_back(lock_res[preloaded + i]);
      r.vectors.push_col(lock_u.col_vec(preloaded + i));
    }
    r.niter = its;
    r.counters = cnt;
    r.hit_max_its = warn;
    return r;
  }
};

inline void preload_deflation(SliceSolve& s, const DeflationSet* locked, const char* who) {
  if (!locked || locked->count() == 0) return;
  const DenseMat& u = locked->u;
  if (u.rows() != s.n()) throw std::invalid_argument(std::string(who) + ": deflation size mismatch");
  if ((int)locked->values.size() != u.cols())
    throw std::invalid_argument(std::string(who) + ": deflation values/vectors mismatch");
  // Verify (B-)orthonormality and cache the B-images.
  DenseMat bu(s.n(), 0);
  for (int j = 0; j < u.cols(); ++j) {
    Vec col = u.col_vec(j);
    Vec img;
    if (s.b) {
      s.b->matvec(col, img);
      ++s.cnt.n_B_matvec;
    } else {
      img = col;
    }
    for (int i = 0; i <= j; ++i) {
      const double g = std::inner_product(img.begin(), img.end(), u.col(i), 0.0);
      if (std::abs(g - (i == j ? 1.0 : 0.0)) > 1e-10)
        throw std::invalid_argument(std::string(who) +
                                    ": deflation set is not (B-)orthonormal to 1e-10");
    }
    bu.push_col(img);
  }
  s.lock_u = u;
  if (s.weighted) s.lock_bu = bu;
  s.lock_val = locked->values;
  s.lock_res.assign(u.cols(), 0.0);
  s.preloaded = u.cols();
}

// Non-restarted driver.  The basis grows until the filtered Ritz sum
// stagnates; candidates are then re-evaluated every ncycle steps until all
// in-slice ones pass the residual test (or the budget runs out).  Nothing is
// locked mid-run -- the one growing Krylov space re-derives every candidate
// at each evaluation.
inline EigenResults run_nr(SliceSolve& s) {
  const auto t0 = tick();
  const int n = s.n();
  const long budget = std::min<long>(s.cfg.max_its, n);
  DenseMat W(n, 0), Z(n, 0);
  TriDiag T;

  Vec w, z;
  s.start_pair(w, z);
  double beta = 0.0;
  Vec z_prev;
  double told = std::numeric_limits<double>::quiet_NaN();
  bool stagnant = false;
  long its = 0;

  while (true) {
    W.push_col(w);
    if (s.weighted) Z.push_col(z);
    ++its;
    const int i = (int)its - 1;

    Vec t;
    s.apply_filtered(s.weighted ? z : w, t);
    if (beta != 0.0) axpy(-beta, s.weighted ? z_prev : W.col_vec(i - 1), t);
    const double alpha = dot(t, w);
    axpy(-alpha, s.weighted ? z : w, t);
    T.alpha.push_back(alpha);
    {
      ScopedTimer g(s.cnt.t_orth);
      paired_cgs2(t, W, s.weighted ? Z : W, i + 1);
    }

    Vec w_next;
    double beta_next;
    if (s.weighted) {
      s.ip_bsolve.apply(t, w_next);  // self-timed
      ++(s.ritz_from_z ? s.cnt.n_B_matvec : s.cnt.n_B_solve);
      const double q = dot(w_next, t);
      if (q < 0.0) throw std::runtime_error("eigensolver: B is not positive definite");
      beta_next = std::sqrt(q);
    } else {
      w_next = t;
      beta_next = nrm2(t);
    }
    const bool breakdown = beta_next <= kBreakdownTol;
    if (!breakdown) {
      scal(1.0 / beta_next, w_next);
      scal(1.0 / beta_next, t);
    }
    const bool last = breakdown || its >= budget;

    if (its % s.cfg.ncycle == 0 || last) {
      if (!stagnant && !last) {
        auto d = sym_tridiag_eig(T, false);
        double tnew = 0.0;
        for (double th : d.values)
          if (th >= s.bar) tnew += th;
        if (!std::isnan(told) && std::abs(tnew - told) < s.stagnation_tol(tnew)) stagnant = true;
        told = tnew;
      }
      if (stagnant || last) {
        auto d = sym_tridiag_eig(T, true);
        std::vector<SliceSolve::Cand> accepted;
        bool pending = false;
        for (int j = (int)its - 1; j >= 0; --j) {
          if (d.values[j] < s.bar_eff()) break;  // ascending: done below the bar
          auto c = s.eval_candidate(d.values[j], W, Z, (int)its, d.vectors.col(j), false);
          if (!c.inside) continue;
          if (c.good)
            accepted.push_back(std::move(c));
          else
            pending = true;
        }
        if (!pending || last) {
          for (auto& c : accepted) s.lock_pair(std::move(c));
          s.cnt.t_total += tock(t0);
          return s.results(its, pending);
        }
      }
    }

    T.beta.push_back(beta_next);
    z_prev = s.weighted ? z : Vec();
    beta = beta_next;
    w = std::move(w_next);
    if (s.weighted) z = std::move(t);
  }
}

// Thick-restarted driver with locking.  Each cycle seeds the projected
// matrix with the retained Ritz pairs as an arrowhead (diagonal theta_t,
// border couplings s_t = beta * y_last) plus the saved next basis vector,
// then extends by Lanczos steps to dimension m.  Converged candidates move
// to the locked set and are deflated from then on; unconverged ones form the
// next restart set.  The loop ends after two consecutive candidate-free
// cycles.
inline EigenResults run_tr(SliceSolve& s) {
  const auto t0 = tick();
  const int n = s.n();
  const int m = std::min(s.cfg.m, n);
  const long budget = s.cfg.max_its;
  const int tr_cap = std::max(1, m / 2);

  Vec tr_theta, tr_s;
  DenseMat tr_w(n, 0), tr_z(n, 0);
  Vec seed_w, seed_z;
  long its = 0;
  int empty_cycles = 0;
  bool warn = false;

  while (true) {
    const int l = (int)tr_theta.size();
    DenseMat W(n, 0), Z(n, 0);
    DenseMat H(m, m);
    for (int j = 0; j < l; ++j) {
      W.push_col(tr_w.col_vec(j));
      if (s.weighted) Z.push_col(tr_z.col_vec(j));
      H(j, j) = tr_theta[j];
      H(j, l) = H(l, j) = tr_s[j];
    }

    Vec w, z;
    if (l == 0) {
      s.start_pair(w, z);
    } else {
      w = seed_w;
      z = seed_z;
    }

    int steps = l;
    bool broke = false;
    double trailing = 0.0;
    double told = std::numeric_limits<double>::quiet_NaN();
    for (int i = l; i < m; ++i) {
      W.push_col(w);
      if (s.weighted) Z.push_col(z);
      ++steps;
      ++its;

      Vec t;
      s.apply_filtered(s.weighted ? z : w, t);
      // The couplings to the previous column (beta) and to the restart set
      // (the seeded arrowhead border) are already in H; the projection pass
      // removes those components and only the new diagonal entry is added.
      Vec h(i + 1, 0.0);
      {
        ScopedTimer g(s.cnt.t_orth);
        paired_cgs2(t, W, s.weighted ? Z : W, i + 1, h.data());
      }
      H(i, i) += h[i];

      Vec w_next;
      double beta_next;
      if (s.weighted) {
        s.ip_bsolve.apply(t, w_next);  // self-timed
        ++(s.ritz_from_z ? s.cnt.n_B_matvec : s.cnt.n_B_solve);
        const double q = dot(w_next, t);
        if (q < 0.0) throw std::runtime_error("eigensolver: B is not positive definite");
        beta_next = std::sqrt(q);
      } else {
        w_next = t;
        beta_next = nrm2(t);
      }
      if (beta_next <= kBreakdownTol) {
        broke = true;
        trailing = 0.0;
        break;
      }
      scal(1.0 / beta_next, w_next);
      scal(1.0 / beta_next, t);
      trailing = beta_next;
      if (i + 1 < m) H(i + 1, i) = H(i, i + 1) = beta_next;
      w = std::move(w_next);
      if (s.weighted) z = std::move(t);
      if (its >= budget) break;

      // Early exit of the inner loop once the filtered Ritz sum stagnates.
      if ((i + 1 - l) % s.cfg.ncycle == 0 && i + 1 < m) {
        DenseMat hs(steps, steps);
        for (int r = 0; r < steps; ++r)
          for (int c = 0; c < steps; ++c) hs(r, c) = H(r, c);
        auto d = dense_sym_eig(DenseSym(hs), false);
        double tnew = 0.0;
        for (double th : d.values)
          if (th >= s.bar) tnew += th;
        if (!std::isnan(told) && std::abs(tnew - told) < s.stagnation_tol(tnew)) break;
        told = tnew;
      }
    }

    DenseMat hs(steps, steps);
    for (int r = 0; r < steps; ++r)
      for (int c = 0; c < steps; ++c) hs(r, c) = H(r, c);
    auto d = dense_sym_eig(DenseSym(hs), true);

    std::vector<SliceSolve::Cand> trset;
    int found = 0;
    for (int j = steps - 1; j >= 0; --j) {
      if (d.values[j] < s.bar_eff()) break;
      auto c = s.eval_candidate(d.values[j], W, Z, steps, d.vectors.col(j), true);
      if (!c.inside) continue;
      ++found;
      if (c.good)
        s.lock_pair(std::move(c));
      else
        trset.push_back(std::move(c));
    }

    if (found == 0) {
      if (++empty_cycles >= 2) break;
    } else {
      empty_cycles = 0;
    }
    if (its >= budget) {
      warn = !trset.empty();
      break;
    }

    // Restart set: the unconverged in-slice candidates, largest filtered
    // value first, capped at m/2 (overflow re-emerges next cycle).
    std::sort(trset.begin(), trset.end(),
              [](const SliceSolve::Cand& x, const SliceSolve::Cand& y) { return x.theta > y.theta; });
    if ((int)trset.size() > tr_cap) trset.resize(tr_cap);

    tr_theta.clear();
    tr_s.clear();
    tr_w = DenseMat(n, 0);
    tr_z = DenseMat(n, 0);
    if (!broke) {
      for (auto& c : trset) {
        tr_theta.push_back(c.theta);
        tr_s.push_back(trailing * c.ylast);
        tr_w.push_col(c.cw);
        if (s.weighted) tr_z.push_col(c.cz);
      }
      seed_w = w;
      seed_z = z;
    }
    // On breakdown the cycle found an invariant subspace; restart fresh
    // (deflated) rather than reseeding around a vanished residual vector.
  }
  s.cnt.t_total += tock(t0);
  return s.results(its, warn);
}

// Wiring shared by the four Lanczos drivers.  The filter application is
// installed by the caller before the engine runs; everything else (pencil
// mode, counters, deflation preload) is set here.
struct DriverPlumbing {
  SliceSolve s;
  SpdFactor bfac;
  std::vector<ShiftedFactor> shift_factors;
  std::vector<ComplexOperator> pole_solvers;
  Operator op_a_timed, op_bsolve_timed, op_b_timed;

  void setup(const CsrMatrix& a, const CsrMatrix* b, bool rational, double bar, double xi,
             double eta, const SolverConfig& cfg, const DeflationSet* locked, const char* who) {
    if (!(eta > xi)) throw std::invalid_argument(std::string(who) + ": degenerate interval");
    if (b && b->n() != a.n()) throw std::invalid_argument(std::string(who) + ": pencil size mismatch");
    s.a = &a;
    s.b = b;
    s.weighted = (b != nullptr);
    s.ritz_from_z = rational && b != nullptr;
    s.bar = bar;
    s.xi = xi;
    s.eta = eta;
    s.cfg = resolve_config(cfg, who);
    s.rng = Rng(s.cfg.seed);

    op_a_timed = Operator{a.n(), [this](const Vec& x, Vec& y) {
                            ScopedTimer g(s.cnt.t_mv);
                            s.a->matvec(x, y);
                          }};
    if (b) {
      op_b_timed = Operator{a.n(), [this](const Vec& x, Vec& y) {
                              ScopedTimer g(s.cnt.t_mv);
                              s.b->matvec(x, y);
                            }};
      if (!rational) {
        // metric M = B: Cholesky-backed solves drive the recurrence
        bfac = SpdFactor::factor(*b);
        op_bsolve_timed = Operator{a.n(), [this](const Vec& x, Vec& y) {
                                     ScopedTimer g(s.cnt.t_sv);
                                     y = bfac.solve(x);
                                   }};
        s.ip_b = op_b_timed;
        s.ip_bsolve = op_bsolve_timed;
      } else {
        // metric M = B^{-1}: the recurrence's "solve" is a plain B-product
        // and M itself is never applied (the start pair sidesteps it), so
        // no factorization of B is needed on this path.
        s.ip_b = Operator{a.n(), [](const Vec&, Vec&) {
                            throw std::logic_error(
                                "rational pencil recurrence must not apply B^{-1} directly");
                          }};
        s.ip_bsolve = op_b_timed;
      }
    }
    preload_deflation(s, locked, who);
  }

  void make_pole_solvers(const RationalFilter& f, const CsrMatrix& a, const CsrMatrix* b) {
    shift_factors.reserve(f.p);
    for (int j = 0; j < f.p; ++j)
      shift_factors.push_back(
          factor_shifted(a, b ? *b : CsrMatrix::identity(a.n()), f.shift(j)));
    for (int j = 0; j < f.p; ++j)
      pole_solvers.push_back(ComplexOperator{a.n(), [this, j](const CVec& x, CVec& y) {
                                               ScopedTimer g(s.cnt.t_sv);
                                               y = shift_factors[j].solve(x);
                                             }});
  }
};

}  // namespace detail

// Polynomial filtered Lanczos without restarts.  b == nullptr solves the
// standard problem; otherwise the generalized pencil (A, B).
inline EigenResults cheb_lan_nr(const CsrMatrix& a, const CsrMatrix* b, const PolynomialFilter& f,
                                double xi, double eta, const SolverConfig& cfg = {},
                                const DeflationSet* locked = nullptr) {
  detail::DriverPlumbing p;
  p.setup(a, b, false, f.bar, xi, eta, cfg, locked, "cheb_lan_nr");
  if (!b) {
    p.s.filt = [&p, &f](const Vec& v, Vec& out) { apply_pol(f, p.op_a_timed, v, out, &p.s.cnt); };
  } else {
    p.s.filt = [&p, &f](const Vec& v, Vec& out) {
      apply_pol(f, p.op_a_timed, p.op_bsolve_timed, v, out, &p.s.cnt);
    };
  }
  return detail::run_nr(p.s);
}

// Polynomial filtered thick-restart Lanczos with locking.
inline EigenResults cheb_lan_tr(const CsrMatrix& a, const CsrMatrix* b, const PolynomialFilter& f,
                                double xi, double eta, const SolverConfig& cfg = {},
                                const DeflationSet* locked = nullptr) {
  detail::DriverPlumbing p;
  p.setup(a, b, false, f.bar, xi, eta, cfg, locked, "cheb_lan_tr");
  if (!b) {
    p.s.filt = [&p, &f](const Vec& v, Vec& out) { apply_pol(f, p.op_a_timed, v, out, &p.s.cnt); };
  } else {
    p.s.filt = [&p, &f](const Vec& v, Vec& out) {
      apply_pol(f, p.op_a_timed, p.op_bsolve_timed, v, out, &p.s.cnt);
    };
  }
  return detail::run_tr(p.s);
}

// Rational filtered Lanczos without restarts (one shifted factorization per
// pole, built here).
inline EigenResults rat_lan_nr(const CsrMatrix& a, const CsrMatrix* b, const RationalFilter& f,
                               double xi, double eta, const SolverConfig& cfg = {},
                               const DeflationSet* locked = nullptr) {
  detail::DriverPlumbing p;
  p.setup(a, b, true, f.bar, xi, eta, cfg, locked, "rat_lan_nr");
  p.make_pole_solvers(f, a, b);
  p.s.filt = [&p, &f, b](const Vec& v, Vec& out) {
    apply_rat(f, p.pole_solvers, b ? &p.op_b_timed : nullptr, v, out, &p.s.cnt);
  };
  return detail::run_nr(p.s);
}

// Rational filtered thick-restart Lanczos with locking.
inline EigenResults rat_lan_tr(const CsrMatrix& a, const CsrMatrix* b, const RationalFilter& f,
                               double xi, double eta, const SolverConfig& cfg = {},
                               const DeflationSet* locked = nullptr) {
  detail::DriverPlumbing p;
  p.setup(a, b, true, f.bar, xi, eta, cfg, locked, "rat_lan_tr");
  p.make_pole_solvers(f, a, b);
  p.s.filt = [&p, &f, b](const Vec& v, Vec& out) {
    apply_rat(f, p.pole_solvers, b ? &p.op_b_timed : nullptr, v, out, &p.s.cnt);
  };
  return detail::run_tr(p.s);
}

// Filtered subspace iteration on a block of ceil(1.3*est_count) + 8 vectors.
// The generalized problem runs through the Cholesky standard form and maps
// the vectors back at the end.  est_count must be an upper estimate of the
// slice count (feed dos_count output); if every block vector ends up above
// the filter bar the block was too small and the run aborts.
inline EigenResults cheb_si(const CsrMatrix& a, const CsrMatrix* b, const PolynomialFilter& f,
                            double xi, double eta, int est_count, const SolverConfig& cfg = {}) {
  if (!(eta > xi)) throw std::invalid_argument("cheb_si: degenerate interval");
  if (est_count < 0) throw std::invalid_argument("cheb_si: negative est_count");
  if (b && b->n() != a.n()) throw std::invalid_argument("cheb_si: pencil size mismatch");
  SolverConfig rcfg = cfg;
  rcfg.est_count = std::max(cfg.est_count, est_count);
  rcfg = detail::resolve_config(rcfg, "cheb_si");

  const int n = a.n();
  const int q = std::min(n, (int)std::ceil(1.3 * est_count) + 8);
  const double bar_eff = f.bar * (1.0 - 1e-4);

  EigenResults out;
  Counters& cnt = out.counters;
  const auto t0 = detail::tick();
  Rng rng(rcfg.seed);

  SpdFactor bfac;
  if (b) bfac = SpdFactor::factor(*b);
  // The iteration operator: A itself, or the pencil's standard form.  Each
  // application of the transformed operator is one A-product plus one
  // B-solve (the pair of triangular solves); apply_pol books the A side.
  Operator base{n, [&](const Vec& x, Vec& y) {
                  if (!b) {
                    detail::ScopedTimer g(cnt.t_mv);
                    a.matvec(x, y);
                  } else {
                    Vec t;
                    {
                      detail::ScopedTimer g(cnt.t_sv);
                      t = bfac.solve_gt(x);
                    }
                    Vec at;
                    {
                      detail::ScopedTimer g(cnt.t_mv);
                      a.matvec(t, at);
                    }
                    {
                      detail::ScopedTimer g(cnt.t_sv);
                      y = bfac.solve_g(at);
                    }
                    ++cnt.n_B_solve;
                  }
                }};

  // Random orthonormal start block.
  const InnerProduct euclid;
  DenseMat Y(n, 0);
  while (Y.cols() < q) {
    Vec v = rng.normal_vec(n);
    if (cgs2_orthogonalize(v, Y, Y.cols(), euclid) > 0.0) Y.push_col(v);
  }

  const double slo = 10.0 * rcfg.res_tol * std::max(1.0, std::abs(xi));
  const double shi = 10.0 * rcfg.res_tol * std::max(1.0, std::abs(eta));
  int saturated_cycles = 0;
  int idle_cycles = 0;
  long cycle = 0;

  while (true) {
    ++cycle;
    // Filter sweep and re-orthonormalization.
    DenseMat Yf(n, 0);
    for (int j = 0; j < q; ++j) {
      Vec t;
      apply_pol(f, base, Y.col_vec(j), t, &cnt);
      double nb;
      {
        detail::ScopedTimer g(cnt.t_orth);
        nb = cgs2_orthogonalize(t, Yf, Yf.cols(), euclid);
      }
      while (nb == 0.0) {  // column collapsed; refill with a fresh direction
        t = rng.normal_vec(n);
        detail::ScopedTimer g(cnt.t_orth);
        nb = cgs2_orthogonalize(t, Yf, Yf.cols(), euclid);
      }
      Yf.push_col(t);
    }

    // Rayleigh-Ritz against the iteration operator.
    DenseMat AY(n, 0);
    for (int j = 0; j < q; ++j) {
      Vec t;
      base.apply(Yf.col_vec(j), t);
      ++cnt.n_A_matvec;
      AY.push_col(t);
    }
    DenseMat gram(q, q);
    for (int i = 0; i < q; ++i)
      for (int j = i; j < q; ++j) {
        const double g =
            std::inner_product(AY.col(j), AY.col(j) + n, Yf.col(i), 0.0);
        gram(i, j) = gram(j, i) = g;
      }
    auto d = dense_sym_eig(DenseSym(gram), true);
    Y = DenseMat(n, 0);
    for (int j = 0; j < q; ++j) {
      Vec t(n, 0.0);
      Yf.mult_cols(q, d.vectors.col(j), t);
      Y.push_col(t);
    }

    // Candidate pass: slice members by Rayleigh quotient, convergence by the
    // residual of the original pencil.
    std::vector<RitzPair> inside;
    bool all_good = true;
    for (int j = 0; j < q; ++j) {
      const double lam = d.values[j];
      if (lam < xi - slo || lam > eta + shi) continue;
      RitzPair pr;
      pr.theta = eval_pol(f, std::clamp(f.map.to_ref(lam), -1.0, 1.0));
      pr.u = Y.col_vec(j);
      if (b) {
        detail::ScopedTimer g(cnt.t_sv);
        pr.u = bfac.solve_gt(pr.u);
        ++cnt.n_B_solve;
      }
      Vec au;
      {
        detail::ScopedTimer g(cnt.t_mv);
        a.matvec(pr.u, au);
      }
      ++cnt.n_A_matvec;
      Vec mu;
      if (b) {
        detail::ScopedTimer g(cnt.t_mv);
        b->matvec(pr.u, mu);
        ++cnt.n_B_matvec;
      } else {
        mu = pr.u;
      }
      const double uu = dot(pr.u, mu);
      if (!(uu > 0.0)) continue;
      pr.lambda = dot(pr.u, au) / uu;
      Vec r = au;
      axpy(-pr.lambda, mu, r);
      const double sc = 1.0 / std::sqrt(uu);
      scal(sc, pr.u);
      pr.residual = sc * nrm2(r);
      if (pr.residual > rcfg.res_tol * std::max(1.0, std::abs(pr.lambda))) all_good = false;
      inside.push_back(std::move(pr));
    }

    // A block whose every Ritz value maps above the filter bar cannot have
    // bracketed the slice: the estimate fed to the block size was too small.
    int above_bar = 0;
    for (int j = 0; j < q; ++j) {
      const double th = eval_pol(f, std::clamp(f.map.to_ref(d.values[j]), -1.0, 1.0));
      if (th >= bar_eff) ++above_bar;
    }
    saturated_cycles = (above_bar == q) ? saturated_cycles + 1 : 0;
    if (saturated_cycles >= 3)
      throw std::runtime_error(
          "cheb_si: subspace saturated above the filter bar; raise est_count");

    idle_cycles = inside.empty() ? idle_cycles + 1 : 0;
    const bool done = (!inside.empty() && all_good) || idle_cycles >= 6;
    const bool out_of_budget = cycle >= rcfg.max_its;
    if (done || out_of_budget) {
      std::sort(inside.begin(), inside.end(),
                [](const RitzPair& x, const RitzPair& y) { return x.lambda < y.lambda; });
      out.vectors = DenseMat(n, 0);
      for (auto& pr : inside) {
        out.eigenvalues.push_back(pr.lambda);
        out.residuals.push_back(pr.residual);
        out.vectors.push_col(pr.u);
      }
      out.niter = cycle;
      out.hit_max_its = out_of_budget && !done;
      cnt.t_total += detail::tock(t0);
      return out;
    }
  }
}

}  // namespace sliceeig
