#pragma once

#include "sliceeig/dense_eig.hpp"
#include "sliceeig/orth.hpp"
#include "sliceeig/rng.hpp"
#include "sliceeig/tridiag_eig.hpp"

// Lanczos building blocks: the plain and B-weighted three-term recurrences
// with full reorthogonalization, and the spectral-interval estimators built
// on them.
//
// The B-weighted recurrence keeps the auxiliary sequence z_j = B w_j next to
// the basis so that inner products against the basis cost plain dot products:
//   z := A w_i - beta_i z_{i-1};  alpha_i = (z, w_i);  z := z - alpha_i z_i;
//   z := z - sum_j (z, w_j) z_j;  w := B^{-1} z;  beta_{i+1} = (w, z)^{1/2}.

namespace sliceeig {

struct SpectralBounds {
  double lmin = 0.0;
  double lmax = 0.0;
};

struct LanczosState {
  DenseMat basis;    // W (columns orthonormal under the run's inner product)
  DenseMat zbasis;   // Z = B W for B-weighted runs; unused otherwise
  TriDiag tri;       // projected tridiagonal matrix
  double next_beta = 0.0;  // trailing beta_{m+1}
  Vec next_w;              // normalized next basis vector (empty on breakdown)
  Vec next_z;
  bool breakdown = false;
  int steps = 0;
};

// Run m steps of (B-weighted) Lanczos from `start`.  On breakdown the state
// is truncated at the step where it occurred and flagged.
inline LanczosState lanczos_run(const Operator& op, const InnerProduct& ip, Vec start, int m) {
  const int n = op.n;
  const bool weighted = !ip.euclidean();
  if (weighted && !ip.b_solve)
    throw std::invalid_argument("lanczos_run: B-weighted run needs ip.b_solve");
  if ((int)start.size() != n) throw std::invalid_argument("lanczos_run: bad start vector size");
  m = std::min(m, n);

  LanczosState st;
  st.basis = DenseMat(n, 0);
  if (weighted) st.zbasis = DenseMat(n, 0);

  // Normalize the start vector in the run's inner product.
  Vec w = std::move(start);
  Vec z;
  if (weighted) {
    ip.b->apply(w, z);
  } else {
    z = w;
  }
  double nb = dot(w, z);
  if (nb <= 0.0) throw std::runtime_error("lanczos_run: B-inner product is not positive");
  nb = std::sqrt(nb);
  scal(1.0 / nb, w);
  scal(1.0 / nb, z);

  double beta = 0.0;
  Vec z_prev;
  for (int i = 0; i < m; ++i) {
    st.basis.push_col(w);
    if (weighted) st.zbasis.push_col(z);

    Vec t;
    op.apply(w, t);
    if (beta != 0.0) axpy(-beta, weighted ? z_prev : st.basis.col_vec(i - 1), t);
    const double alpha = dot(t, w);
    axpy(-alpha, weighted ? z : w, t);
    st.tri.alpha.push_back(alpha);
    ++st.steps;

    // Full reorthogonalization against everything so far.
    if (weighted) {
      paired_cgs2(t, st.basis, st.zbasis, i + 1);
    } else {
      paired_cgs2(t, st.basis, st.basis, i + 1);
    }

    Vec w_next;
    double beta_next;
    if (weighted) {
      ip.b_solve->apply(t, w_next);
      const double s = dot(w_next, t);
      if (s < 0.0)
        throw std::runtime_error("lanczos_run: B-inner product is not positive definite");
      beta_next = std::sqrt(s);
    } else {
      w_next = t;
      beta_next = nrm2(t);
    }

    if (beta_next <= kBreakdownTol) {
      st.breakdown = true;
      st.next_beta = 0.0;
      return st;
    }
    scal(1.0 / beta_next, w_next);
    scal(1.0 / beta_next, t);

    if (i + 1 < m) {
      st.tri.beta.push_back(beta_next);
      z_prev = weighted ? z : Vec();
      w = std::move(w_next);
      z = std::move(t);
      beta = beta_next;
    } else {
      st.next_beta = beta_next;
      st.next_w = std::move(w_next);
      st.next_z = weighted ? std::move(t) : Vec();
    }
  }
  return st;
}

// One-shot interval estimate: Ritz values of a single Lanczos run padded
// outward by the residual bounds beta_{m+1} |y_m| of the extreme pairs.
inline SpectralBounds lan_bounds(const Operator& op, const InnerProduct& ip, int maxit,
                                 unsigned long seed = 1234) {
  Rng rng(seed);
  Vec start = rng.normal_vec(op.n);
  for (int attempt = 0;; ++attempt) {
    LanczosState st = lanczos_run(op, ip, start, maxit);
    // A very early invariant subspace gives poor coverage; retry a few times
    // with a fresh start vector.
    if (st.breakdown && st.steps < std::min(maxit, op.n) / 2 && attempt < 3) {
      start = rng.normal_vec(op.n);
      continue;
    }
    if (st.steps == 0) throw std::runtime_error("lan_bounds: breakdown at step 0");
    auto d = sym_tridiag_eig(st.tri, true);
    const int m = st.steps;
    const double pad_lo = st.next_beta * std::abs(d.vectors(m - 1, 0));
    const double pad_hi = st.next_beta * std::abs(d.vectors(m - 1, m - 1));
    return {d.values.front() - pad_lo, d.values.back() + pad_hi};
  }
}

// Iterated (thick-restart) bounds: keep the two extreme Ritz vectors across
// restarts until both ends stabilize to `tol` relative to the spread, then
// pad outward by the trailing beta.  This is the estimator the solver
// pipelines use, since the polynomial filters need an interval enclosing the
// whole spectrum.
inline SpectralBounds lan_tr_bounds(const Operator& op, const InnerProduct& ip, double tol,
                                    int restart_dim, int max_restarts = 40,
                                    unsigned long seed = 1234) {
  const int n = op.n;
  const bool weighted = !ip.euclidean();
  const int m = std::min(restart_dim, n);
  Rng rng(seed);

  // Kept Ritz pairs: values, basis columns (and B-images when weighted),
  // plus arrowhead couplings to the restart seed.
  Vec kept_theta;
  DenseMat kept_w(n, 0), kept_z(n, 0);
  Vec kept_s;
  Vec seed_w, seed_z;

  double prev_lo = 0.0, prev_hi = 0.0;
  bool have_prev = false;
  double trailing_beta = 0.0;

  for (int cycle = 0; cycle < max_restarts; ++cycle) {
    const int k0 = (int)kept_theta.size();
    DenseMat W(n, 0), Z(n, 0);
    DenseMat H(m, m);

    for (int j = 0; j < k0; ++j) {
      W.push_col(kept_w.col_vec(j));
      if (weighted) Z.push_col(kept_z.col_vec(j));
      H(j, j) = kept_theta[j];
      H(j, k0) = H(k0, j) = kept_s[j];
    }

    Vec w, z;
    if (k0 == 0) {
      w = rng.normal_vec(n);
      if (weighted) {
        ip.b->apply(w, z);
      } else {
        z = w;
      }
      double nb = std::sqrt(dot(w, z));
      scal(1.0 / nb, w);
      scal(1.0 / nb, z);
    } else {
      w = seed_w;
      z = weighted ? seed_z : seed_w;
    }

    int steps = k0;
    bool broke = false;
    for (int i = k0; i < m; ++i) {
      W.push_col(w);
      if (weighted) Z.push_col(z);
      ++steps;

      Vec t;
      op.apply(w, t);
      // Project out all current directions, recording the Rayleigh quotient;
      // the couplings to w_{i-1} (= beta_i) and to the kept Ritz vectors
      // (= the seeded arrowhead entries) are already in H.
      Vec h(i + 1, 0.0);
      paired_cgs2(t, W, weighted ? Z : W, i + 1, h.data());
      H(i, i) += h[i];

      Vec w_next;
      double beta_next;
      if (weighted) {
        ip.b_solve->apply(t, w_next);
        const double s = dot(w_next, t);
        if (s < 0.0) throw std::runtime_error("lan_tr_bounds: B not positive definite");
        beta_next = std::sqrt(s);
      } else {
        w_next = t;
        beta_next = nrm2(t);
      }
      if (beta_next <= kBreakdownTol) {
        broke = true;
        trailing_beta = 0.0;
        break;
      }
      scal(1.0 / beta_next, w_next);
      scal(1.0 / beta_next, t);
      if (i + 1 < m) H(i + 1, i) = H(i, i + 1) = beta_next;
      trailing_beta = beta_next;
      w = std::move(w_next);
      if (weighted) z = std::move(t);
    }

    // Ritz pairs of the projected (arrowhead + tridiagonal) matrix.
    DenseMat Hs(steps, steps);
    for (int i = 0; i < steps; ++i)
      for (int j = 0; j < steps; ++j) Hs(i, j) = H(i, j);
    auto d = dense_sym_eig(DenseSym(Hs), true);
    const double lo = d.values.front();
    const double hi = d.values.back();

    const double spread = std::max(hi - lo, 1e-300);
    const bool settled = have_prev && std::abs(lo - prev_lo) <= tol * spread &&
                         std::abs(hi - prev_hi) <= tol * spread;
    if (settled || broke || cycle == max_restarts - 1 || steps >= n) {
      // Pad outward by the residual bounds of the extreme pairs.
      const double pad_lo = trailing_beta * std::abs(d.vectors(steps - 1, 0));
      const double pad_hi = trailing_beta * std::abs(d.vectors(steps - 1, steps - 1));
      return {lo - pad_lo, hi + pad_hi};
    }
    prev_lo = lo;
    prev_hi = hi;
    have_prev = true;

    // Restart set: the two extreme Ritz pairs.
    kept_theta.clear();
    kept_w = DenseMat(n, 0);
    kept_z = DenseMat(n, 0);
    kept_s.clear();
    Vec y;
    for (int which : {0, steps - 1}) {
      kept_theta.push_back(d.values[which]);
      Vec u(n, 0.0), uz;
      W.mult_cols(steps, d.vectors.col(which), u);
      kept_w.push_col(u);
      if (weighted) {
        Z.mult_cols(steps, d.vectors.col(which), uz);
        kept_z.push_col(uz);
      }
      kept_s.push_back(trailing_beta * d.vectors(steps - 1, which));
    }
    seed_w = w;
    seed_z = z;
  }
  throw std::runtime_error("lan_tr_bounds: failed to settle");
}

}  // namespace sliceeig
