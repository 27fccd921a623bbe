#pragma once

#include "sliceeig/dos.hpp"

// Spectrum slicing: split [xi, eta] into ns subintervals carrying roughly
// equal shares of the density curve's mass, so each slice holds a similar
// number of eigenvalues.  Interior breakpoints snap to the curve's grid.

namespace sliceeig {

struct SliceSet {
  Vec breakpoints;  // t0 = xi < t1 < ... < t_ns = eta
  Vec est_counts;   // estimated eigenvalue count per slice

  int ns() const { return (int)breakpoints.size() - 1; }
};

inline SliceSet slice_spectrum(const DosCurve& curve, double xi, double eta, int ns) {
  if (ns < 1) throw std::invalid_argument("slice_spectrum: need at least one slice");
  if (!(xi < eta)) throw std::invalid_argument("slice_spectrum: empty target interval");
  const Vec& x = curve.xdos;
  if (x.size() < 2) throw std::invalid_argument("slice_spectrum: curve has no grid");
  const double slack = 1e-12 * (x.back() - x.front());
  if (xi < x.front() - slack || eta > x.back() + slack)
    throw std::invalid_argument("slice_spectrum: interval outside the curve range");

  int interior = 0;
  for (double t : x)
    if (t > xi && t < eta) ++interior;
  if (ns > interior + 1)
    throw std::invalid_argument("slice_spectrum: more slices than interior grid points");

  // Prefix masses at the grid points; breakpoint search walks them once.
  Vec cum(x.size(), 0.0);
  for (std::size_t j = 1; j < x.size(); ++j)
    cum[j] = cum[j - 1] + 0.5 * (curve.ydos[j] + curve.ydos[j - 1]) * (x[j] - x[j - 1]);
  const double base = detail::dos_cumulative(curve, xi);
  const double total = detail::dos_cumulative(curve, eta) - base;

  SliceSet s;
  s.breakpoints.reserve(ns + 1);
  s.breakpoints.push_back(xi);
  std::size_t j = 0;  // first grid index past the previous breakpoint
  for (int i = 1; i < ns; ++i) {
    const double target = total * i / ns;
    while (j < x.size() && (x[j] <= s.breakpoints.back() || x[j] <= xi)) ++j;
    // First interior grid point whose cumulative share reaches the target;
    // if none does before eta, fall back to the earliest free point so the
    // breakpoints stay strictly increasing.
    std::size_t cand = j;
    while (cand < x.size() && x[cand] < eta && cum[cand] - base < target) ++cand;
    if (cand >= x.size() || x[cand] >= eta) cand = j;
    if (cand >= x.size() || x[cand] >= eta)
      throw std::runtime_error("slice_spectrum: curve grid too coarse");
    s.breakpoints.push_back(x[cand]);
    j = cand + 1;
  }
  s.breakpoints.push_back(eta);

  s.est_counts.resize(ns);
  for (int i = 0; i < ns; ++i)
    s.est_counts[i] = dos_count(curve, s.breakpoints[i], s.breakpoints[i + 1]);
  return s;
}

}  // namespace sliceeig
