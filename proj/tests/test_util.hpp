#pragma once

#include <cstdio>
#include <filesystem>
#include <string>

#include "sliceeig/dense_eig.hpp"
#include "sliceeig/rng.hpp"

// Shared helpers for the unit suites.

namespace testutil {

inline sliceeig::DenseSym random_sym(int n, sliceeig::Rng& rng, double scale = 1.0) {
  sliceeig::DenseSym a(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a.set(i, j, scale * rng.normal());
  return a;
}

// Random symmetric positive definite matrix.  The diagonal shift grows with
// sqrt(n) to stay clear of the semicircle radius of the off-diagonal noise.
inline sliceeig::DenseSym random_spd(int n, sliceeig::Rng& rng) {
  sliceeig::DenseSym a = random_sym(n, rng, 0.1);
  const double shift = 1.0 + 0.3 * std::sqrt((double)n);
  for (int i = 0; i < n; ++i) a.set(i, i, a(i, i) + shift + rng.uniform());
  return a;
}

inline sliceeig::CsrMatrix to_csr(const sliceeig::DenseSym& a, double drop_tol = 0.0) {
  std::vector<sliceeig::Triplet> t;
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j)
      if (std::abs(a(i, j)) > drop_tol) t.push_back({i, j, a(i, j)});
  return sliceeig::CsrMatrix::from_triplets(a.n(), std::move(t));
}

inline std::string temp_path(const std::string& stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

}  // namespace testutil
