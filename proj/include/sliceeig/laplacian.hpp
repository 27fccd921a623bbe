#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include "sliceeig/csr.hpp"

// Finite-difference negative Laplacians on regular grids with homogeneous
// Dirichlet boundaries.  These are the standard test problems: their full
// spectrum is known in closed form, which gives every higher-level routine an
// exact reference to count and compare against.

namespace sliceeig {

// 3-, 5- or 7-point stencil on an nx (x ny (x nz)) grid; diagonal equals
// 2 * (number of dimensions), off-diagonal entries are -1.
inline CsrMatrix gen_laplacian(const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 3)
    throw std::invalid_argument("gen_laplacian: need 1 to 3 grid dimensions");
  for (int d : dims)
    if (d < 1) throw std::invalid_argument("gen_laplacian: grid dimensions must be positive");

  const int nx = dims[0];
  const int ny = dims.size() > 1 ? dims[1] : 1;
  const int nz = dims.size() > 2 ? dims[2] : 1;
  const long n = (long)nx * ny * nz;
  if (n > 40'000'000) throw std::invalid_argument("gen_laplacian: grid too large");

  const double dd = 2.0 * (double)dims.size();
  std::vector<Triplet> t;
  t.reserve((std::size_t)n * (1 + 2 * dims.size()));
  auto idx = [&](int i, int j, int k) { return (k * ny + j) * nx + i; };
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int row = idx(i, j, k);
        t.push_back({row, row, dd});
        if (i > 0) t.push_back({row, idx(i - 1, j, k), -1.0});
        if (i < nx - 1) t.push_back({row, idx(i + 1, j, k), -1.0});
        if (ny > 1 && j > 0) t.push_back({row, idx(i, j - 1, k), -1.0});
        if (ny > 1 && j < ny - 1) t.push_back({row, idx(i, j + 1, k), -1.0});
        if (nz > 1 && k > 0) t.push_back({row, idx(i, j, k - 1), -1.0});
        if (nz > 1 && k < nz - 1) t.push_back({row, idx(i, j, k + 1), -1.0});
      }
  return CsrMatrix::from_triplets((int)n, std::move(t));
}

// Full sorted spectrum: sums of 4*sin^2(i*pi/(2*(nd+1))) over the dimensions.
inline Vec laplacian_analytic_eigs(const std::vector<int>& dims) {
  if (dims.empty() || dims.size() > 3)
    throw std::invalid_argument("laplacian_analytic_eigs: need 1 to 3 grid dimensions");
  long n = 1;
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("laplacian_analytic_eigs: dimensions must be positive");
    n *= d;
  }
  if (n > 10'000'000)
    throw std::invalid_argument("laplacian_analytic_eigs: enumeration too large");

  const double pi = 3.14159265358979323846;
  std::array<Vec, 3> one_d;
  for (std::size_t d = 0; d < dims.size(); ++d) {
    one_d[d].resize(dims[d]);
    for (int i = 1; i <= dims[d]; ++i) {
      const double s = std::sin(0.5 * pi * i / (dims[d] + 1));
      one_d[d][i - 1] = 4.0 * s * s;
    }
  }
  Vec eig;
  eig.reserve(n);
  const int nx = dims[0];
  const int ny = dims.size() > 1 ? dims[1] : 1;
  const int nz = dims.size() > 2 ? dims[2] : 1;
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        double v = one_d[0][i];
        if (dims.size() > 1) v += one_d[1][j];
        if (dims.size() > 2) v += one_d[2][k];
        eig.push_back(v);
      }
  std::sort(eig.begin(), eig.end());
  return eig;
}

// Count of sorted values falling in the closed interval [lo, hi].
inline long count_in_interval(const Vec& sorted_vals, double lo, double hi) {
  auto a = std::lower_bound(sorted_vals.begin(), sorted_vals.end(), lo);
  auto b = std::upper_bound(sorted_vals.begin(), sorted_vals.end(), hi);
  return (long)(b - a);
}

}  // namespace sliceeig
