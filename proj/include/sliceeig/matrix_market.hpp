#pragma once

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sliceeig/csr.hpp"

// MatrixMarket coordinate I/O, restricted to the square real case used
// throughout: "%%MatrixMarket matrix coordinate real {symmetric|general}".
// Indices are 1-based on disk.  Symmetric files store one triangle and are
// expanded on read; the writer always emits the lower triangle of a
// symmetric matrix.

namespace sliceeig {

namespace detail {
inline std::string lower(std::string s) {
  for (auto& c : s) c = (char)std::tolower((unsigned char)c);
  return s;
}
}  // namespace detail

inline CsrMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);

  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  ++lineno;

  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || detail::lower(object) != "matrix" ||
      detail::lower(format) != "coordinate")
    throw std::runtime_error(path + ":1: not a MatrixMarket coordinate file");
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (field != "real" && field != "integer")
    throw std::runtime_error(path + ":1: unsupported field type '" + field + "'");
  if (symmetry != "symmetric" && symmetry != "general")
    throw std::runtime_error(path + ":1: unsupported symmetry '" + symmetry + "'");
  const bool symmetric = symmetry == "symmetric";

  // Skip comments, then the size line.
  int rows = 0, cols = 0;
  long nnz = 0;
  for (;;) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing size line");
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream sz(line);
    if (!(sz >> rows >> cols >> nnz))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad size line");
    break;
  }
  if (rows != cols)
    throw std::runtime_error(path + ": matrix is not square (" + std::to_string(rows) + "x" +
                             std::to_string(cols) + ")");

  std::vector<Triplet> t;
  t.reserve(symmetric ? 2 * nnz : nnz);
  for (long e = 0; e < nnz; ++e) {
    int i = 0, j = 0;
    double v = 0.0;
    if (!std::getline(in, line))
      throw std::runtime_error(path + ": unexpected end of file after " + std::to_string(e) +
                               " entries");
    ++lineno;
    std::istringstream es(line);
    if (!(es >> i >> j >> v))
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad entry");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": index out of range");
    t.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
  }
  return CsrMatrix::from_triplets(rows, std::move(t));
}

inline void write_matrix_market(const CsrMatrix& a, const std::string& path) {
  if (!a.is_symmetric())
    throw std::runtime_error("write_matrix_market: matrix is not symmetric");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);

  long nnz_lower = 0;
  const auto trip = a.to_triplets();
  for (const auto& e : trip)
    if (e.row >= e.col) ++nnz_lower;

  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.n() << " " << a.n() << " " << nnz_lower << "\n";
  out.precision(17);
  for (const auto& e : trip)
    if (e.row >= e.col) out << e.row + 1 << " " << e.col + 1 << " " << e.val << "\n";
  if (!out) throw std::runtime_error("write failure on " + path);
}

}  // namespace sliceeig
