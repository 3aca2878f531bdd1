#pragma once

#include <optional>
#include <vector>

#include "mirrorforge/novikov.hpp"

namespace mforge {

using Vec = std::vector<NovScalar>;
using Mat = std::vector<std::vector<NovScalar>>;

inline Mat mat_zero(std::size_t r, std::size_t c) { return Mat(r, Vec(c, NovScalar())); }
inline Mat mat_identity(std::size_t n) {
  Mat m = mat_zero(n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = NovScalar(1);
  return m;
}
inline Mat mat_mul(const Mat& a, const Mat& b) {
  std::size_t r = a.size(), k = b.size(), c = b.empty() ? 0 : b[0].size();
  Mat m = mat_zero(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t l = 0; l < k; ++l) {
      if (a[i][l].is_zero()) continue;
      for (std::size_t j = 0; j < c; ++j) m[i][j] += a[i][l] * b[l][j];
    }
  return m;
}

/// In-place reduced row echelon form; returns pivot column indices.
inline std::vector<std::size_t> rref(Mat& m) {
  std::vector<std::size_t> pivots;
  std::size_t rows = m.size(), cols = rows ? m[0].size() : 0, r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = rows;
    for (std::size_t i = r; i < rows; ++i)
      if (!m[i][c].is_zero()) { p = i; break; }
    if (p == rows) continue;
    std::swap(m[r], m[p]);
    NovScalar inv = m[r][c].inverse();
    for (std::size_t j = c; j < cols; ++j) m[r][j] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c].is_zero()) continue;
      NovScalar f = m[i][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t mat_rank(Mat m) { return rref(m).size(); }

/// One solution of A x = b, or nullopt if inconsistent.
inline std::optional<Vec> solve(const Mat& a, const Vec& b) {
  std::size_t rows = a.size(), cols = rows ? a[0].size() : 0;
  Mat aug = a;
  for (std::size_t i = 0; i < rows; ++i) aug[i].push_back(b[i]);
  auto pivots = rref(aug);
  if (!pivots.empty() && pivots.back() == cols) return std::nullopt;  // pivot in b column
  Vec x(cols, NovScalar());
  for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug[r][cols];
  return x;
}

/// Basis of the null space of A.
inline std::vector<Vec> kernel(Mat a) {
  std::size_t cols = a.empty() ? 0 : a[0].size();
  auto pivots = rref(a);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivots) is_pivot[c] = true;
  std::vector<Vec> basis;
  for (std::size_t c = 0; c < cols; ++c) {
    if (is_pivot[c]) continue;
    Vec v(cols, NovScalar());
    v[c] = NovScalar(1);
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][c];
    basis.push_back(std::move(v));
  }
  return basis;
}

}  // namespace mforge
