#pragma once
// Exact elimination over Q and over the jet ring.

#include <vector>

#include "dynr/jet.hpp"

namespace dynr {

using RatMatrix = std::vector<std::vector<Rational>>;
using JetMatrix = std::vector<std::vector<JetScalar>>;

/// Rank of a rational matrix (rows of equal length).
inline int rank(RatMatrix m) {
  if (m.empty()) return 0;
  const int rows = static_cast<int>(m.size()), cols = static_cast<int>(m[0].size());
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int p = r;
    while (p < rows && sgn(m[p][c]) == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    for (int i = r + 1; i < rows; ++i) {
      if (sgn(m[i][c]) == 0) continue;
      const Rational t = m[i][c] / m[r][c];
      for (int k = c; k < cols; ++k)
        if (sgn(m[r][k]) != 0) m[i][k] -= t * m[r][k];
    }
    ++r;
  }
  return r;
}

/// Solution of A X = B over jets.
struct JetSolution {
  JetMatrix X;        ///< cols x nrhs
  int rank_at_base;   ///< rank of A at u = 0
  bool consistent;    ///< leftover rows reduce to zero right-hand sides
  int inconsistent_rhs = -1;
};

/// Gauss-Jordan with pivots that are units (nonzero constant term). A full column rank at u = 0
/// makes the solution unique; leftover rows must then have vanishing right-hand side.
inline JetSolution solve_jets(JetMatrix A, JetMatrix B, int order) {
  const int rows = static_cast<int>(A.size());
  const int cols = rows ? static_cast<int>(A[0].size()) : 0;
  const int nrhs = rows ? static_cast<int>(B[0].size()) : 0;
  JetSolution out;
  out.consistent = true;
  std::vector<int> pivotRow(cols, -1);
  int r = 0;
  for (int c = 0; c < cols; ++c) {
    int p = -1;
    size_t best = 0;
    for (int i = r; i < rows; ++i) {
      if (sgn(A[i][c].constant()) == 0) continue;
      size_t nnz = 0;
      for (int k = c; k < cols; ++k) nnz += !A[i][k].is_zero();
      if (p < 0 || nnz < best) {
        p = i;
        best = nnz;
      }
    }
    if (p < 0) continue;
    std::swap(A[p], A[r]);
    std::swap(B[p], B[r]);
    const JetScalar inv = A[r][c].truncated(order).inverse();
    for (int k = c; k < cols; ++k)
      if (!A[r][k].is_zero()) A[r][k] = (A[r][k] * inv).truncated(order);
    for (int k = 0; k < nrhs; ++k)
      if (!B[r][k].is_zero()) B[r][k] = (B[r][k] * inv).truncated(order);
    for (int i = 0; i < rows; ++i) {
      if (i == r || A[i][c].is_zero()) continue;
      const JetScalar t = A[i][c];
      for (int k = c; k < cols; ++k)
        if (!A[r][k].is_zero()) A[i][k] = (A[i][k] - t * A[r][k]).truncated(order);
      for (int k = 0; k < nrhs; ++k)
        if (!B[r][k].is_zero()) B[i][k] = (B[i][k] - t * B[r][k]).truncated(order);
    }
    pivotRow[c] = r;
    ++r;
  }
  out.rank_at_base = r;
  for (int i = r; i < rows && out.consistent; ++i)
    for (int k = 0; k < nrhs; ++k)
      if (!B[i][k].truncated(order).is_zero()) {
        out.consistent = false;
        out.inconsistent_rhs = k;
        break;
      }
  out.X.assign(cols, std::vector<JetScalar>(nrhs));
  for (int c = 0; c < cols; ++c)
    if (pivotRow[c] >= 0) out.X[c] = B[pivotRow[c]];
  return out;
}

}  // namespace dynr
