// Copyright 2026 The PESS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pess {

class LpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// min c.x  s.t.  A x = b,  lower <= x <= upper (upper may be absent).
template <class Scalar>
struct BoundedLp {
  std::vector<std::vector<Scalar>> a;  // rows
  std::vector<Scalar> b;
  std::vector<Scalar> c;
  std::vector<Scalar> lower;
  std::vector<std::optional<Scalar>> upper;
};

template <class Scalar>
struct LpResult {
  std::vector<Scalar> x;
  Scalar objective;
  size_t pivots = 0;
};

// Bounded-variable primal simplex on a dense tableau with Bland's rule.
// `basis` lists one column per row; the point with every other column at its
// lower bound must be feasible. Exact when Scalar is exact.
template <class Scalar>
LpResult<Scalar> solve_bounded_lp(const BoundedLp<Scalar>& lp, std::vector<size_t> basis) {
  const size_t m = lp.a.size();
  const size_t n = lp.c.size();
  if (lp.b.size() != m || lp.lower.size() != n || lp.upper.size() != n || basis.size() != m) {
    throw LpError("lp: dimension mismatch");
  }
  for (const auto& row : lp.a) {
    if (row.size() != n) throw LpError("lp: ragged constraint matrix");
  }
  const Scalar zero(0);

  // t = [A | b], reduced to B^{-1}[A | b] by Gauss-Jordan on the basis columns.
  std::vector<std::vector<Scalar>> t(m, std::vector<Scalar>(n + 1));
  for (size_t i = 0; i < m; ++i) {
    for (size_t j = 0; j < n; ++j) t[i][j] = lp.a[i][j];
    t[i][n] = lp.b[i];
  }
  auto pivot = [&](size_t r, size_t col) {
    Scalar inv = Scalar(1) / t[r][col];
    std::vector<size_t> nz;
    for (size_t j = 0; j <= n; ++j) {
      if (t[r][j] != zero) {
        t[r][j] *= inv;
        nz.push_back(j);
      }
    }
    for (size_t i = 0; i < m; ++i) {
      if (i == r || t[i][col] == zero) continue;
      Scalar f = t[i][col];
      for (size_t j : nz) t[i][j] -= f * t[r][j];
    }
  };
  std::vector<bool> is_basic(n, false);
  for (size_t i = 0; i < m; ++i) {
    size_t col = basis[i];
    if (col >= n || is_basic[col]) throw LpError("lp: bad initial basis");
    size_t r = m;
    for (size_t k = i; k < m; ++k) {
      if (t[k][col] != zero) {
        r = k;
        break;
      }
    }
    if (r == m) throw LpError("lp: singular initial basis");
    std::swap(t[r], t[i]);
    pivot(i, col);
    is_basic[col] = true;
  }

  // Nonbasic columns start at their lower bounds.
  std::vector<Scalar> x(n, zero);
  std::vector<bool> at_upper(n, false);
  for (size_t j = 0; j < n; ++j) {
    if (!is_basic[j]) x[j] = lp.lower[j];
  }
  for (size_t i = 0; i < m; ++i) {
    Scalar v = t[i][n];
    for (size_t j = 0; j < n; ++j) {
      if (!is_basic[j] && t[i][j] != zero) v -= t[i][j] * x[j];
    }
    x[basis[i]] = v;
    const size_t bj = basis[i];
    if (v < lp.lower[bj] || (lp.upper[bj] && v > *lp.upper[bj])) {
      throw LpError("lp: initial basis is infeasible");
    }
  }

  LpResult<Scalar> res;
  for (;;) {
    // Reduced costs d_j = c_j - c_B . column_j.
    size_t enter = n;
    bool increase = true;
    for (size_t j = 0; j < n && enter == n; ++j) {
      if (is_basic[j]) continue;
      Scalar d = lp.c[j];
      for (size_t i = 0; i < m; ++i) {
        if (t[i][j] != zero && lp.c[basis[i]] != zero) d -= lp.c[basis[i]] * t[i][j];
      }
      if (d < zero && !at_upper[j] && (!lp.upper[j] || *lp.upper[j] > lp.lower[j])) {
        enter = j;
        increase = true;
      } else if (d > zero && at_upper[j]) {
        enter = j;
        increase = false;
      }
    }
    if (enter == n) break;

    // Moving x_enter by s*theta moves basic i by -s*theta*t[i][enter].
    const Scalar s = increase ? Scalar(1) : Scalar(-1);
    std::optional<Scalar> best;
    size_t leave_row = m;
    bool leave_to_upper = false;
    if (lp.upper[enter]) best = *lp.upper[enter] - lp.lower[enter];
    for (size_t i = 0; i < m; ++i) {
      if (t[i][enter] == zero) continue;
      Scalar rate = s * t[i][enter];
      const size_t bj = basis[i];
      std::optional<Scalar> limit;
      bool to_upper = false;
      if (rate > zero) {
        limit = (x[bj] - lp.lower[bj]) / rate;
      } else if (lp.upper[bj]) {
        limit = (*lp.upper[bj] - x[bj]) / (-rate);
        to_upper = true;
      }
      if (!limit) continue;
      bool better = !best || *limit < *best ||
                    (*limit == *best && leave_row != m && bj < basis[leave_row]);
      if (better) {
        best = limit;
        leave_row = i;
        leave_to_upper = to_upper;
      }
    }
    if (!best) throw LpError("lp: unbounded");
    const Scalar theta = *best;
    for (size_t i = 0; i < m; ++i) {
      if (t[i][enter] != zero) x[basis[i]] -= s * theta * t[i][enter];
    }
    x[enter] += s * theta;
    if (leave_row == m) {
      at_upper[enter] = increase;
      continue;
    }
    const size_t out = basis[leave_row];
    x[out] = leave_to_upper ? *lp.upper[out] : lp.lower[out];
    at_upper[out] = leave_to_upper;
    is_basic[out] = false;
    is_basic[enter] = true;
    at_upper[enter] = false;
    basis[leave_row] = enter;
    pivot(leave_row, enter);
    ++res.pivots;
  }

  res.objective = zero;
  for (size_t j = 0; j < n; ++j) res.objective += lp.c[j] * x[j];
  res.x = std::move(x);
  return res;
}

}  // namespace pess
