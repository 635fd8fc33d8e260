// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace moyolo {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("CostMatrix: data size does not match shape");
  }
}

double MatchResult::total_cost(const CostMatrix& cost) const {
  double total = 0.0;
  for (const auto& [r, c] : pairs) total += cost(r, c);
  return total;
}

namespace {

// Assignment for n <= m; returns column index per row.
std::vector<std::size_t> solve_rows_le_cols(const CostMatrix& a) {
  const std::size_t n = a.rows();
  const std::size_t m = a.cols();
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

MatchResult hungarian(const CostMatrix& cost) {
  for (double c : cost.data()) {
    if (std::isnan(c)) throw std::invalid_argument("hungarian: NaN in cost matrix");
    if (!std::isfinite(c)) throw std::invalid_argument("hungarian: non-finite cost");
  }

  const std::size_t n = cost.rows();
  const std::size_t m = cost.cols();
  MatchResult result;
  std::vector<char> row_used(n, 0), col_used(m, 0);

  if (n > 0 && m > 0) {
    if (n <= m) {
      const auto assignment = solve_rows_le_cols(cost);
      for (std::size_t r = 0; r < n; ++r) result.pairs.emplace_back(r, assignment[r]);
    } else {
      CostMatrix transposed(m, n);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c) transposed(c, r) = cost(r, c);
      const auto assignment = solve_rows_le_cols(transposed);
      for (std::size_t c = 0; c < m; ++c) result.pairs.emplace_back(assignment[c], c);
      std::sort(result.pairs.begin(), result.pairs.end());
    }
  }

  for (const auto& [r, c] : result.pairs) {
    row_used[r] = 1;
    col_used[c] = 1;
  }
  for (std::size_t r = 0; r < n; ++r)
    if (!row_used[r]) result.unmatched_predictions.push_back(r);
  for (std::size_t c = 0; c < m; ++c)
    if (!col_used[c]) result.unmatched_ground_truths.push_back(c);
  return result;
}

}  // namespace moyolo
