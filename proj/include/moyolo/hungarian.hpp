// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace moyolo {

/// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct MatchResult {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (prediction, ground truth), sorted by prediction
  std::vector<std::size_t> unmatched_predictions;
  std::vector<std::size_t> unmatched_ground_truths;

  /// Sum of cost over the matched pairs, accumulated in pair order.
  double total_cost(const CostMatrix& cost) const;
};

/// Minimum-cost one-to-one assignment of min(rows, cols) pairs (rows are
/// predictions, columns ground truths). Shortest augmenting path with
/// potentials, O(n^2 m). Ties resolve toward lower row, then lower column
/// indices in scan order, so the result is deterministic. Throws on NaN.
MatchResult hungarian(const CostMatrix& cost);

}  // namespace moyolo
