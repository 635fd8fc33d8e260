// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <map>
#include <span>
#include <vector>

#include "moyolo/config.hpp"
#include "moyolo/hungarian.hpp"
#include "moyolo/lifecycle.hpp"
#include "moyolo/model/layers.hpp"

namespace moyolo::model {

/// Ground truth of one frame in network coordinates.
struct FrameTargets {
  torch::Tensor boxes;                   // [G, 4] normalized cxcywh
  std::vector<std::int64_t> identities;  // aligned with boxes
  std::vector<std::int64_t> labels;      // class index per box

  std::size_t size() const { return identities.size(); }
  FrameTargets to(torch::Dtype dtype) const;
};

struct LossBreakdown {
  torch::Tensor cls, l1, giou;  // unweighted sums over decoder layers
  torch::Tensor total;          // weighted sum
  std::int64_t normalizer = 0;  // ground truths in the frame
};

/// Sum over all elements of the sigmoid focal loss.
torch::Tensor sigmoid_focal_loss(const torch::Tensor& logits, const torch::Tensor& targets, double alpha, double gamma);

/// Elementwise GIoU of aligned [M, 4] cxcywh boxes.
torch::Tensor pairwise_giou(const torch::Tensor& a, const torch::Tensor& b);

/// Matching cost between predictions (`logits` [N, C], `boxes` [N, 4]) and
/// the ground truths listed in `gt_indices`:
/// w_cls * focal_cost + w_l1 * |b - g|_1 + w_giou * (1 - giou).
CostMatrix detection_cost(const torch::Tensor& logits, const torch::Tensor& boxes, const FrameTargets& targets,
                          std::span<const std::size_t> gt_indices, const LossConfig& loss);

/// Tracklet-aware assignment. Track queries are bound to the ground truth
/// carrying the identity recorded in `live_ids` (track identity -> gt
/// identity) and stay unmatched when it is absent; the remaining ground
/// truths are Hungarian-matched against detect queries.
MatchResult tala_assign(std::span<const QueryEntry> entries, const torch::Tensor& logits, const torch::Tensor& boxes,
                        const FrameTargets& targets, const std::map<std::int64_t, std::int64_t>& live_ids,
                        const LossConfig& loss);

/// Loss of one frame summed over decoder layers (only the last layer when
/// aux_loss is off). logits [L, N, C], boxes [L, N, 4].
LossBreakdown frame_loss(const torch::Tensor& logits, const torch::Tensor& boxes, const MatchResult& match,
                         const FrameTargets& targets, const LossConfig& loss);

/// total / max(V, 1).
torch::Tensor stage1_loss(const LossBreakdown& frame);

/// Collective average over a clip: sum of totals / max(sum of V, 1).
/// Throws std::invalid_argument when the clip length differs from `expected_length`.
torch::Tensor cal_loss(std::span<const LossBreakdown> frames, int expected_length);

}  // namespace moyolo::model
