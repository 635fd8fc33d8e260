// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/criterion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "moyolo/box.hpp"

namespace moyolo::model {

FrameTargets FrameTargets::to(torch::Dtype dtype) const {
  FrameTargets t = *this;
  t.boxes = boxes.to(dtype);
  return t;
}

torch::Tensor sigmoid_focal_loss(const torch::Tensor& logits, const torch::Tensor& targets, double alpha, double gamma) {
  auto p = torch::sigmoid(logits);
  auto ce = torch::binary_cross_entropy_with_logits(logits, targets, {}, {}, at::Reduction::None);
  auto p_t = p * targets + (1 - p) * (1 - targets);
  auto loss = ce * torch::pow(1 - p_t, gamma);
  if (alpha >= 0) loss = loss * (alpha * targets + (1 - alpha) * (1 - targets));
  return loss.sum();
}

namespace {

torch::Tensor to_corners(const torch::Tensor& b) {
  auto c = b.narrow(-1, 0, 2), s = b.narrow(-1, 2, 2) / 2;
  return torch::cat({c - s, c + s}, -1);
}

}  // namespace

torch::Tensor pairwise_giou(const torch::Tensor& a, const torch::Tensor& b) {
  auto ca = to_corners(a), cb = to_corners(b);
  auto area_a = a.select(-1, 2) * a.select(-1, 3);
  auto area_b = b.select(-1, 2) * b.select(-1, 3);
  auto lt = torch::max(ca.narrow(-1, 0, 2), cb.narrow(-1, 0, 2));
  auto rb = torch::min(ca.narrow(-1, 2, 2), cb.narrow(-1, 2, 2));
  auto wh = (rb - lt).clamp_min(0);
  auto inter = wh.select(-1, 0) * wh.select(-1, 1);
  auto uni = area_a + area_b - inter;
  auto elt = torch::min(ca.narrow(-1, 0, 2), cb.narrow(-1, 0, 2));
  auto erb = torch::max(ca.narrow(-1, 2, 2), cb.narrow(-1, 2, 2));
  auto ewh = erb - elt;
  auto enclosing = ewh.select(-1, 0) * ewh.select(-1, 1);
  return inter / uni - (enclosing - uni) / enclosing;
}

CostMatrix detection_cost(const torch::Tensor& logits, const torch::Tensor& boxes, const FrameTargets& targets,
                          std::span<const std::size_t> gt_indices, const LossConfig& loss) {
  const auto n = static_cast<std::size_t>(logits.size(0));
  CostMatrix cost(n, gt_indices.size());
  if (n == 0 || gt_indices.empty()) return cost;
  auto prob = torch::sigmoid(logits.detach().to(torch::kDouble)).contiguous();
  auto pb = boxes.detach().to(torch::kDouble).contiguous();
  auto gb = targets.boxes.detach().to(torch::kDouble).contiguous();
  auto P = prob.accessor<double, 2>();
  auto B = pb.accessor<double, 2>();
  auto G = gb.accessor<double, 2>();
  const double a = loss.focal_alpha, g = loss.focal_gamma, eps = 1e-8;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::int64_t>(i);
    const std::array<double, 4> pred{B[ii][0], B[ii][1], B[ii][2], B[ii][3]};
    for (std::size_t j = 0; j < gt_indices.size(); ++j) {
      const auto gj = static_cast<std::int64_t>(gt_indices[j]);
      const double p = P[ii][targets.labels[gt_indices[j]]];
      const double pos = a * std::pow(1 - p, g) * -std::log(p + eps);
      const double neg = (1 - a) * std::pow(p, g) * -std::log(1 - p + eps);
      const std::array<double, 4> gt{G[gj][0], G[gj][1], G[gj][2], G[gj][3]};
      double l1 = 0;
      for (int k = 0; k < 4; ++k) l1 += std::fabs(pred[k] - gt[k]);
      cost(i, j) = loss.weight_cls * (pos - neg) + loss.weight_l1 * l1 + loss.weight_giou * (1 - giou_raw(pred, gt));
    }
  }
  return cost;
}

MatchResult tala_assign(std::span<const QueryEntry> entries, const torch::Tensor& logits, const torch::Tensor& boxes,
                        const FrameTargets& targets, const std::map<std::int64_t, std::int64_t>& live_ids,
                        const LossConfig& loss) {
  std::map<std::int64_t, std::size_t> gt_by_identity;
  for (std::size_t j = 0; j < targets.size(); ++j) gt_by_identity.emplace(targets.identities[j], j);

  MatchResult result;
  std::set<std::int64_t> claimed;
  std::vector<std::size_t> detect_rows;
  std::vector<bool> gt_taken(targets.size(), false);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.kind == QueryKind::Detect) {
      detect_rows.push_back(i);
      continue;
    }
    const auto live = live_ids.find(*e.identity);
    if (live == live_ids.end()) {
      result.unmatched_predictions.push_back(i);
      continue;
    }
    if (!claimed.insert(live->second).second)
      throw InvariantViolation("two track queries claim ground truth identity " + std::to_string(live->second));
    const auto gt = gt_by_identity.find(live->second);
    if (gt == gt_by_identity.end()) {
      result.unmatched_predictions.push_back(i);
    } else {
      result.pairs.emplace_back(i, gt->second);
      gt_taken[gt->second] = true;
    }
  }

  std::vector<std::size_t> newborn;
  for (std::size_t j = 0; j < targets.size(); ++j)
    if (!gt_taken[j] && !claimed.count(targets.identities[j])) newborn.push_back(j);

  if (!detect_rows.empty()) {
    auto index = torch::tensor(std::vector<std::int64_t>(detect_rows.begin(), detect_rows.end()), torch::kLong);
    const auto cost = detection_cost(logits.index_select(0, index), boxes.index_select(0, index), targets, newborn, loss);
    const auto m = hungarian(cost);
    for (const auto& [r, c] : m.pairs) result.pairs.emplace_back(detect_rows[r], newborn[c]);
    for (auto r : m.unmatched_predictions) result.unmatched_predictions.push_back(detect_rows[r]);
    for (auto c : m.unmatched_ground_truths) result.unmatched_ground_truths.push_back(newborn[c]);
  } else {
    result.unmatched_ground_truths = newborn;
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  std::sort(result.unmatched_predictions.begin(), result.unmatched_predictions.end());
  std::sort(result.unmatched_ground_truths.begin(), result.unmatched_ground_truths.end());
  return result;
}

LossBreakdown frame_loss(const torch::Tensor& logits, const torch::Tensor& boxes, const MatchResult& match,
                         const FrameTargets& targets, const LossConfig& loss) {
  const auto layers = logits.size(0);
  const auto first = loss.aux_loss ? 0 : layers - 1;
  auto target_cls = torch::zeros_like(logits[0]);
  std::vector<std::int64_t> pred_idx, gt_idx;
  for (const auto& [p, g] : match.pairs) {
    target_cls[static_cast<std::int64_t>(p)][targets.labels[g]].fill_(1.0);
    pred_idx.push_back(static_cast<std::int64_t>(p));
    gt_idx.push_back(static_cast<std::int64_t>(g));
  }
  auto zero = torch::zeros({}, logits.options());
  LossBreakdown out{zero, zero, zero, zero, static_cast<std::int64_t>(targets.size())};
  torch::Tensor gt_boxes;
  torch::Tensor pi;
  if (!pred_idx.empty()) {
    pi = torch::tensor(pred_idx, torch::kLong);
    gt_boxes = targets.boxes.index_select(0, torch::tensor(gt_idx, torch::kLong)).to(boxes.dtype());
  }
  for (auto l = first; l < layers; ++l) {
    out.cls = out.cls + sigmoid_focal_loss(logits[l], target_cls, loss.focal_alpha, loss.focal_gamma);
    if (!pred_idx.empty()) {
      auto pb = boxes[l].index_select(0, pi);
      out.l1 = out.l1 + (pb - gt_boxes).abs().sum();
      out.giou = out.giou + (1 - pairwise_giou(pb, gt_boxes)).sum();
    }
  }
  out.total = loss.weight_cls * out.cls + loss.weight_l1 * out.l1 + loss.weight_giou * out.giou;
  return out;
}

torch::Tensor stage1_loss(const LossBreakdown& frame) {
  return frame.total / static_cast<double>(std::max<std::int64_t>(frame.normalizer, 1));
}

torch::Tensor cal_loss(std::span<const LossBreakdown> frames, int expected_length) {
  if (static_cast<int>(frames.size()) != expected_length)
    throw std::invalid_argument("clip has " + std::to_string(frames.size()) + " frames, expected " +
                                std::to_string(expected_length));
  torch::Tensor sum;
  std::int64_t v = 0;
  for (const auto& f : frames) {
    sum = sum.defined() ? sum + f.total : f.total;
    v += f.normalizer;
  }
  return sum / static_cast<double>(std::max<std::int64_t>(v, 1));
}

}  // namespace moyolo::model
