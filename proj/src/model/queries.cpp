// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/queries.hpp"

#include <algorithm>

namespace moyolo::model {

std::size_t QuerySet::track_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const QueryEntry& e) { return e.kind == QueryKind::Track; }));
}

QuerySet QuerySet::concat(const QuerySet& tracks, const QuerySet& detects) {
  QuerySet q;
  q.entries = tracks.entries;
  q.entries.insert(q.entries.end(), detects.entries.begin(), detects.entries.end());
  q.embeddings = torch::cat({tracks.embeddings, detects.embeddings}, 0);
  q.boxes = torch::cat({tracks.boxes, detects.boxes}, 0);
  return q;
}

QuerySet QuerySet::empty(int dim, const torch::TensorOptions& options) {
  QuerySet q;
  q.embeddings = torch::zeros({0, dim}, options);
  q.boxes = torch::zeros({0, 4}, options);
  return q;
}

DetectQueriesImpl::DetectQueriesImpl(int count, int dim) {
  embedding = register_parameter("embedding", torch::randn({count, dim}));
  auto centers = torch::rand({count, 2}) * 0.9 + 0.05;
  auto sizes = torch::full({count, 2}, 0.1);
  box_logits = register_parameter("box_logits", inverse_sigmoid(torch::cat({centers, sizes}, 1)));
}

QuerySet DetectQueriesImpl::forward() const {
  QuerySet q;
  q.entries.resize(static_cast<std::size_t>(embedding.size(0)));
  q.embeddings = embedding;
  q.boxes = torch::sigmoid(box_logits);
  return q;
}

TanImpl::TanImpl(int dim, int heads, int ffn_dim) {
  norm1 = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  attn = register_module("attn", MultiHeadAttention(dim, heads));
  norm2 = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  ffn = register_module("ffn", FeedForward(dim, ffn_dim));
}

torch::Tensor TanImpl::forward(const torch::Tensor& hidden, const torch::Tensor& previous) {
  if (hidden.size(0) == 0) return hidden;
  auto h = hidden.unsqueeze(0);
  auto qk = norm1(h + previous.unsqueeze(0));
  auto x = h + attn(qk, qk, h);
  x = x + ffn(norm2(x));
  return x.squeeze(0);
}

Propagation propagate(const QuerySet& current, const DecoderOutput& decoded, std::span<const double> scores,
                      const Thresholds& thresholds, IdentityAllocator& ids, Tan& tan, bool detach_boxes) {
  Propagation out;
  out.plan = plan_propagation(current.entries, scores, thresholds, ids);
  out.next.entries = out.plan.next;
  std::vector<std::int64_t> src(out.plan.source.begin(), out.plan.source.end());
  auto index = torch::tensor(src, torch::kLong);
  auto hidden = decoded.hidden[0].index_select(0, index);
  auto previous = current.embeddings.index_select(0, index);
  out.next.embeddings = tan(hidden, previous);
  auto boxes = decoded.boxes[-1][0].index_select(0, index);
  out.next.boxes = detach_boxes ? boxes.detach() : boxes;
  return out;
}

std::vector<TrackBox> emit_tracks(const QuerySet& queries, ImageSize image, double emit) {
  std::vector<TrackBox> out;
  const auto order = emit_order(queries.entries, emit);
  if (order.empty()) return out;
  auto boxes = queries.boxes.detach().to(torch::kDouble).contiguous();
  auto acc = boxes.accessor<double, 2>();
  for (auto i : order) {
    const auto idx = static_cast<std::int64_t>(i);
    const double cx = acc[idx][0] * image.width, cy = acc[idx][1] * image.height;
    const double w = acc[idx][2] * image.width, h = acc[idx][3] * image.height;
    TrackBox t;
    t.id = *queries.entries[i].identity;
    t.box = {cx - w / 2, cy - h / 2, w, h};
    t.score = quantize_score(*queries.entries[i].score);
    t.visibility = -1;
    out.push_back(t);
  }
  return out;
}

}  // namespace moyolo::model
