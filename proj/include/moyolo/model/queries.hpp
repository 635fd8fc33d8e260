// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <vector>

#include "moyolo/lifecycle.hpp"
#include "moyolo/mot_io.hpp"
#include "moyolo/model/decoder.hpp"

namespace moyolo::model {

/// Ordered queries with their embeddings [N, D] and reference boxes [N, 4].
struct QuerySet {
  std::vector<QueryEntry> entries;
  torch::Tensor embeddings;
  torch::Tensor boxes;

  std::size_t size() const { return entries.size(); }
  std::size_t track_count() const;

  /// Tracks first, then the detect queries.
  static QuerySet concat(const QuerySet& tracks, const QuerySet& detects);
  static QuerySet empty(int dim, const torch::TensorOptions& options);
};

/// Fixed-length learnable detect queries shared by every frame.
struct DetectQueriesImpl : torch::nn::Module {
  DetectQueriesImpl(int count, int dim);
  QuerySet forward() const;

  torch::Tensor embedding;   // [N, D]
  torch::Tensor box_logits;  // [N, 4], boxes = sigmoid(box_logits)
};
TORCH_MODULE(DetectQueries);

/// Temporal aggregation of track queries: attention over the current hidden
/// states keyed by hidden + previous embedding, then a feed-forward block.
/// Pre-norm residual form, so all-zero weights reduce to the identity.
struct TanImpl : torch::nn::Module {
  TanImpl(int dim, int heads, int ffn_dim);

  /// hidden and previous are [N, D]; returns [N, D].
  torch::Tensor forward(const torch::Tensor& hidden, const torch::Tensor& previous);

  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr};
  MultiHeadAttention attn{nullptr};
  FeedForward ffn{nullptr};
};
TORCH_MODULE(Tan);

struct Propagation {
  QuerySet next;  // track queries for the next frame
  PropagationPlan plan;
};

/// Builds the next frame's track set from the decoded set `current`.
/// `scores` drive the lifecycle (decoded probabilities at inference, match
/// indicators during training). Survivors take TAN-aggregated hidden states
/// and the final refined boxes of `decoded` (batch element 0).
Propagation propagate(const QuerySet& current, const DecoderOutput& decoded, std::span<const double> scores,
                      const Thresholds& thresholds, IdentityAllocator& ids, Tan& tan, bool detach_boxes);

/// Pixel-space results for every track of `queries` above `emit`, ordered by identity.
std::vector<TrackBox> emit_tracks(const QuerySet& queries, ImageSize image, double emit);

}  // namespace moyolo::model
