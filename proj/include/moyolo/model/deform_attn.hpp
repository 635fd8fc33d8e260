// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "moyolo/model/encoder.hpp"

namespace moyolo::model {

/// Bilinear multi-scale sampling and weighting.
///   value      [B, S, H, Dh]   per-head values of the flattened memory
///   locations  [B, Q, H, L, K, 2]  normalized (x, y); pixel centers sit at (j + 0.5) / w
///   weights    [B, Q, H, L, K]
/// Samples outside a map contribute zero. Returns [B, Q, H * Dh].
torch::Tensor ms_deform_attn_sample(const torch::Tensor& value, const std::vector<std::array<std::int64_t, 2>>& shapes,
                                    const std::vector<std::int64_t>& offsets, const torch::Tensor& locations,
                                    const torch::Tensor& weights);

/// Intermediate tensors of one forward pass, for inspection.
struct DeformAttnTrace {
  torch::Tensor offsets;    // [B, Q, H, L, K, 2] raw offset predictions
  torch::Tensor locations;  // [B, Q, H, L, K, 2]
  torch::Tensor weights;    // [B, Q, H, L, K], softmax over (L, K)
};

/// Box-anchored deformable attention: sampling point = box center +
/// offset / K * box size / 2.
struct MsDeformAttnImpl : torch::nn::Module {
  MsDeformAttnImpl(int dim, int heads, int levels, int points);

  /// query [B, Q, D]; reference boxes [B, Q, 4] normalized cxcywh inside [0, 1].
  torch::Tensor forward(const torch::Tensor& query, const torch::Tensor& reference_boxes, const EncoderMemory& memory,
                        DeformAttnTrace* trace = nullptr);
  void reset_parameters();

  int dim, heads, levels, points;
  torch::nn::Linear sampling_offsets{nullptr}, attention_weights{nullptr}, value_proj{nullptr}, output_proj{nullptr};
};
TORCH_MODULE(MsDeformAttn);

/// Throws std::invalid_argument if any coordinate lies outside [0, 1].
void check_reference_boxes(const torch::Tensor& boxes);

}  // namespace moyolo::model
