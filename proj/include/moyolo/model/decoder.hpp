// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "moyolo/config.hpp"
#include "moyolo/model/deform_attn.hpp"

namespace moyolo::model {

struct DecoderOutput {
  torch::Tensor logits;  // [L, B, N, C]
  torch::Tensor boxes;   // [L, B, N, 4], normalized cxcywh
  torch::Tensor hidden;  // [B, N, D], final layer

  std::int64_t layers() const { return logits.size(0); }
  std::int64_t queries() const { return logits.size(2); }
  /// Foreground probability of every query at the final layer, [B, N].
  torch::Tensor scores() const;
};

struct DecoderLayerImpl : torch::nn::Module {
  DecoderLayerImpl(int dim, int heads, int levels, int points, int ffn_dim);
  torch::Tensor forward(const torch::Tensor& tgt, const torch::Tensor& pos, const torch::Tensor& reference_boxes,
                        const EncoderMemory& memory, DeformAttnTrace* trace = nullptr);

  MultiHeadAttention self_attn{nullptr};
  MsDeformAttn cross_attn{nullptr};
  FeedForward ffn{nullptr};
  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr}, norm3{nullptr};
};
TORCH_MODULE(DecoderLayer);

/// Stack of layers with per-layer heads. Each layer refines the incoming
/// reference box by a delta in inverse-sigmoid space.
struct DecoderImpl : torch::nn::Module {
  explicit DecoderImpl(const ModelConfig& config);

  /// tgt [B, N, D], reference boxes [B, N, 4] normalized cxcywh.
  DecoderOutput forward(const torch::Tensor& tgt, const torch::Tensor& reference_boxes, const EncoderMemory& memory);

  int dim, num_classes;
  bool detach_refs;
  Mlp query_pos_head{nullptr};
  torch::nn::ModuleList layers, box_heads, class_heads;
};
TORCH_MODULE(Decoder);

}  // namespace moyolo::model
