// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <vector>

#include "moyolo/model/backbone.hpp"

namespace moyolo::model {

/// 2-D sine/cosine positions for an h x w grid, [h*w, dim] in row-major order.
/// Layout per position: sin(x w_i), cos(x w_i), sin(y w_i), cos(y w_i) with
/// w_i = temperature^(-i / (dim/4)). `dim` must be divisible by 4.
torch::Tensor sine_position_embedding(int h, int w, int dim, double temperature = 10000.0,
                                      torch::Dtype dtype = torch::kFloat);

/// Flattened multi-scale memory consumed by the decoder.
struct EncoderMemory {
  torch::Tensor memory;                          // [B, S, D]
  std::vector<std::array<std::int64_t, 2>> shapes;  // (h, w) per level
  std::vector<std::int64_t> offsets;            // start of each level in S
  torch::Tensor valid_ratios;                    // [B, levels, 2]

  std::int64_t length() const { return memory.size(1); }
  /// Memory of one batch element, kept as batch size 1.
  EncoderMemory select(std::int64_t b) const;
};

/// Post-norm transformer layer applied to the coarsest map.
struct AifiLayerImpl : torch::nn::Module {
  AifiLayerImpl(int dim, int heads, int ffn_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& pos, torch::Tensor* weights = nullptr);

  MultiHeadAttention attn{nullptr};
  FeedForward ffn{nullptr};
  torch::nn::LayerNorm norm1{nullptr}, norm2{nullptr};
};
TORCH_MODULE(AifiLayer);

/// Projects each level to D channels, runs self-attention on the stride-32
/// level and fuses the levels top-down and bottom-up before flattening.
struct HybridEncoderImpl : torch::nn::Module {
  HybridEncoderImpl(const ModelConfig& config, const std::array<int, 3>& in_channels);
  EncoderMemory forward(const FeaturePyramid& pyramid, torch::Tensor* attention = nullptr);

  int dim;
  torch::nn::ModuleList input_proj;
  AifiLayer aifi{nullptr};
  ConvBnAct lateral32{nullptr}, lateral16{nullptr}, down8{nullptr}, down16{nullptr};
  C2f fpn16{nullptr}, fpn8{nullptr}, pan16{nullptr}, pan32{nullptr};
};
TORCH_MODULE(HybridEncoder);

/// Concatenates [B, D, h, w] maps into EncoderMemory.
EncoderMemory flatten_levels(const std::vector<torch::Tensor>& maps);

}  // namespace moyolo::model
