// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/encoder.hpp"

#include <stdexcept>

namespace moyolo::model {

namespace F = torch::nn::functional;

torch::Tensor sine_position_embedding(int h, int w, int dim, double temperature, torch::Dtype dtype) {
  if (dim % 4 != 0) throw std::invalid_argument("sine position embedding needs dim divisible by 4");
  const auto opts = torch::TensorOptions().dtype(dtype);
  auto gy = torch::arange(h, opts).view({h, 1}).expand({h, w}).reshape({-1, 1});
  auto gx = torch::arange(w, opts).view({1, w}).expand({h, w}).reshape({-1, 1});
  const int quarter = dim / 4;
  auto omega = torch::pow(temperature, -torch::arange(quarter, opts) / quarter).view({1, quarter});
  auto ox = gx * omega;
  auto oy = gy * omega;
  return torch::cat({ox.sin(), ox.cos(), oy.sin(), oy.cos()}, 1);
}

EncoderMemory EncoderMemory::select(std::int64_t b) const {
  EncoderMemory m = *this;
  m.memory = memory.narrow(0, b, 1);
  m.valid_ratios = valid_ratios.narrow(0, b, 1);
  return m;
}

EncoderMemory flatten_levels(const std::vector<torch::Tensor>& maps) {
  EncoderMemory m;
  std::vector<torch::Tensor> flat;
  std::int64_t offset = 0;
  for (const auto& x : maps) {
    m.shapes.push_back({x.size(2), x.size(3)});
    m.offsets.push_back(offset);
    offset += x.size(2) * x.size(3);
    flat.push_back(x.flatten(2).transpose(1, 2));
  }
  m.memory = torch::cat(flat, 1);
  m.valid_ratios = torch::ones({maps.front().size(0), static_cast<std::int64_t>(maps.size()), 2},
                               maps.front().options());
  return m;
}

AifiLayerImpl::AifiLayerImpl(int dim, int heads, int ffn_dim) {
  attn = register_module("attn", MultiHeadAttention(dim, heads));
  ffn = register_module("ffn", FeedForward(dim, ffn_dim));
  norm1 = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  norm2 = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
}

torch::Tensor AifiLayerImpl::forward(const torch::Tensor& x, const torch::Tensor& pos, torch::Tensor* weights) {
  auto qk = x + pos;
  auto y = norm1(x + attn(qk, qk, x, weights));
  return norm2(y + ffn(y));
}

HybridEncoderImpl::HybridEncoderImpl(const ModelConfig& config, const std::array<int, 3>& in) : dim(config.hidden_dim) {
  input_proj = register_module("input_proj", torch::nn::ModuleList());
  for (int c : in) input_proj->push_back(ConvBnAct(c, dim, 1, 1, false));
  aifi = register_module("aifi", AifiLayer(dim, config.encoder_heads, dim * config.encoder_ffn_ratio));
  const int depth = scaled_depth(1, config.depth_multiple);
  lateral32 = register_module("lateral32", ConvBnAct(dim, dim, 1));
  fpn16 = register_module("fpn16", C2f(2 * dim, dim, depth, false));
  lateral16 = register_module("lateral16", ConvBnAct(dim, dim, 1));
  fpn8 = register_module("fpn8", C2f(2 * dim, dim, depth, false));
  down8 = register_module("down8", ConvBnAct(dim, dim, 3, 2));
  pan16 = register_module("pan16", C2f(2 * dim, dim, depth, false));
  down16 = register_module("down16", ConvBnAct(dim, dim, 3, 2));
  pan32 = register_module("pan32", C2f(2 * dim, dim, depth, false));
}

EncoderMemory HybridEncoderImpl::forward(const FeaturePyramid& pyramid, torch::Tensor* attention) {
  std::array<torch::Tensor, 3> p;
  for (int i = 0; i < 3; ++i) p[i] = input_proj[i]->as<ConvBnAct>()->forward(pyramid.maps[i]);

  const auto b = p[2].size(0), h = p[2].size(2), w = p[2].size(3);
  auto pos = sine_position_embedding(static_cast<int>(h), static_cast<int>(w), dim, 10000.0,
                                     p[2].scalar_type()).to(p[2].device());
  auto tokens = aifi(p[2].flatten(2).transpose(1, 2), pos.unsqueeze(0), attention);
  auto s32 = tokens.transpose(1, 2).reshape({b, dim, h, w});

  const auto up = F::InterpolateFuncOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest);
  auto l32 = lateral32(s32);
  auto t16 = fpn16(torch::cat({F::interpolate(l32, up), p[1]}, 1));
  auto l16 = lateral16(t16);
  auto o8 = fpn8(torch::cat({F::interpolate(l16, up), p[0]}, 1));
  auto o16 = pan16(torch::cat({down8(o8), l16}, 1));
  auto o32 = pan32(torch::cat({down16(o16), l32}, 1));
  return flatten_levels({o8, o16, o32});
}

}  // namespace moyolo::model
