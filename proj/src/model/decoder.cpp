// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/decoder.hpp"

#include <cmath>

namespace moyolo::model {

torch::Tensor DecoderOutput::scores() const { return torch::sigmoid(logits[-1].select(-1, 0)); }

DecoderLayerImpl::DecoderLayerImpl(int dim, int heads, int levels, int points, int ffn_dim) {
  self_attn = register_module("self_attn", MultiHeadAttention(dim, heads));
  cross_attn = register_module("cross_attn", MsDeformAttn(dim, heads, levels, points));
  ffn = register_module("ffn", FeedForward(dim, ffn_dim));
  norm1 = register_module("norm1", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  norm2 = register_module("norm2", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
  norm3 = register_module("norm3", torch::nn::LayerNorm(torch::nn::LayerNormOptions({dim})));
}

torch::Tensor DecoderLayerImpl::forward(const torch::Tensor& tgt, const torch::Tensor& pos,
                                        const torch::Tensor& reference_boxes, const EncoderMemory& memory,
                                        DeformAttnTrace* trace) {
  auto qk = tgt + pos;
  auto x = norm1(tgt + self_attn(qk, qk, tgt));
  x = norm2(x + cross_attn(x + pos, reference_boxes, memory, trace));
  return norm3(x + ffn(x));
}

DecoderImpl::DecoderImpl(const ModelConfig& config)
    : dim(config.hidden_dim), num_classes(config.num_classes), detach_refs(config.detach_refs_between_layers) {
  query_pos_head = register_module("query_pos_head", Mlp(4, 2 * dim, dim, 2));
  layers = register_module("layers", torch::nn::ModuleList());
  box_heads = register_module("box_heads", torch::nn::ModuleList());
  class_heads = register_module("class_heads", torch::nn::ModuleList());
  const double prior_bias = -std::log((1.0 - 0.01) / 0.01);
  for (int i = 0; i < config.decoder_layers; ++i) {
    layers->push_back(DecoderLayer(dim, config.decoder_heads, 3, config.decoder_points, config.decoder_ffn_dim));
    Mlp box(dim, dim, 4, 3);
    {
      torch::NoGradGuard guard;
      auto last = box->linears[2]->as<torch::nn::Linear>();
      last->weight.zero_();
      last->bias.zero_();
    }
    box_heads->push_back(box);
    torch::nn::Linear cls(dim, num_classes);
    {
      torch::NoGradGuard guard;
      cls->bias.fill_(prior_bias);
    }
    class_heads->push_back(cls);
  }
}

DecoderOutput DecoderImpl::forward(const torch::Tensor& tgt, const torch::Tensor& reference_boxes,
                                   const EncoderMemory& memory) {
  const auto b = tgt.size(0), n = tgt.size(1);
  const auto L = static_cast<std::int64_t>(layers->size());
  DecoderOutput out;
  if (n == 0) {
    out.logits = torch::zeros({L, b, 0, num_classes}, tgt.options());
    out.boxes = torch::zeros({L, b, 0, 4}, tgt.options());
    out.hidden = tgt;
    return out;
  }
  std::vector<torch::Tensor> logits, boxes;
  auto x = tgt;
  auto ref = reference_boxes;
  for (std::int64_t i = 0; i < L; ++i) {
    auto pos = query_pos_head(ref);
    x = layers[i]->as<DecoderLayer>()->forward(x, pos, ref, memory);
    auto refined = torch::sigmoid(box_heads[i]->as<Mlp>()->forward(x) + inverse_sigmoid(ref));
    logits.push_back(class_heads[i]->as<torch::nn::Linear>()->forward(x));
    boxes.push_back(refined);
    ref = detach_refs ? refined.detach() : refined;
  }
  out.logits = torch::stack(logits);
  out.boxes = torch::stack(boxes);
  out.hidden = x;
  return out;
}

}  // namespace moyolo::model
