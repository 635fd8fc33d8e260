// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/deform_attn.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace moyolo::model {

namespace F = torch::nn::functional;

torch::Tensor ms_deform_attn_sample(const torch::Tensor& value, const std::vector<std::array<std::int64_t, 2>>& shapes,
                                    const std::vector<std::int64_t>& offsets, const torch::Tensor& locations,
                                    const torch::Tensor& weights) {
  const auto b = value.size(0), h = value.size(2), dh = value.size(3);
  const auto q = locations.size(1), k = locations.size(4);
  const auto grids = 2 * locations - 1;
  std::vector<torch::Tensor> sampled;
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const auto [hl, wl] = shapes[l];
    // [B, S_l, H, Dh] -> [B*H, Dh, h_l, w_l]
    auto v = value.narrow(1, offsets[l], hl * wl).permute({0, 2, 3, 1}).reshape({b * h, dh, hl, wl});
    // [B, Q, H, K, 2] -> [B*H, Q, K, 2]
    auto g = grids.select(3, static_cast<std::int64_t>(l)).permute({0, 2, 1, 3, 4}).reshape({b * h, q, k, 2});
    sampled.push_back(F::grid_sample(v, g,
                                     F::GridSampleFuncOptions()
                                         .mode(torch::kBilinear)
                                         .padding_mode(torch::kZeros)
                                         .align_corners(false)));  // [B*H, Dh, Q, K]
  }
  // [B*H, Dh, Q, L, K]
  auto stacked = torch::stack(sampled, 3);
  auto w = weights.permute({0, 2, 1, 3, 4}).reshape({b * h, 1, q, static_cast<std::int64_t>(shapes.size()), k});
  auto out = (stacked * w).sum({3, 4});  // [B*H, Dh, Q]
  return out.view({b, h * dh, q}).transpose(1, 2).contiguous();
}

void check_reference_boxes(const torch::Tensor& boxes) {
  if (boxes.numel() == 0) return;
  if (boxes.min().item<double>() < 0.0 || boxes.max().item<double>() > 1.0)
    throw std::invalid_argument("reference boxes must lie inside [0, 1]");
}

MsDeformAttnImpl::MsDeformAttnImpl(int dim, int heads, int levels, int points)
    : dim(dim), heads(heads), levels(levels), points(points) {
  TORCH_CHECK(dim % heads == 0, "deformable attention dim not divisible by heads");
  sampling_offsets = register_module("sampling_offsets", torch::nn::Linear(dim, heads * levels * points * 2));
  attention_weights = register_module("attention_weights", torch::nn::Linear(dim, heads * levels * points));
  value_proj = register_module("value_proj", torch::nn::Linear(dim, dim));
  output_proj = register_module("output_proj", torch::nn::Linear(dim, dim));
  reset_parameters();
}

void MsDeformAttnImpl::reset_parameters() {
  torch::NoGradGuard guard;
  sampling_offsets->weight.zero_();
  // Each head starts looking in its own direction, further out for later points.
  auto theta = torch::arange(heads, torch::kFloat) * (2.0 * std::numbers::pi / heads);
  auto grid = torch::stack({theta.cos(), theta.sin()}, -1);
  grid = grid / std::get<0>(grid.abs().max(-1, true));
  grid = grid.view({heads, 1, 1, 2}).repeat({1, levels, points, 1});
  for (int p = 0; p < points; ++p) grid.select(2, p).mul_(p + 1);
  sampling_offsets->bias.copy_(grid.flatten());
  attention_weights->weight.zero_();
  attention_weights->bias.zero_();
  torch::nn::init::xavier_uniform_(value_proj->weight);
  value_proj->bias.zero_();
  torch::nn::init::xavier_uniform_(output_proj->weight);
  output_proj->bias.zero_();
}

torch::Tensor MsDeformAttnImpl::forward(const torch::Tensor& query, const torch::Tensor& reference_boxes,
                                        const EncoderMemory& memory, DeformAttnTrace* trace) {
  check_reference_boxes(reference_boxes);
  if (static_cast<int>(memory.shapes.size()) != levels)
    throw std::invalid_argument("memory level count does not match deformable attention");
  const auto b = query.size(0), q = query.size(1), s = memory.memory.size(1);
  auto value = value_proj(memory.memory).view({b, s, heads, dim / heads});
  auto off = sampling_offsets(query).view({b, q, heads, levels, points, 2});
  auto w = attention_weights(query).view({b, q, heads, levels * points});
  w = torch::softmax(w, -1).view({b, q, heads, levels, points});
  auto center = reference_boxes.narrow(-1, 0, 2).view({b, q, 1, 1, 1, 2});
  auto size = reference_boxes.narrow(-1, 2, 2).view({b, q, 1, 1, 1, 2});
  auto loc = center + off / points * size * 0.5;
  if (trace) *trace = {off, loc, w};
  return output_proj(ms_deform_attn_sample(value, memory.shapes, memory.offsets, loc, w));
}

}  // namespace moyolo::model
