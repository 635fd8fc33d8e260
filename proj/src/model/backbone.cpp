// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/backbone.hpp"

#include <stdexcept>
#include <string>

namespace moyolo::model {

namespace F = torch::nn::functional;

void check_image_tensor(const torch::Tensor& image) {
  if (image.dim() != 4 || image.size(1) != 3)
    throw std::invalid_argument("image tensor must be [B, 3, H, W]");
  if (image.size(2) % 32 != 0 || image.size(3) % 32 != 0 || image.size(2) == 0 || image.size(3) == 0)
    throw std::invalid_argument("image height and width must be positive multiples of 32, got " +
                                std::to_string(image.size(2)) + "x" + std::to_string(image.size(3)));
}

BackboneImpl::BackboneImpl(const ModelConfig& config) {
  if (config.stage_depths.size() != 4) throw std::invalid_argument("backbone needs 4 stage depths");
  const int s = scaled_channels(config.stem_channels, config.width_multiple);
  stage_channels = {2 * s, 4 * s, 8 * s, 8 * s};
  stem = register_module("stem", ConvBnAct(3, s, 3, 2));
  downsample = register_module("downsample", torch::nn::ModuleList());
  stages = register_module("stages", torch::nn::ModuleList());
  int prev = s;
  for (int i = 0; i < 4; ++i) {
    downsample->push_back(ConvBnAct(prev, stage_channels[i], 3, 2));
    stages->push_back(C2f(stage_channels[i], stage_channels[i], scaled_depth(config.stage_depths[i], config.depth_multiple),
                          true));
    prev = stage_channels[i];
  }
  sppf = register_module("sppf", Sppf(prev, prev));
}

std::array<torch::Tensor, 3> BackboneImpl::forward(const torch::Tensor& image) {
  auto x = stem(image);
  std::array<torch::Tensor, 3> out;
  for (int i = 0; i < 4; ++i) {
    x = downsample[i]->as<ConvBnAct>()->forward(x);
    x = stages[i]->as<C2f>()->forward(x);
    if (i == 3) x = sppf(x);
    if (i >= 1) out[i - 1] = x;
  }
  return out;
}

NeckImpl::NeckImpl(const std::array<int, 3>& in, const std::array<int, 3>& out, int depth) {
  top16 = register_module("top16", C2f(in[2] + in[1], out[1], depth, false));
  top8 = register_module("top8", C2f(out[1] + in[0], out[0], depth, false));
  down8 = register_module("down8", ConvBnAct(out[0], out[0], 3, 2));
  bottom16 = register_module("bottom16", C2f(out[0] + out[1], out[1], depth, false));
  down16 = register_module("down16", ConvBnAct(out[1], out[1], 3, 2));
  bottom32 = register_module("bottom32", C2f(out[1] + in[2], out[2], depth, false));
}

FeaturePyramid NeckImpl::forward(const std::array<torch::Tensor, 3>& c) {
  const auto up = F::InterpolateFuncOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest);
  auto t16 = top16(torch::cat({F::interpolate(c[2], up), c[1]}, 1));
  auto p8 = top8(torch::cat({F::interpolate(t16, up), c[0]}, 1));
  auto p16 = bottom16(torch::cat({down8(p8), t16}, 1));
  auto p32 = bottom32(torch::cat({down16(p16), c[2]}, 1));
  return {{p8, p16, p32}};
}

FeatureExtractorImpl::FeatureExtractorImpl(const ModelConfig& config) {
  if (config.pyramid_channels.size() != 3) throw std::invalid_argument("need 3 pyramid channel widths");
  backbone = register_module("backbone", Backbone(config));
  for (int i = 0; i < 3; ++i) out_channels[i] = scaled_channels(config.pyramid_channels[i], config.width_multiple);
  const auto& sc = backbone->stage_channels;
  neck = register_module("neck", Neck(std::array<int, 3>{sc[1], sc[2], sc[3]}, out_channels,
                                      scaled_depth(1, config.depth_multiple)));
}

FeaturePyramid FeatureExtractorImpl::forward(const torch::Tensor& image) {
  check_image_tensor(image);
  return neck(backbone(image));
}

}  // namespace moyolo::model
