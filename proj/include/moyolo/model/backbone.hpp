// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>

#include "moyolo/config.hpp"
#include "moyolo/model/layers.hpp"

namespace moyolo::model {

constexpr std::array<int, 3> kPyramidStrides{8, 16, 32};

/// Three maps at strides 8, 16 and 32.
struct FeaturePyramid {
  std::array<torch::Tensor, 3> maps;
};

/// Stem plus four stride-2 stages of C2f blocks, SPPF on the last stage.
/// Returns the stride 8/16/32 stage outputs.
struct BackboneImpl : torch::nn::Module {
  explicit BackboneImpl(const ModelConfig& config);
  std::array<torch::Tensor, 3> forward(const torch::Tensor& image);

  std::array<int, 4> stage_channels{};
  ConvBnAct stem{nullptr};
  torch::nn::ModuleList downsample, stages;
  Sppf sppf{nullptr};
};
TORCH_MODULE(Backbone);

/// Top-down then bottom-up fusion of the backbone outputs.
struct NeckImpl : torch::nn::Module {
  NeckImpl(const std::array<int, 3>& in_channels, const std::array<int, 3>& out_channels, int depth);
  FeaturePyramid forward(const std::array<torch::Tensor, 3>& c);

  C2f top16{nullptr}, top8{nullptr}, bottom16{nullptr}, bottom32{nullptr};
  ConvBnAct down8{nullptr}, down16{nullptr};
};
TORCH_MODULE(Neck);

struct FeatureExtractorImpl : torch::nn::Module {
  explicit FeatureExtractorImpl(const ModelConfig& config);

  /// `image` is [B, 3, H, W] with H and W multiples of 32.
  FeaturePyramid forward(const torch::Tensor& image);

  Backbone backbone{nullptr};
  Neck neck{nullptr};
  std::array<int, 3> out_channels{};
};
TORCH_MODULE(FeatureExtractor);

/// Throws std::invalid_argument unless `image` is [B, 3, H, W] with H, W multiples of 32.
void check_image_tensor(const torch::Tensor& image);

}  // namespace moyolo::model
