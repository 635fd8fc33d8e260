// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "moyolo/config.hpp"
#include "moyolo/model/backbone.hpp"
#include "moyolo/model/decoder.hpp"
#include "moyolo/model/encoder.hpp"
#include "moyolo/model/queries.hpp"

namespace moyolo::model {

/// Backbone, neck, encoder, decoder, detect queries and TAN.
struct MoYoloImpl : torch::nn::Module {
  explicit MoYoloImpl(const ModelConfig& config);

  /// images [T, 3, H, W] in [0, 1]; frames are encoded as one batch.
  EncoderMemory encode(const torch::Tensor& images);

  /// Decodes `queries` against a batch-1 memory.
  DecoderOutput decode(const QuerySet& queries, const EncoderMemory& memory);

  ModelConfig config;
  FeatureExtractor extractor{nullptr};
  HybridEncoder encoder{nullptr};
  Decoder decoder{nullptr};
  DetectQueries detect{nullptr};
  Tan tan{nullptr};
};
TORCH_MODULE(MoYolo);

/// Validates the configuration and builds a model initialized from `seed`.
MoYolo make_model(const ModelConfig& config, std::uint64_t seed);

}  // namespace moyolo::model
