// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/model.hpp"

namespace moyolo::model {

MoYoloImpl::MoYoloImpl(const ModelConfig& cfg) : config(cfg) {
  extractor = register_module("extractor", FeatureExtractor(cfg));
  encoder = register_module("encoder", HybridEncoder(cfg, extractor->out_channels));
  decoder = register_module("decoder", Decoder(cfg));
  detect = register_module("detect", DetectQueries(cfg.num_queries, cfg.hidden_dim));
  tan = register_module("tan", Tan(cfg.hidden_dim, cfg.tan_heads, cfg.tan_ffn_dim));
}

EncoderMemory MoYoloImpl::encode(const torch::Tensor& images) { return encoder(extractor(images)); }

DecoderOutput MoYoloImpl::decode(const QuerySet& queries, const EncoderMemory& memory) {
  return decoder(queries.embeddings.unsqueeze(0), queries.boxes.unsqueeze(0), memory);
}

MoYolo make_model(const ModelConfig& config, std::uint64_t seed) {
  validate(config);
  torch::manual_seed(seed);
  return MoYolo(config);
}

}  // namespace moyolo::model
