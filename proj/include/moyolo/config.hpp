// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "moyolo/lifecycle.hpp"

namespace moyolo {

struct ModelConfig {
  int input_width = 640;
  int input_height = 640;
  int stem_channels = 32;
  std::vector<int> stage_depths{1, 2, 2, 1};
  double width_multiple = 1.0;
  double depth_multiple = 1.0;
  std::vector<int> pyramid_channels{128, 256, 256};  // strides 8, 16, 32
  int hidden_dim = 256;
  int encoder_heads = 8;
  int encoder_ffn_ratio = 4;
  int decoder_layers = 6;
  int decoder_heads = 8;
  int decoder_points = 4;
  int decoder_ffn_dim = 1024;
  int num_queries = 60;
  int num_classes = 1;
  int tan_heads = 8;
  int tan_ffn_dim = 1024;
  bool detach_refs_between_layers = true;

  bool operator==(const ModelConfig&) const = default;
};

struct LossConfig {
  double weight_cls = 2.0;
  double weight_l1 = 5.0;
  double weight_giou = 2.0;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  bool aux_loss = true;
};

struct TrainConfig {
  int stage = 1;
  double lr = 2e-4;
  double weight_decay = 1e-4;
  int iterations = 1000;
  double lr_drop_fraction = 0.8;
  double lr_drop_factor = 0.1;
  double grad_clip = 0.1;
  int clip_length = 5;
  int max_stride = 3;
  int batch_size = 1;
  std::uint64_t seed = 42;
  std::string dataset;
  std::string split = "all";  // all, first_half, second_half
  std::string stage1_checkpoint;
  std::string output_checkpoint = "checkpoint.mck";
  std::string resume_checkpoint;
  std::string log_path = "loss.csv";
  bool augment = true;          // crop, flips, channel order, intensity
  double min_crop_scale = 0.7;  // 1 disables cropping
  double track_drop_prob = 0.1;    // stage 2: supervised tracks removed per frame
  double track_insert_prob = 0.1;  // stage 2: false track promoted per frame
  bool propagate_tracks = true;
  bool detach_boxes_between_frames = true;
  int log_every = 10;
  int threads = 1;
};

/// Everything one CLI invocation needs; mirrors the INI sections
/// [model], [tracker], [loss], [train].
struct RunConfig {
  ModelConfig model;
  Thresholds tracker;
  LossConfig loss;
  TrainConfig train;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Applies one dotted `section.key=value` assignment. Unknown keys and
/// malformed values raise ConfigError naming the key.
void apply_override(RunConfig& config, const std::string& assignment);
void set_value(RunConfig& config, const std::string& dotted_key, const std::string& value);

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Resolved configuration in the same INI dialect; parse(format(c)) == c.
std::string format_config(const RunConfig& config);

/// Every recognised dotted key, in output order.
std::vector<std::string> config_keys();

/// Model-shape consistency (divisibility, positive widths); throws ConfigError.
void validate(const ModelConfig& model);

}  // namespace moyolo
