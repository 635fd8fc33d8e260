// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <random>
#include <vector>

#include "moyolo/config.hpp"
#include "moyolo/model/checkpoint.hpp"
#include "moyolo/model/dataset.hpp"
#include "moyolo/model/model.hpp"

namespace moyolo::model {

/// Per-frame losses and matches of one forward pass.
struct ForwardRecord {
  std::vector<LossBreakdown> frames;
  std::vector<MatchResult> matches;
  std::vector<std::size_t> track_queries;  // track queries decoded at each frame
};

/// Independent frames decoded with detect queries only. images [B, 3, H, W] in [0, 1].
ForwardRecord forward_detection(MoYolo& model, const torch::Tensor& images, const std::vector<FrameTargets>& targets,
                                const RunConfig& config);

/// One clip in temporal order: detect queries plus the propagated track
/// queries, supervised by tracklet-aware assignment. With
/// train.propagate_tracks off, tracks are cleared after every frame.
/// Given `rng`, supervised tracks are dropped with train.track_drop_prob and
/// the best unmatched detect query is promoted as a false track with
/// train.track_insert_prob per frame.
ForwardRecord forward_clip(MoYolo& model, const torch::Tensor& images, const std::vector<FrameTargets>& targets,
                           const RunConfig& config, std::mt19937_64* rng = nullptr);

struct StepRecord {
  int iteration = 0;  // 1-based
  int stage = 1;
  double loss = 0, cls = 0, l1 = 0, giou = 0;
};

std::string loss_log_header();
std::string loss_log_row(const StepRecord& record);

/// Optimizer loop for either stage. Sampling for iteration i depends only on
/// (seed, i), so a resumed run continues exactly where it stopped.
class Trainer {
 public:
  Trainer(const RunConfig& config, std::vector<TrainingSequence> data);

  StepRecord step();
  /// Steps until train.iterations, calling `on_step` after each.
  void run(const std::function<void(const StepRecord&)>& on_step = {});

  /// Model, optimizer state and iteration.
  void save(const std::filesystem::path& path) const;
  void resume(const std::filesystem::path& path);
  /// Weights only (stage-2 initialization from stage 1).
  void load_weights(const std::filesystem::path& path);

  MoYolo& model() { return model_; }
  int iteration() const { return iteration_; }
  const RunConfig& config() const { return config_; }
  double current_lr() const;

 private:
  void apply_schedule();

  RunConfig config_;
  std::vector<TrainingSequence> data_;
  MoYolo model_{nullptr};
  std::unique_ptr<torch::optim::AdamW> optimizer_;
  int iteration_ = 0;
};

/// Builds a model from a checkpoint, using the configuration stored in it.
/// Throws CheckpointError when `expected` is given and differs.
MoYolo load_model(const std::filesystem::path& checkpoint, ModelConfig* config_out = nullptr,
                  const ModelConfig* expected = nullptr);

}  // namespace moyolo::model
