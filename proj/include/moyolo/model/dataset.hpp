// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "moyolo/config.hpp"
#include "moyolo/image.hpp"
#include "moyolo/model/criterion.hpp"
#include "moyolo/mot_io.hpp"

namespace moyolo::model {

/// Frames resized to the network input plus normalized targets.
struct TrainingSequence {
  std::string name;
  torch::Tensor images;  // [F, 3, H, W] uint8
  std::vector<FrameTargets> targets;

  std::int64_t frame_count() const { return images.size(0); }
};

/// [3, height, width] float in [0, 1], resized with antialiased bilinear filtering.
torch::Tensor image_to_tensor(const Image& image, int width, int height);

/// uint8 [.., 3, H, W] -> float in [0, 1].
torch::Tensor normalize_images(const torch::Tensor& images);

/// Visible ground truth of one frame as normalized cxcywh boxes (class 0).
/// Boxes with visibility exactly 0 are hidden and left out.
FrameTargets frame_targets(const std::vector<TrackBox>& boxes, ImageSize image);

TrainingSequence load_training_sequence(const Sequence& sequence, const ModelConfig& config);

/// Every sequence directory below `root` (see load_sequences), restricted to
/// `split` (see select_split).
std::vector<TrainingSequence> load_training_set(const std::filesystem::path& root, const ModelConfig& config,
                                                const std::string& split = "all");

/// Jitter shared by every frame of one training sample: crop window, flips,
/// channel order and an affine intensity change.
struct Augmentation {
  double x0 = 0.0, y0 = 0.0, width = 1.0, height = 1.0;  // normalized crop window
  bool flip_x = false, flip_y = false;
  std::array<std::int64_t, 3> channels{0, 1, 2};
  double gain = 1.0, bias = 0.0;  // applied to [0, 1] intensities

  bool geometric_identity() const { return x0 == 0 && y0 == 0 && width == 1 && height == 1 && !flip_x && !flip_y; }
};

/// Crop side in [min_crop_scale, 1] of the image, snapped to whole pixels of
/// a `image_width` x `image_height` frame.
Augmentation sample_augmentation(std::mt19937_64& rng, double min_crop_scale, int image_width, int image_height);

/// uint8 [T, 3, H, W] -> float [T, 3, H, W] in [0, 1].
torch::Tensor augment_images(const torch::Tensor& images, const Augmentation& a);

/// Boxes mapped into the augmented frame; boxes keeping less than
/// `min_visible` of their area inside the crop are dropped.
FrameTargets augment_targets(const FrameTargets& targets, const Augmentation& a, double min_visible = 0.5);

/// Frame indices (0-based) of one clip.
struct ClipSample {
  std::size_t sequence = 0;
  std::vector<std::int64_t> frames;
};

/// Uniform sequence, stride uniform in {1..max_stride} (reduced until the
/// clip fits), uniform start.
ClipSample sample_clip(std::mt19937_64& rng, const std::vector<TrainingSequence>& data, int length, int max_stride);

}  // namespace moyolo::model
