// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "moyolo/image.hpp"
#include "moyolo/mot_io.hpp"

namespace moyolo {

/// A rectangle moving at constant integer velocity (pixels per frame).
struct SyntheticObject {
  std::int64_t id = 0;
  int first_frame = 1;
  int last_frame = 1;  // scheduled despawn; leaving the image ends the life earlier
  int left = 0, top = 0, width = 1, height = 1;  // geometry at first_frame
  int vx = 0, vy = 0;
  std::array<std::uint8_t, 3> color{255, 255, 255};
};

/// Frames during which an object is hidden; its ground truth persists with
/// visibility 0.
struct OcclusionEvent {
  std::int64_t id = 0;
  int first_frame = 1;
  int last_frame = 1;
};

struct SyntheticScene {
  std::uint64_t seed = 0;
  int width = 640;
  int height = 640;
  int frame_count = 60;
  int background = 110;
  int noise_amplitude = 24;
  std::vector<SyntheticObject> objects;
  std::vector<OcclusionEvent> occlusions;
};

struct SceneOptions {
  int width = 640;
  int height = 640;
  int frame_count = 60;
  int min_objects = 4;
  int max_objects = 8;
  int min_width = 40, max_width = 100;
  int min_height = 80, max_height = 180;
  int max_speed = 4;
  double late_birth_probability = 0.3;
  double early_death_probability = 0.25;
  double occlusion_probability = 0.15;
};

/// Randomized but fully seed-determined scene.
SyntheticScene random_scene(std::uint64_t seed, const SceneOptions& options = {});

struct SyntheticSequence {
  SequenceDescriptor descriptor;
  std::vector<Image> frames;
  Tracks gt;
};

/// Renders the scene: filled rectangles over a noisy gray background, later
/// identities drawn on top. Ground truth is the rendered (image-clipped)
/// rectangle; visibility is the unoccluded fraction of it.
SyntheticSequence generate_synthetic(const SyntheticScene& scene, const std::string& name = "SYNTH");

/// Writes seqinfo.ini, img1/NNNNNN.ppm and gt/gt.txt below `dir`.
void write_sequence(const std::filesystem::path& dir, const SyntheticSequence& sequence);

struct DatasetOptions {
  std::uint64_t seed = 7;
  int train_sequences = 12;
  int eval_sequences = 8;
  SceneOptions scene;
};

/// Writes `train/` and `eval/` MOTChallenge-style trees under `root`.
void write_synthetic_dataset(const std::filesystem::path& root, const DatasetOptions& options);

}  // namespace moyolo
