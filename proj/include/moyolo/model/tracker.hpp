// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <vector>

#include "moyolo/model/model.hpp"
#include "moyolo/mot_io.hpp"

namespace moyolo::model {

struct TrackerOptions {
  Thresholds thresholds;
  bool propagate = true;  // off: track queries are discarded after every frame
};

/// Online tracker for one sequence: frames must arrive in order.
class Tracker {
 public:
  Tracker(MoYolo model, TrackerOptions options);

  /// `image` is [3, H, W] in [0, 1] at the network input size; boxes are
  /// returned in the pixel space of `original`.
  std::vector<TrackBox> step(const torch::Tensor& image, ImageSize original);
  void reset();

  const QuerySet& tracks() const { return tracks_; }

 private:
  MoYolo model_;
  TrackerOptions options_;
  QuerySet tracks_;
  IdentityAllocator ids_;
};

/// Tracks every frame of `sequence` from its first to its last image.
Tracks run_inference(MoYolo& model, const Sequence& sequence, const TrackerOptions& options);

}  // namespace moyolo::model
