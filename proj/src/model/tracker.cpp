// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/tracker.hpp"

#include "moyolo/image.hpp"
#include "moyolo/model/dataset.hpp"

namespace moyolo::model {

Tracker::Tracker(MoYolo model, TrackerOptions options) : model_(std::move(model)), options_(options) { reset(); }

void Tracker::reset() {
  tracks_ = QuerySet::empty(model_->config.hidden_dim, torch::TensorOptions().dtype(torch::kFloat));
  ids_ = IdentityAllocator{};
}

std::vector<TrackBox> Tracker::step(const torch::Tensor& image, ImageSize original) {
  torch::NoGradGuard guard;
  model_->eval();
  auto memory = model_->encode(image.unsqueeze(0));
  auto q = QuerySet::concat(tracks_, model_->detect->forward());
  auto out = model_->decode(q, memory);
  auto s = out.scores()[0].to(torch::kDouble).contiguous();
  std::vector<double> scores(s.data_ptr<double>(), s.data_ptr<double>() + s.numel());
  auto prop = propagate(q, out, scores, options_.thresholds, ids_, model_->tan, true);
  auto emitted = emit_tracks(prop.next, original, options_.thresholds.emit);
  tracks_ = options_.propagate ? std::move(prop.next)
                               : QuerySet::empty(model_->config.hidden_dim, torch::TensorOptions().dtype(torch::kFloat));
  return emitted;
}

Tracks run_inference(MoYolo& model, const Sequence& sequence, const TrackerOptions& options) {
  Tracker tracker(model, options);
  const auto& cfg = model->config;
  Tracks out;
  for (int f = 1; f <= sequence.descriptor.frame_count; ++f) {
    const auto img = load_image(sequence.image_path(f));
    out.frames.push_back(tracker.step(image_to_tensor(img, cfg.input_width, cfg.input_height), {img.width, img.height}));
  }
  while (!out.frames.empty() && out.frames.back().empty()) out.frames.pop_back();
  return out;
}

}  // namespace moyolo::model
