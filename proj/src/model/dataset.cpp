// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <stdexcept>

#include "moyolo/box.hpp"
#include "moyolo/model/opencv_loader.hpp"

namespace moyolo::model {

namespace F = torch::nn::functional;

torch::Tensor image_to_tensor(const Image& image, int width, int height) {
  auto raw = torch::from_blob(const_cast<std::uint8_t*>(image.rgb.data()), {image.height, image.width, 3}, torch::kUInt8);
  auto x = raw.permute({2, 0, 1}).to(torch::kFloat).div(255.0).unsqueeze(0);
  if (image.width != width || image.height != height) {
    x = F::interpolate(x, F::InterpolateFuncOptions()
                              .size(std::vector<std::int64_t>{height, width})
                              .mode(torch::kBilinear)
                              .align_corners(false)
                              .antialias(true));
  }
  return x.squeeze(0).clamp(0.0, 1.0);
}

torch::Tensor normalize_images(const torch::Tensor& images) { return images.to(torch::kFloat).div(255.0); }

FrameTargets frame_targets(const std::vector<TrackBox>& boxes, ImageSize image) {
  FrameTargets t;
  std::vector<float> flat;
  for (const auto& b : boxes) {
    if (b.visibility == 0.0) continue;
    const double l = std::clamp(b.box.left, 0.0, static_cast<double>(image.width));
    const double top = std::clamp(b.box.top, 0.0, static_cast<double>(image.height));
    const double r = std::clamp(b.box.left + b.box.width, 0.0, static_cast<double>(image.width));
    const double bot = std::clamp(b.box.top + b.box.height, 0.0, static_cast<double>(image.height));
    if (r - l <= 0 || bot - top <= 0) continue;
    flat.insert(flat.end(), {static_cast<float>((l + r) / 2 / image.width), static_cast<float>((top + bot) / 2 / image.height),
                             static_cast<float>((r - l) / image.width), static_cast<float>((bot - top) / image.height)});
    t.identities.push_back(b.id);
    t.labels.push_back(0);
  }
  t.boxes = torch::tensor(flat, torch::kFloat).view({-1, 4});
  return t;
}

TrainingSequence load_training_sequence(const Sequence& sequence, const ModelConfig& config) {
  const auto& d = sequence.descriptor;
  TrainingSequence out;
  out.name = d.name;
  std::vector<torch::Tensor> frames;
  for (int f = 1; f <= d.frame_count; ++f) {
    const auto img = load_image(sequence.image_path(f));
    frames.push_back(image_to_tensor(img, config.input_width, config.input_height).mul(255.0).round().to(torch::kUInt8));
    const auto& boxes = static_cast<std::size_t>(f - 1) < sequence.gt.frames.size() ? sequence.gt.frames[f - 1]
                                                                                  : std::vector<TrackBox>{};
    out.targets.push_back(frame_targets(boxes, {img.width, img.height}));
  }
  out.images = torch::stack(frames);
  return out;
}

std::vector<TrainingSequence> load_training_set(const std::filesystem::path& root, const ModelConfig& config,
                                                const std::string& split) {
  std::vector<TrainingSequence> out;
  for (const auto& s : select_split(load_sequences(root), split)) out.push_back(load_training_sequence(s, config));
  if (out.empty()) throw std::runtime_error("no sequences found below " + root.string());
  return out;
}

Augmentation sample_augmentation(std::mt19937_64& rng, double min_crop_scale, int image_width, int image_height) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Augmentation a;
  const double scale = min_crop_scale + (1.0 - min_crop_scale) * u(rng);
  const auto cw = std::clamp<std::int64_t>(std::llround(scale * image_width), 1, image_width);
  const auto ch = std::clamp<std::int64_t>(std::llround(scale * image_height), 1, image_height);
  const auto px = std::uniform_int_distribution<std::int64_t>(0, image_width - cw)(rng);
  const auto py = std::uniform_int_distribution<std::int64_t>(0, image_height - ch)(rng);
  a.x0 = static_cast<double>(px) / image_width;
  a.y0 = static_cast<double>(py) / image_height;
  a.width = static_cast<double>(cw) / image_width;
  a.height = static_cast<double>(ch) / image_height;
  a.flip_x = u(rng) < 0.5;
  a.flip_y = u(rng) < 0.5;
  std::shuffle(a.channels.begin(), a.channels.end(), rng);
  a.gain = 0.75 + 0.5 * u(rng);
  a.bias = 0.2 * u(rng) - 0.1;
  return a;
}

torch::Tensor augment_images(const torch::Tensor& images, const Augmentation& a) {
  auto x = normalize_images(images);
  const auto h = x.size(2), w = x.size(3);
  if (a.width < 1.0 || a.height < 1.0) {
    const auto px = std::llround(a.x0 * w), py = std::llround(a.y0 * h);
    const auto cw = std::llround(a.width * w), ch = std::llround(a.height * h);
    x = x.narrow(3, px, cw).narrow(2, py, ch);
    x = F::interpolate(x, F::InterpolateFuncOptions()
                              .size(std::vector<std::int64_t>{h, w})
                              .mode(torch::kBilinear)
                              .align_corners(false));
  }
  if (a.flip_x) x = x.flip({3});
  if (a.flip_y) x = x.flip({2});
  if (a.channels != std::array<std::int64_t, 3>{0, 1, 2})
    x = x.index_select(1, torch::tensor(std::vector<std::int64_t>(a.channels.begin(), a.channels.end())));
  if (a.gain != 1.0 || a.bias != 0.0) x = (x * a.gain + a.bias).clamp(0.0, 1.0);
  return x.contiguous();
}

FrameTargets augment_targets(const FrameTargets& targets, const Augmentation& a, double min_visible) {
  if (a.geometric_identity()) return targets;
  FrameTargets out;
  std::vector<float> flat;
  const auto b = targets.boxes.to(torch::kDouble).contiguous();
  const auto* p = b.data_ptr<double>();
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double cx = p[4 * i], cy = p[4 * i + 1], bw = p[4 * i + 2], bh = p[4 * i + 3];
    double x1 = (cx - bw / 2 - a.x0) / a.width, x2 = (cx + bw / 2 - a.x0) / a.width;
    double y1 = (cy - bh / 2 - a.y0) / a.height, y2 = (cy + bh / 2 - a.y0) / a.height;
    const double full = (x2 - x1) * (y2 - y1);
    x1 = std::clamp(x1, 0.0, 1.0), x2 = std::clamp(x2, 0.0, 1.0);
    y1 = std::clamp(y1, 0.0, 1.0), y2 = std::clamp(y2, 0.0, 1.0);
    const double kept = std::max(0.0, x2 - x1) * std::max(0.0, y2 - y1);
    if (kept <= 0.0 || kept < min_visible * full) continue;
    if (a.flip_x) std::tie(x1, x2) = std::pair(1.0 - x2, 1.0 - x1);
    if (a.flip_y) std::tie(y1, y2) = std::pair(1.0 - y2, 1.0 - y1);
    flat.insert(flat.end(), {static_cast<float>((x1 + x2) / 2), static_cast<float>((y1 + y2) / 2),
                             static_cast<float>(x2 - x1), static_cast<float>(y2 - y1)});
    out.identities.push_back(targets.identities[i]);
    out.labels.push_back(targets.labels[i]);
  }
  out.boxes = torch::tensor(flat, torch::kFloat).view({-1, 4}).to(targets.boxes.scalar_type());
  return out;
}

ClipSample sample_clip(std::mt19937_64& rng, const std::vector<TrainingSequence>& data, int length, int max_stride) {
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data[i].frame_count() >= length) usable.push_back(i);
  if (usable.empty()) throw std::runtime_error("no sequence has enough frames for a clip");
  ClipSample c;
  c.sequence = usable[std::uniform_int_distribution<std::size_t>(0, usable.size() - 1)(rng)];
  const auto frames = data[c.sequence].frame_count();
  int stride = std::uniform_int_distribution<int>(1, std::max(1, max_stride))(rng);
  while (stride > 1 && (length - 1) * stride + 1 > frames) --stride;
  const auto span = static_cast<std::int64_t>(length - 1) * stride + 1;
  const auto start = std::uniform_int_distribution<std::int64_t>(0, frames - span)(rng);
  for (int k = 0; k < length; ++k) c.frames.push_back(start + static_cast<std::int64_t>(k) * stride);
  return c;
}

}  // namespace moyolo::model

#ifndef MOYOLO_HAVE_OPENCV
namespace moyolo {
bool install_opencv_loader() { return false; }
}  // namespace moyolo
#endif
