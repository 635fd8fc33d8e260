// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace moyolo {

namespace fs = std::filesystem;

namespace {

// Explicit mappings from raw engine output keep datasets identical across
// standard library implementations.
int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<int>(rng() % span);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Placement {
  int x1, y1, x2, y2;  // clipped, x2/y2 exclusive
};

// Geometry of an object at `frame`, or nothing if it is not alive.
bool placement(const SyntheticObject& o, int frame, int width, int height, Placement& out) {
  if (frame < o.first_frame || frame > o.last_frame) return false;
  const int dt = frame - o.first_frame;
  // Alive only while the center stays inside the image, from spawn onward.
  for (int t = 0; t <= dt; ++t) {
    const int l = o.left + o.vx * t;
    const int tp = o.top + o.vy * t;
    const int cx2 = 2 * l + o.width;
    const int cy2 = 2 * tp + o.height;
    if (cx2 < 0 || cy2 < 0 || cx2 > 2 * width || cy2 > 2 * height) return false;
  }
  const int l = o.left + o.vx * dt;
  const int tp = o.top + o.vy * dt;
  out = {std::max(0, l), std::max(0, tp), std::min(width, l + o.width), std::min(height, tp + o.height)};
  return out.x2 > out.x1 && out.y2 > out.y1;
}

bool occluded(const SyntheticScene& scene, std::int64_t id, int frame) {
  for (const auto& e : scene.occlusions)
    if (e.id == id && frame >= e.first_frame && frame <= e.last_frame) return true;
  return false;
}

void validate(const SyntheticScene& scene) {
  if (scene.frame_count <= 0) throw std::invalid_argument("synthetic scene: zero frames");
  if (scene.objects.empty()) throw std::invalid_argument("synthetic scene: zero objects");
  if (scene.width <= 0 || scene.height <= 0) throw std::invalid_argument("synthetic scene: bad image size");
  for (const auto& o : scene.objects) {
    if (o.id < 1) throw std::invalid_argument("synthetic scene: identities must be >= 1");
    if (o.width <= 0 || o.height <= 0) throw std::invalid_argument("synthetic scene: object without extent");
    const int cx2 = 2 * o.left + o.width, cy2 = 2 * o.top + o.height;
    if (cx2 < 0 || cy2 < 0 || cx2 > 2 * scene.width || cy2 > 2 * scene.height) {
      throw std::invalid_argument("synthetic scene: object " + std::to_string(o.id) + " starts outside the image");
    }
  }
}

}  // namespace

SyntheticScene random_scene(std::uint64_t seed, const SceneOptions& opt) {
  std::mt19937_64 rng(seed);
  SyntheticScene scene;
  scene.seed = seed;
  scene.width = opt.width;
  scene.height = opt.height;
  scene.frame_count = opt.frame_count;
  const int n = uniform_int(rng, opt.min_objects, opt.max_objects);
  for (int i = 0; i < n; ++i) {
    SyntheticObject o;
    o.id = i + 1;
    o.width = std::min(uniform_int(rng, opt.min_width, opt.max_width), opt.width);
    o.height = std::min(uniform_int(rng, opt.min_height, opt.max_height), opt.height);
    o.left = uniform_int(rng, 0, opt.width - o.width);
    o.top = uniform_int(rng, 0, opt.height - o.height);
    o.vx = uniform_int(rng, -opt.max_speed, opt.max_speed);
    o.vy = uniform_int(rng, -opt.max_speed / 2, opt.max_speed / 2);
    o.first_frame = 1;
    if (uniform01(rng) < opt.late_birth_probability) o.first_frame = uniform_int(rng, 2, std::max(2, opt.frame_count / 2));
    o.last_frame = opt.frame_count;
    if (uniform01(rng) < opt.early_death_probability) {
      o.last_frame = uniform_int(rng, std::min(o.first_frame + 5, opt.frame_count), opt.frame_count);
    }
    const std::int64_t hue_slot = static_cast<std::int64_t>(seed % 97) * 11 + i;
    o.color = identity_color(hue_slot + 1);
    scene.objects.push_back(o);
    if (uniform01(rng) < opt.occlusion_probability && o.last_frame - o.first_frame > 10) {
      OcclusionEvent e;
      e.id = o.id;
      e.first_frame = uniform_int(rng, o.first_frame + 3, o.last_frame - 6);
      e.last_frame = e.first_frame + uniform_int(rng, 1, 3);
      scene.occlusions.push_back(e);
    }
  }
  return scene;
}

SyntheticSequence generate_synthetic(const SyntheticScene& scene, const std::string& name) {
  validate(scene);
  SyntheticSequence seq;
  seq.descriptor.name = name;
  seq.descriptor.image_dir = "img1";
  seq.descriptor.frame_rate = 30.0;
  seq.descriptor.frame_count = scene.frame_count;
  seq.descriptor.image_width = scene.width;
  seq.descriptor.image_height = scene.height;
  seq.descriptor.image_ext = ".ppm";
  seq.gt.frames.resize(static_cast<std::size_t>(scene.frame_count));

  auto objects = scene.objects;
  std::sort(objects.begin(), objects.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  std::vector<std::int64_t> owner(static_cast<std::size_t>(scene.width) * scene.height);
  for (int frame = 1; frame <= scene.frame_count; ++frame) {
    std::mt19937_64 noise(scene.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(frame));
    Image img(scene.width, scene.height);
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
      const int v = scene.background + static_cast<int>(noise() % static_cast<std::uint64_t>(2 * scene.noise_amplitude + 1)) -
                    scene.noise_amplitude;
      img.rgb[i] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    }
    std::fill(owner.begin(), owner.end(), 0);

    struct Alive {
      const SyntheticObject* object;
      Placement where;
      bool hidden;
    };
    std::vector<Alive> alive;
    for (const auto& o : objects) {
      Placement p{};
      if (!placement(o, frame, scene.width, scene.height, p)) continue;
      const bool hidden = occluded(scene, o.id, frame);
      alive.push_back({&o, p, hidden});
      if (hidden) continue;
      for (int y = p.y1; y < p.y2; ++y) {
        for (int x = p.x1; x < p.x2; ++x) {
          auto* px = img.pixel(x, y);
          px[0] = o.color[0];
          px[1] = o.color[1];
          px[2] = o.color[2];
          owner[static_cast<std::size_t>(y) * scene.width + x] = o.id;
        }
      }
    }
    for (const auto& a : alive) {
      const auto& p = a.where;
      std::size_t visible = 0;
      if (!a.hidden) {
        for (int y = p.y1; y < p.y2; ++y)
          for (int x = p.x1; x < p.x2; ++x)
            if (owner[static_cast<std::size_t>(y) * scene.width + x] == a.object->id) ++visible;
      }
      const double area = static_cast<double>(p.x2 - p.x1) * (p.y2 - p.y1);
      TrackBox b;
      b.id = a.object->id;
      b.box = {static_cast<double>(p.x1), static_cast<double>(p.y1), static_cast<double>(p.x2 - p.x1),
               static_cast<double>(p.y2 - p.y1)};
      b.score = 1.0;
      b.visibility = static_cast<double>(visible) / area;
      seq.gt.frames[frame - 1].push_back(b);
    }
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

void write_sequence(const fs::path& dir, const SyntheticSequence& seq) {
  fs::create_directories(dir / seq.descriptor.image_dir);
  write_seqinfo(dir / "seqinfo.ini", seq.descriptor);
  for (std::size_t f = 0; f < seq.frames.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.ppm", f + 1);
    write_ppm(dir / seq.descriptor.image_dir / name, seq.frames[f]);
  }
  write_gt(dir / "gt" / "gt.txt", seq.gt);
}

void write_synthetic_dataset(const fs::path& root, const DatasetOptions& options) {
  auto emit = [&](const std::string& split, int count, std::uint64_t salt) {
    for (int i = 0; i < count; ++i) {
      char name[64];
      std::snprintf(name, sizeof(name), "SYNTH-%s-%02d", split.c_str(), i + 1);
      const std::uint64_t seed = options.seed * 1000003ULL + salt * 1000ULL + static_cast<std::uint64_t>(i);
      const auto scene = random_scene(seed, options.scene);
      write_sequence(root / split / name, generate_synthetic(scene, name));
    }
  };
  emit("train", options.train_sequences, 1);
  emit("eval", options.eval_sequences, 2);
}

}  // namespace moyolo
