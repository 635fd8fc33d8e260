// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <filesystem>

#include "moyolo/metrics.hpp"
#include "moyolo/synthetic.hpp"

using namespace moyolo;
namespace fs = std::filesystem;

namespace {
SyntheticScene one_object_scene() {
  SyntheticScene s;
  s.seed = 3;
  s.width = 128;
  s.height = 96;
  s.frame_count = 10;
  SyntheticObject o;
  o.id = 1;
  o.left = 10;
  o.top = 20;
  o.width = 16;
  o.height = 30;
  o.vx = 2;
  o.last_frame = 5;
  s.objects.push_back(o);
  return s;
}
}  // namespace

TEST_CASE("same seed, same pixels and ground truth") {
  SceneOptions opt;
  opt.width = 96;
  opt.height = 96;
  opt.frame_count = 8;
  opt.min_width = 10, opt.max_width = 20, opt.min_height = 10, opt.max_height = 30;
  const auto a = generate_synthetic(random_scene(21, opt));
  const auto b = generate_synthetic(random_scene(21, opt));
  CHECK(a.frames == b.frames);
  CHECK(a.gt == b.gt);
  const auto c = generate_synthetic(random_scene(22, opt));
  CHECK_FALSE(c.frames == a.frames);
}

TEST_CASE("constant velocity kinematics and despawn schedule") {
  const auto seq = generate_synthetic(one_object_scene());
  for (int f = 1; f <= 5; ++f) {
    REQUIRE(seq.gt.frames[f - 1].size() == 1);
    CHECK(seq.gt.frames[f - 1][0].box.left == 10 + 2 * (f - 1));
    CHECK(seq.gt.frames[f - 1][0].box.top == 20);
  }
  for (int f = 6; f <= 10; ++f) CHECK(seq.gt.frames[f - 1].empty());

  // Rendered pixels match the ground truth rectangle.
  const auto& img = seq.frames[0];
  const auto* inside = img.pixel(10, 20);
  const auto* corner = img.pixel(25, 49);
  CHECK(std::equal(inside, inside + 3, corner));
}

TEST_CASE("occlusion hides pixels but keeps geometry") {
  auto scene = one_object_scene();
  scene.occlusions.push_back({1, 2, 3});
  const auto seq = generate_synthetic(scene);
  CHECK(seq.gt.frames[1].size() == 1);
  CHECK(seq.gt.frames[1][0].visibility == 0.0);
  CHECK(seq.gt.frames[0][0].visibility == 1.0);
  const auto plain = generate_synthetic(one_object_scene());
  CHECK_FALSE(seq.frames[1] == plain.frames[1]);
}

TEST_CASE("objects leaving the image despawn") {
  auto scene = one_object_scene();
  scene.objects[0].last_frame = 10;
  scene.objects[0].vx = -8;  // center x: 18, 10, 2, -6 -> gone from frame 4
  const auto seq = generate_synthetic(scene);
  CHECK(seq.gt.frames[2].size() == 1);
  CHECK(seq.gt.frames[2][0].box.left == 0);  // clipped to the image
  CHECK(seq.gt.frames[3].empty());
}

TEST_CASE("invalid scenes are rejected") {
  auto scene = one_object_scene();
  scene.frame_count = 0;
  CHECK_THROWS_AS(generate_synthetic(scene), std::invalid_argument);
  scene = one_object_scene();
  scene.objects.clear();
  CHECK_THROWS_AS(generate_synthetic(scene), std::invalid_argument);
}

TEST_CASE("written sequence reloads and self-evaluates perfectly") {
  const fs::path dir = fs::temp_directory_path() / "moyolo_synth_seq";
  fs::remove_all(dir);
  SceneOptions opt;
  opt.width = 64;
  opt.height = 64;
  opt.frame_count = 6;
  opt.min_width = 8, opt.max_width = 16, opt.min_height = 8, opt.max_height = 20;
  const auto seq = generate_synthetic(random_scene(4, opt), "S");
  write_sequence(dir, seq);
  const auto loaded = load_sequence(dir);
  CHECK(loaded.gt.box_count() == seq.gt.box_count());
  CHECK(load_image(loaded.image_path(2)) == seq.frames[1]);

  metrics::SequenceEval ev{"S", loaded.gt, loaded.gt, loaded.descriptor.image_size()};
  const auto r = metrics::evaluate(ev);
  CHECK(*r.MOTA() == 1.0);
  CHECK(*r.IDF1() == 1.0);
  CHECK(*r.HOTA() == doctest::Approx(1.0));
  fs::remove_all(dir);
}
