// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include "model_fixtures.hpp"
#include "moyolo/model/queries.hpp"

using namespace moyolo;
using namespace moyolo::model;

TEST_CASE("detect queries are shared across frames and seeded") {
  torch::manual_seed(9);
  DetectQueries a(60, 32);
  const auto f1 = a->forward(), f2 = a->forward();
  CHECK(f1.size() == 60);
  CHECK(torch::equal(f1.embeddings, f2.embeddings));
  CHECK(torch::equal(f1.boxes, f2.boxes));
  for (const auto& e : f1.entries) {
    CHECK(e.kind == QueryKind::Detect);
    CHECK_FALSE(e.identity.has_value());
    CHECK_FALSE(e.score.has_value());
  }
  torch::manual_seed(9);
  DetectQueries b(60, 32);
  CHECK(torch::equal(b->forward().embeddings, f1.embeddings));
  CHECK(torch::equal(b->forward().boxes, f1.boxes));
}

TEST_CASE("TAN with zero weights passes hidden states through") {
  Tan tan(8, 2, 16);
  zero_parameters(*tan);
  auto h = torch::randn({3, 8}), prev = torch::randn({3, 8});
  CHECK(torch::equal(tan(h, prev), h));
  CHECK(tan(torch::zeros({0, 8}), torch::zeros({0, 8})).size(0) == 0);
}

TEST_CASE("TAN on a single track with hand-set weights") {
  // One key: softmax weight 1, so x = h + Wo (Wv h + bv) + bo and
  // out = x + W2 relu(W1 LN(x) + b1) + b2. LayerNorm of a 2-vector maps
  // (a, b) to (+-1, -+1) times gamma plus beta (up to the variance epsilon).
  Tan tan(2, 1, 2);
  tan->to(torch::kDouble);
  const double h[2] = {0.4, -1.3}, prev[2] = {2.0, 0.5};
  const double wv[2][2] = {{0.5, -0.2}, {0.1, 0.3}}, bv[2] = {0.05, -0.1};
  const double wo[2][2] = {{1.0, 0.4}, {-0.6, 0.2}}, bo[2] = {0.2, 0.0};
  const double w1[2][2] = {{0.7, -0.3}, {0.2, 0.9}}, b1[2] = {0.1, -0.4};
  const double w2[2][2] = {{0.5, 0.5}, {-1.0, 0.25}}, b2[2] = {0.0, 0.3};
  {
    torch::NoGradGuard guard;
    auto set2 = [](torch::Tensor t, const double m[2][2]) {
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) t[i][j] = m[i][j];
    };
    auto set1 = [](torch::Tensor t, const double v[2]) {
      for (int i = 0; i < 2; ++i) t[i] = v[i];
    };
    set2(tan->attn->v_proj->weight, wv);
    set1(tan->attn->v_proj->bias, bv);
    set2(tan->attn->out_proj->weight, wo);
    set1(tan->attn->out_proj->bias, bo);
    set2(tan->ffn->linear1->weight, w1);
    set1(tan->ffn->linear1->bias, b1);
    set2(tan->ffn->linear2->weight, w2);
    set1(tan->ffn->linear2->bias, b2);
  }
  auto out = tan(torch::tensor({h[0], h[1]}, torch::kDouble).view({1, 2}),
                 torch::tensor({prev[0], prev[1]}, torch::kDouble).view({1, 2}));

  double v[2], x[2];
  for (int i = 0; i < 2; ++i) v[i] = wv[i][0] * h[0] + wv[i][1] * h[1] + bv[i];
  for (int i = 0; i < 2; ++i) x[i] = h[i] + wo[i][0] * v[0] + wo[i][1] * v[1] + bo[i];
  const double mean = (x[0] + x[1]) / 2, var = (x[0] - mean) * (x[0] - mean);
  const double n[2] = {(x[0] - mean) / std::sqrt(var + 1e-5), (x[1] - mean) / std::sqrt(var + 1e-5)};
  double hid[2];
  for (int i = 0; i < 2; ++i) hid[i] = std::max(0.0, w1[i][0] * n[0] + w1[i][1] * n[1] + b1[i]);
  for (int i = 0; i < 2; ++i) {
    const double expected = x[i] + w2[i][0] * hid[0] + w2[i][1] * hid[1] + b2[i];
    CHECK(out[0][i].item<double>() == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("TAN is permutation equivariant") {
  torch::manual_seed(4);
  Tan tan(16, 4, 32);
  tan->to(torch::kDouble);
  auto h = torch::randn({5, 16}, torch::kDouble), prev = torch::randn({5, 16}, torch::kDouble);
  auto perm = torch::tensor({3, 0, 4, 1, 2}, torch::kLong);
  auto a = tan(h, prev).index_select(0, perm);
  auto b = tan(h.index_select(0, perm), prev.index_select(0, perm));
  CHECK((a - b).abs().max().item<double>() < 1e-12);
}

TEST_CASE("propagation promotes, keeps and aggregates") {
  torch::manual_seed(6);
  const int d = 8;
  Tan tan(d, 2, 16);
  QuerySet q;
  q.entries.resize(3);
  q.embeddings = torch::randn({3, d});
  q.boxes = torch::rand({3, 4});
  DecoderOutput out;
  out.logits = torch::randn({2, 1, 3, 1});
  out.boxes = torch::rand({2, 1, 3, 4});
  out.hidden = torch::randn({1, 3, d});
  IdentityAllocator ids;
  const std::vector<double> scores{0.9, 0.6, 0.1};
  auto p = propagate(q, out, scores, Thresholds{}, ids, tan, true);
  REQUIRE(p.next.size() == 2);
  CHECK(*p.next.entries[0].identity == 1);
  CHECK(*p.next.entries[1].identity == 2);
  auto idx = torch::tensor({0, 1}, torch::kLong);
  CHECK(torch::equal(p.next.boxes, out.boxes[-1][0].index_select(0, idx)));
  CHECK(torch::allclose(p.next.embeddings, tan(out.hidden[0].index_select(0, idx), q.embeddings.index_select(0, idx))));

  // Next frame: both tracks plus three detect queries.
  QuerySet detects;
  detects.entries.resize(3);
  detects.embeddings = torch::randn({3, d});
  detects.boxes = torch::rand({3, 4});
  auto q2 = QuerySet::concat(p.next, detects);
  CHECK(q2.track_count() == 2);
  DecoderOutput out2;
  out2.logits = torch::randn({2, 1, 5, 1});
  out2.boxes = torch::rand({2, 1, 5, 4});
  out2.hidden = torch::randn({1, 5, d});
  auto p2 = propagate(q2, out2, std::vector<double>{0.2, 0.8, 0.7, 0.4, 0.9}, Thresholds{}, ids, tan, true);
  CHECK(p2.next.size() == 4);
  CHECK(p2.plan.kept_tracks == 2);
  CHECK(p2.next.entries[0].miss_count == 1);
  CHECK(*p2.next.entries[2].identity == 3);
  CHECK(*p2.next.entries[3].identity == 4);
}

TEST_CASE("emitted tracks are filtered, sorted and in pixels") {
  QuerySet q;
  q.entries.resize(3);
  const std::int64_t ids[] = {5, 2, 9};
  const double scores[] = {0.9, 0.7, 0.3};
  for (int i = 0; i < 3; ++i) {
    q.entries[i].kind = QueryKind::Track;
    q.entries[i].identity = ids[i];
    q.entries[i].score = scores[i];
  }
  q.boxes = torch::tensor({0.5f, 0.5f, 0.25f, 0.5f, 0.1f, 0.2f, 0.1f, 0.1f, 0.3f, 0.3f, 0.1f, 0.1f}).view({3, 4});
  q.embeddings = torch::zeros({3, 4});
  const auto out = emit_tracks(q, {640, 480}, 0.5);
  REQUIRE(out.size() == 2);
  CHECK(out[0].id == 2);
  CHECK(out[1].id == 5);
  CHECK(out[1].box.left == doctest::Approx(240.0));
  CHECK(out[1].box.top == doctest::Approx(120.0));
  CHECK(out[1].box.width == doctest::Approx(160.0));
  CHECK(out[1].box.height == doctest::Approx(240.0));
  CHECK(emit_tracks(QuerySet::empty(4, torch::kFloat), {640, 480}, 0.5).empty());
}
