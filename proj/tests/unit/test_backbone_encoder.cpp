// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <random>

#include "model_fixtures.hpp"
#include "moyolo/model/encoder.hpp"

using namespace moyolo;
using namespace moyolo::model;

TEST_CASE("pyramid stride geometry") {
  torch::NoGradGuard guard;
  ModelConfig c = fixture::tiny_config();
  FeatureExtractor fx(c);
  auto p = fx(torch::rand({1, 3, 640, 640}));
  CHECK(p.maps[0].sizes() == torch::IntArrayRef{1, 16, 80, 80});
  CHECK(p.maps[1].sizes() == torch::IntArrayRef{1, 16, 40, 40});
  CHECK(p.maps[2].sizes() == torch::IntArrayRef{1, 16, 20, 20});

  p = fx(torch::rand({2, 3, 256, 320}));
  CHECK(p.maps[0].sizes().slice(2) == torch::IntArrayRef{32, 40});
  CHECK(p.maps[1].sizes().slice(2) == torch::IntArrayRef{16, 20});
  CHECK(p.maps[2].sizes().slice(2) == torch::IntArrayRef{8, 10});

  CHECK_THROWS_AS(fx(torch::rand({1, 3, 100, 64})), std::invalid_argument);
  CHECK_THROWS_AS(fx(torch::rand({1, 1, 64, 64})), std::invalid_argument);
}

TEST_CASE("width and depth multipliers keep the stride geometry") {
  torch::NoGradGuard guard;
  for (double m : {0.25, 0.5, 2.0}) {
    ModelConfig c = fixture::tiny_config();
    c.width_multiple = m;
    c.depth_multiple = m;
    FeatureExtractor fx(c);
    auto p = fx(torch::rand({1, 3, 96, 128}));
    CHECK(p.maps[0].sizes().slice(2) == torch::IntArrayRef{12, 16});
    CHECK(p.maps[2].sizes().slice(2) == torch::IntArrayRef{3, 4});
  }
}

TEST_CASE("feature extraction is deterministic") {
  torch::NoGradGuard guard;
  torch::manual_seed(3);
  FeatureExtractor a(fixture::tiny_config());
  torch::manual_seed(3);
  FeatureExtractor b(fixture::tiny_config());
  a->eval();
  b->eval();
  auto x = torch::rand({1, 3, 64, 96});
  const auto pa = a(x), pa2 = a(x), pb = b(x);
  for (int i = 0; i < 3; ++i) {
    CHECK(torch::equal(pa.maps[i], pa2.maps[i]));
    CHECK(torch::equal(pa.maps[i], pb.maps[i]));
  }
}

TEST_CASE("feature extractor gradient matches finite differences") {
  torch::manual_seed(11);
  FeatureExtractor fx(fixture::tiny_config());
  fx->to(torch::kDouble);
  auto x = torch::rand({2, 3, 64, 64}, torch::kDouble);
  auto readout = [&] {
    auto p = fx(x);
    return (p.maps[0].sum() + p.maps[1].sum() + p.maps[2].sum());
  };
  fx->zero_grad();
  readout().backward();
  std::mt19937_64 rng(1);
  std::vector<double> analytic, numeric;
  for (auto& named : fx->named_parameters()) {
    auto& p = named.value();
    if (p.dim() < 2) continue;  // convolution weights
    const auto idx = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(p.numel()));
    analytic.push_back(p.grad().view({-1})[idx].item<double>());
    numeric.push_back(fixture::central_difference(p, idx, 1e-6, [&] { return readout().item<double>(); }));
  }
  REQUIRE(analytic.size() > 10);
  CHECK(fixture::relative_error(analytic, numeric) < 1e-3);
}

TEST_CASE("sine position embedding") {
  const auto a = sine_position_embedding(5, 7, 16);
  CHECK(a.sizes() == torch::IntArrayRef{35, 16});
  CHECK(a.min().item<double>() >= -1.0);
  CHECK(a.max().item<double>() <= 1.0);
  CHECK(torch::equal(a, sine_position_embedding(5, 7, 16)));
  for (int i = 0; i < 4; ++i) {
    CHECK(a[0][i].item<double>() == 0.0);       // sin(x w_i) at x = 0
    CHECK(a[0][8 + i].item<double>() == 0.0);   // sin(y w_i) at y = 0
    CHECK(a[0][4 + i].item<double>() == 1.0);   // cos(0)
  }
  // Position (row 1, col 2): x = 2, y = 1.
  CHECK(a[9][0].item<double>() == doctest::Approx(std::sin(2.0)));
  CHECK(a[9][8].item<double>() == doctest::Approx(std::sin(1.0)));
  CHECK_THROWS_AS(sine_position_embedding(2, 2, 6), std::invalid_argument);
}

TEST_CASE("encoder memory length and level offsets") {
  torch::NoGradGuard guard;
  ModelConfig c = fixture::tiny_config();
  FeatureExtractor fx(c);
  HybridEncoder enc(c, fx->out_channels);
  auto m = enc(fx(torch::rand({1, 3, 640, 640})));
  CHECK(m.length() == 8400);
  CHECK(m.offsets == std::vector<std::int64_t>{0, 6400, 8000});
  CHECK(m.memory.size(2) == c.hidden_dim);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const int h = 32 * static_cast<int>(2 + rng() % 6), w = 32 * static_cast<int>(2 + rng() % 6);
    auto mm = enc(fx(torch::rand({1, 3, h, w})));
    std::int64_t offset = 0;
    for (int l = 0; l < 3; ++l) {
      const int s = kPyramidStrides[l];
      CHECK(mm.shapes[l] == std::array<std::int64_t, 2>{h / s, w / s});
      CHECK(mm.offsets[l] == offset);
      offset += static_cast<std::int64_t>(h / s) * (w / s);
    }
    CHECK(mm.length() == offset);
  }
}

TEST_CASE("encoder attention rows are stochastic") {
  torch::NoGradGuard guard;
  ModelConfig c = fixture::tiny_config();
  FeatureExtractor fx(c);
  HybridEncoder enc(c, fx->out_channels);
  torch::Tensor weights;
  enc->forward(fx(torch::rand({2, 3, 128, 96})), &weights);
  REQUIRE(weights.defined());
  CHECK(weights.size(-1) == 12);  // 4 x 3 tokens at stride 32
  CHECK((weights.sum(-1) - 1).abs().max().item<double>() < 1e-6);
}

TEST_CASE("attention block on a single token with identity value path") {
  // One token: softmax over one key is 1, so attention returns
  // out_proj(v_proj(x)) = x. The block then computes
  //   y1 = LN1(x + x),  y2 = LN2(y1 + W2 relu(W1 y1 + b1) + b2).
  torch::manual_seed(2);
  const int d = 4, hidden = 8;
  AifiLayer layer(d, 1, hidden);
  layer->to(torch::kDouble);
  {
    torch::NoGradGuard guard;
    layer->attn->v_proj->weight.copy_(torch::eye(d, torch::kDouble));
    layer->attn->v_proj->bias.zero_();
    layer->attn->out_proj->weight.copy_(torch::eye(d, torch::kDouble));
    layer->attn->out_proj->bias.zero_();
    for (auto* n : {&layer->norm1, &layer->norm2}) {
      (*n)->weight.uniform_(0.5, 1.5);
      (*n)->bias.uniform_(-0.5, 0.5);
    }
  }
  auto x = torch::randn({1, 1, d}, torch::kDouble);
  auto pos = sine_position_embedding(1, 1, d, 10000.0, torch::kDouble).unsqueeze(0);
  auto out = layer(x, pos).view({-1});

  auto vec = [](const torch::Tensor& t) {
    auto c = t.contiguous().view({-1});
    return std::vector<double>(c.data_ptr<double>(), c.data_ptr<double>() + c.numel());
  };
  auto layer_norm = [&](const std::vector<double>& v, const torch::nn::LayerNorm& n) {
    double mean = 0, var = 0;
    for (double e : v) mean += e;
    mean /= v.size();
    for (double e : v) var += (e - mean) * (e - mean);
    var /= v.size();
    const auto g = vec(n->weight), b = vec(n->bias);
    std::vector<double> o(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) o[i] = (v[i] - mean) / std::sqrt(var + 1e-5) * g[i] + b[i];
    return o;
  };
  const auto xs = vec(x);
  std::vector<double> s(d);
  for (int i = 0; i < d; ++i) s[i] = 2 * xs[i];
  const auto y1 = layer_norm(s, layer->norm1);
  const auto w1 = vec(layer->ffn->linear1->weight), b1 = vec(layer->ffn->linear1->bias);
  const auto w2 = vec(layer->ffn->linear2->weight), b2 = vec(layer->ffn->linear2->bias);
  std::vector<double> hdn(hidden), r(d);
  for (int j = 0; j < hidden; ++j) {
    double a = b1[j];
    for (int i = 0; i < d; ++i) a += w1[j * d + i] * y1[i];
    hdn[j] = std::max(0.0, a);
  }
  for (int i = 0; i < d; ++i) {
    double a = b2[i];
    for (int j = 0; j < hidden; ++j) a += w2[i * hidden + j] * hdn[j];
    r[i] = y1[i] + a;
  }
  const auto expected = layer_norm(r, layer->norm2);
  for (int i = 0; i < d; ++i) CHECK(out[i].item<double>() == doctest::Approx(expected[i]).epsilon(1e-12));
}
