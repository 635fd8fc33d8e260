// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <random>

#include "model_fixtures.hpp"
#include "moyolo/model/decoder.hpp"

using namespace moyolo;
using namespace moyolo::model;

namespace {

const std::vector<std::array<std::int64_t, 2>> kShapes{{4, 5}, {2, 3}};
const std::vector<std::int64_t> kOffsets{0, 20};

}  // namespace

namespace {

// Max deviation of one-hot lattice samples from the addressed cells.
double lattice_error(const std::vector<std::array<std::int64_t, 2>>& shapes, const std::vector<std::int64_t>& offsets,
                     torch::Dtype dtype) {
  torch::manual_seed(1);
  const int heads = 2, dh = 3, k = 2;
  const auto levels = static_cast<std::int64_t>(shapes.size());
  std::int64_t tokens = 0;
  for (const auto& [h, w] : shapes) tokens += h * w;
  auto value = torch::randn({1, tokens, heads, dh}, dtype);
  double worst = 0;
  for (std::int64_t level = 0; level < levels; ++level) {
    const auto [h, w] = shapes[level];
    for (std::int64_t row = 0; row < h; ++row) {
      for (std::int64_t col = 0; col < w; ++col) {
        auto loc = torch::rand({1, 1, heads, levels, k, 2}, dtype);
        auto weights = torch::zeros({1, 1, heads, levels, k}, dtype);
        for (int hd = 0; hd < heads; ++hd) {
          loc[0][0][hd][level][1][0] = (col + 0.5) / static_cast<double>(w);
          loc[0][0][hd][level][1][1] = (row + 0.5) / static_cast<double>(h);
          weights[0][0][hd][level][1] = 1.0;
        }
        auto out = ms_deform_attn_sample(value, shapes, offsets, loc, weights).view({heads, dh});
        const auto cell = offsets[level] + row * w + col;
        worst = std::max(worst, (out - value[0][cell]).abs().max().item<double>());
      }
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("one-hot weight on a lattice point returns that cell") {
  // Dyadic shapes keep every coordinate transform exact in single precision.
  CHECK(lattice_error({{8, 8}, {4, 2}}, {0, 64}, torch::kFloat) == 0.0);
  // Other shapes round the normalized coordinate; double keeps it negligible.
  CHECK(lattice_error(kShapes, kOffsets, torch::kDouble) < 1e-12);
}

TEST_CASE("zero offsets and uniform weights give the bilinear sample at the reference") {
  // Single level 3 x 4, reference point (x, y) = (0.3, 0.55):
  // pixel coordinates px = 0.3 * 4 - 0.5 = 0.7, py = 0.55 * 3 - 0.5 = 1.15.
  torch::manual_seed(4);
  const int d = 4;
  MsDeformAttn attn(d, 1, 1, 2);
  attn->to(torch::kDouble);
  {
    torch::NoGradGuard guard;
    attn->sampling_offsets->weight.zero_();
    attn->sampling_offsets->bias.zero_();
    attn->attention_weights->weight.zero_();
    attn->attention_weights->bias.zero_();
    attn->value_proj->weight.copy_(torch::eye(d, torch::kDouble));
    attn->value_proj->bias.zero_();
    attn->output_proj->weight.copy_(torch::eye(d, torch::kDouble));
    attn->output_proj->bias.zero_();
  }
  EncoderMemory m;
  m.memory = torch::randn({1, 12, d}, torch::kDouble);
  m.shapes = {{3, 4}};
  m.offsets = {0};
  auto ref = torch::tensor({0.3, 0.55, 0.2, 0.2}, torch::kDouble).view({1, 1, 4});
  auto out = attn(torch::randn({1, 1, d}, torch::kDouble), ref, m).view({-1});

  const double fx = 0.7, fy = 0.15;  // fractional parts; neighbors cols 0..1, rows 1..2
  auto cell = [&](int r, int c) { return m.memory[0][r * 4 + c]; };
  auto expected = (1 - fx) * (1 - fy) * cell(1, 0) + fx * (1 - fy) * cell(1, 1) + (1 - fx) * fy * cell(2, 0) +
                  fx * fy * cell(2, 1);
  CHECK((out - expected).abs().max().item<double>() < 1e-12);
}

TEST_CASE("sampling weights are normalized per head") {
  torch::manual_seed(5);
  MsDeformAttn attn(16, 4, 3, 4);
  {
    torch::NoGradGuard guard;
    attn->attention_weights->weight.normal_(0, 1);
  }
  EncoderMemory m = flatten_levels({torch::randn({2, 16, 8, 8}), torch::randn({2, 16, 4, 4}), torch::randn({2, 16, 2, 2})});
  DeformAttnTrace trace;
  attn(torch::randn({2, 7, 16}), torch::rand({2, 7, 4}), m, &trace);
  CHECK((trace.weights.sum({3, 4}) - 1).abs().max().item<double>() < 1e-6);
}

TEST_CASE("reference boxes outside the unit square are rejected") {
  MsDeformAttn attn(8, 2, 3, 2);
  EncoderMemory m = flatten_levels({torch::randn({1, 8, 4, 4}), torch::randn({1, 8, 2, 2}), torch::randn({1, 8, 1, 1})});
  auto ref = torch::full({1, 1, 4}, 0.5);
  ref[0][0][0] = 1.2;
  CHECK_THROWS_AS(attn(torch::randn({1, 1, 8}), ref, m), std::invalid_argument);
}

TEST_CASE("gradient with respect to sampling offsets matches central differences") {
  const int heads = 2, levels = 2, k = 3, dh = 2;
  const double eps = 1e-3;
  torch::manual_seed(8);
  auto value = torch::randn({1, 26, heads, dh}, torch::kDouble);
  auto weights = torch::softmax(torch::randn({1, 3, heads, levels * k}, torch::kDouble), -1).view({1, 3, heads, levels, k});
  auto ref = torch::rand({1, 3, 4}, torch::kDouble) * 0.5 + 0.25;
  auto center = ref.narrow(-1, 0, 2).view({1, 3, 1, 1, 1, 2});
  auto size = ref.narrow(-1, 2, 2).view({1, 3, 1, 1, 1, 2});
  auto readout_weights = torch::randn({1, 3, heads * dh}, torch::kDouble);

  // Draw offsets whose sampling points keep clear of the pixel-center lattice
  // (where bilinear interpolation has kinks) by more than the probe step.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  auto off = torch::zeros({1, 3, heads, levels, k, 2}, torch::kDouble);
  auto oa = off.accessor<double, 6>();
  auto ca = center.accessor<double, 6>();
  auto sa = size.accessor<double, 6>();
  for (int q = 0; q < 3; ++q)
    for (int h = 0; h < heads; ++h)
      for (int l = 0; l < levels; ++l)
        for (int p = 0; p < k; ++p)
          for (int axis = 0; axis < 2; ++axis) {
            const double extent = static_cast<double>(axis == 0 ? kShapes[l][1] : kShapes[l][0]);
            const double step = sa[0][q][0][0][0][axis] * 0.5 / k;  // location change per unit offset
            for (;;) {
              const double o = u(rng);
              const double pix = (ca[0][q][0][0][0][axis] + o * step) * extent - 0.5;
              if (std::fabs(pix - std::round(pix)) > 4 * eps * step * extent + 1e-3) {
                oa[0][q][h][l][p][axis] = o;
                break;
              }
            }
          }

  auto readout = [&](const torch::Tensor& o) {
    auto loc = center + o / k * size * 0.5;
    return (ms_deform_attn_sample(value, kShapes, kOffsets, loc, weights) * readout_weights).sum();
  };
  auto leaf = off.clone().requires_grad_(true);
  readout(leaf).backward();
  auto grad = leaf.grad().view({-1});
  std::vector<double> analytic, numeric;
  for (std::int64_t i = 0; i < off.numel(); ++i) {
    analytic.push_back(grad[i].item<double>());
    numeric.push_back(fixture::central_difference(off, i, eps, [&] { return readout(off).item<double>(); }));
  }
  CHECK(fixture::relative_error(analytic, numeric) < 1e-4);
}
