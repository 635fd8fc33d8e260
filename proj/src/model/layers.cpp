// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/layers.hpp"

#include <cmath>

namespace moyolo::model {

namespace F = torch::nn::functional;

ConvBnActImpl::ConvBnActImpl(int in, int out, int kernel, int stride, bool act) : act(act) {
  conv = register_module(
      "conv", torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, kernel).stride(stride).padding(kernel / 2).bias(false)));
  bn = register_module("bn", torch::nn::BatchNorm2d(torch::nn::BatchNorm2dOptions(out).eps(1e-3).momentum(0.03)));
}

torch::Tensor ConvBnActImpl::forward(const torch::Tensor& x) {
  auto y = bn(conv(x));
  return act ? F::silu(y) : y;
}

BottleneckImpl::BottleneckImpl(int channels, bool shortcut) : shortcut(shortcut) {
  cv1 = register_module("cv1", ConvBnAct(channels, channels, 3));
  cv2 = register_module("cv2", ConvBnAct(channels, channels, 3));
}

torch::Tensor BottleneckImpl::forward(const torch::Tensor& x) {
  auto y = cv2(cv1(x));
  return shortcut ? x + y : y;
}

C2fImpl::C2fImpl(int in, int out, int n, bool shortcut) : hidden(out / 2) {
  cv1 = register_module("cv1", ConvBnAct(in, 2 * hidden, 1));
  cv2 = register_module("cv2", ConvBnAct((2 + n) * hidden, out, 1));
  blocks = register_module("blocks", torch::nn::ModuleList());
  for (int i = 0; i < n; ++i) blocks->push_back(Bottleneck(hidden, shortcut));
}

torch::Tensor C2fImpl::forward(const torch::Tensor& x) {
  auto parts = cv1(x).chunk(2, 1);
  std::vector<torch::Tensor> ys{parts[0], parts[1]};
  for (const auto& block : *blocks) ys.push_back(block->as<Bottleneck>()->forward(ys.back()));
  return cv2(torch::cat(ys, 1));
}

SppfImpl::SppfImpl(int in, int out, int kernel) : kernel(kernel) {
  cv1 = register_module("cv1", ConvBnAct(in, in / 2, 1));
  cv2 = register_module("cv2", ConvBnAct(in / 2 * 4, out, 1));
}

torch::Tensor SppfImpl::forward(const torch::Tensor& x) {
  const auto pool = F::MaxPool2dFuncOptions(kernel).stride(1).padding(kernel / 2);
  auto a = cv1(x);
  auto b = F::max_pool2d(a, pool);
  auto c = F::max_pool2d(b, pool);
  auto d = F::max_pool2d(c, pool);
  return cv2(torch::cat({a, b, c, d}, 1));
}

MlpImpl::MlpImpl(int in, int hidden, int out, int layers) {
  linears = register_module("linears", torch::nn::ModuleList());
  for (int i = 0; i < layers; ++i) {
    const int a = i == 0 ? in : hidden;
    const int b = i == layers - 1 ? out : hidden;
    linears->push_back(torch::nn::Linear(a, b));
  }
}

torch::Tensor MlpImpl::forward(torch::Tensor x) {
  const auto n = linears->size();
  for (std::size_t i = 0; i < n; ++i) {
    x = linears[i]->as<torch::nn::Linear>()->forward(x);
    if (i + 1 < n) x = torch::relu(x);
  }
  return x;
}

MultiHeadAttentionImpl::MultiHeadAttentionImpl(int dim, int heads) : dim(dim), heads(heads) {
  TORCH_CHECK(dim % heads == 0, "attention dim ", dim, " not divisible by ", heads, " heads");
  q_proj = register_module("q_proj", torch::nn::Linear(dim, dim));
  k_proj = register_module("k_proj", torch::nn::Linear(dim, dim));
  v_proj = register_module("v_proj", torch::nn::Linear(dim, dim));
  out_proj = register_module("out_proj", torch::nn::Linear(dim, dim));
  for (auto* l : {&q_proj, &k_proj, &v_proj, &out_proj}) {
    torch::nn::init::xavier_uniform_((*l)->weight);
    torch::nn::init::zeros_((*l)->bias);
  }
}

torch::Tensor MultiHeadAttentionImpl::forward(const torch::Tensor& query, const torch::Tensor& key,
                                              const torch::Tensor& value, torch::Tensor* weights) {
  const auto b = query.size(0), nq = query.size(1), nk = key.size(1);
  const int dh = dim / heads;
  auto q = q_proj(query).view({b, nq, heads, dh}).transpose(1, 2);
  auto k = k_proj(key).view({b, nk, heads, dh}).transpose(1, 2);
  auto v = v_proj(value).view({b, nk, heads, dh}).transpose(1, 2);
  auto attn = torch::softmax(torch::matmul(q, k.transpose(-2, -1)) / std::sqrt(static_cast<double>(dh)), -1);
  if (weights) *weights = attn;
  auto out = torch::matmul(attn, v).transpose(1, 2).reshape({b, nq, dim});
  return out_proj(out);
}

FeedForwardImpl::FeedForwardImpl(int dim, int hidden) {
  linear1 = register_module("linear1", torch::nn::Linear(dim, hidden));
  linear2 = register_module("linear2", torch::nn::Linear(hidden, dim));
}

torch::Tensor FeedForwardImpl::forward(const torch::Tensor& x) { return linear2(torch::relu(linear1(x))); }

torch::Tensor inverse_sigmoid(const torch::Tensor& x, double eps) {
  auto c = x.clamp(0.0, 1.0);
  return torch::log(c.clamp_min(eps) / (1 - c).clamp_min(eps));
}

void zero_parameters(torch::nn::Module& module) {
  torch::NoGradGuard guard;
  for (auto& p : module.parameters()) p.zero_();
}

int scaled_channels(int channels, double width_multiple) {
  const int c = static_cast<int>(std::lround(channels * width_multiple / 8.0)) * 8;
  return std::max(8, c);
}

int scaled_depth(int depth, double depth_multiple) {
  return std::max(1, static_cast<int>(std::lround(depth * depth_multiple)));
}

}  // namespace moyolo::model
