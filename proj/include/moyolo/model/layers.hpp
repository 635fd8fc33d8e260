// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <torch/torch.h>

namespace moyolo::model {

/// Conv -> BatchNorm -> SiLU (activation optional).
struct ConvBnActImpl : torch::nn::Module {
  ConvBnActImpl(int in, int out, int kernel = 1, int stride = 1, bool act = true);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Conv2d conv{nullptr};
  torch::nn::BatchNorm2d bn{nullptr};
  bool act;
};
TORCH_MODULE(ConvBnAct);

struct BottleneckImpl : torch::nn::Module {
  BottleneckImpl(int channels, bool shortcut);
  torch::Tensor forward(const torch::Tensor& x);

  ConvBnAct cv1{nullptr}, cv2{nullptr};
  bool shortcut;
};
TORCH_MODULE(Bottleneck);

/// Split-merge CSP block: half the channels run through `n` bottlenecks and
/// every intermediate result is concatenated before the output projection.
struct C2fImpl : torch::nn::Module {
  C2fImpl(int in, int out, int n, bool shortcut);
  torch::Tensor forward(const torch::Tensor& x);

  int hidden;
  ConvBnAct cv1{nullptr}, cv2{nullptr};
  torch::nn::ModuleList blocks;
};
TORCH_MODULE(C2f);

struct SppfImpl : torch::nn::Module {
  SppfImpl(int in, int out, int kernel = 5);
  torch::Tensor forward(const torch::Tensor& x);

  ConvBnAct cv1{nullptr}, cv2{nullptr};
  int kernel;
};
TORCH_MODULE(Sppf);

/// Linear layers with ReLU between them.
struct MlpImpl : torch::nn::Module {
  MlpImpl(int in, int hidden, int out, int layers);
  torch::Tensor forward(torch::Tensor x);

  torch::nn::ModuleList linears;
};
TORCH_MODULE(Mlp);

/// Scaled dot-product multi-head attention on [B, N, D] tensors.
struct MultiHeadAttentionImpl : torch::nn::Module {
  MultiHeadAttentionImpl(int dim, int heads);

  /// If `weights` is given it receives the softmax weights [B, heads, Nq, Nk].
  torch::Tensor forward(const torch::Tensor& query, const torch::Tensor& key, const torch::Tensor& value,
                        torch::Tensor* weights = nullptr);

  int dim, heads;
  torch::nn::Linear q_proj{nullptr}, k_proj{nullptr}, v_proj{nullptr}, out_proj{nullptr};
};
TORCH_MODULE(MultiHeadAttention);

struct FeedForwardImpl : torch::nn::Module {
  FeedForwardImpl(int dim, int hidden);
  torch::Tensor forward(const torch::Tensor& x);

  torch::nn::Linear linear1{nullptr}, linear2{nullptr};
};
TORCH_MODULE(FeedForward);

/// log(x / (1 - x)) with both terms clamped away from zero.
torch::Tensor inverse_sigmoid(const torch::Tensor& x, double eps = 1e-5);

/// Sets every parameter of `module` (recursively) to zero.
void zero_parameters(torch::nn::Module& module);

int scaled_channels(int channels, double width_multiple);
int scaled_depth(int depth, double depth_multiple);

}  // namespace moyolo::model
