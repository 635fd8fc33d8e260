// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>

#include <torch/torch.h>

namespace moyolo::model {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named arrays plus the resolved configuration text. See docs/checkpoint.md.
struct Archive {
  static constexpr std::uint32_t kVersion = 1;

  std::string config_text;
  std::map<std::string, torch::Tensor> arrays;
};

void save_archive(const std::filesystem::path& path, const Archive& archive);
Archive load_archive(const std::filesystem::path& path);

/// Stores every parameter and buffer of `module` under `prefix`.
void export_module(const torch::nn::Module& module, Archive& archive, const std::string& prefix = "model/");

/// Copies arrays into `module`. Missing names or shape differences raise
/// CheckpointError before anything is modified.
void import_module(torch::nn::Module& module, const Archive& archive, const std::string& prefix = "model/");

void export_adamw(const torch::optim::AdamW& optimizer, const torch::nn::Module& module, Archive& archive);
void import_adamw(torch::optim::AdamW& optimizer, const torch::nn::Module& module, const Archive& archive);

}  // namespace moyolo::model
