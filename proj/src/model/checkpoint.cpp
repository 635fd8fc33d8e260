// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace moyolo::model {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'Y', 'O', 'L', 'O', 'C', 'K'};

enum : std::uint8_t { kF32 = 0, kF64 = 1, kI64 = 2 };

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T take(std::istream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw CheckpointError(path.string() + ": truncated archive");
  return v;
}

std::string take_string(std::istream& in, std::uint64_t n, const std::filesystem::path& path) {
  if (n > (1ull << 32)) throw CheckpointError(path.string() + ": corrupt string length");
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n))) throw CheckpointError(path.string() + ": truncated archive");
  return s;
}

std::uint8_t tag_of(const torch::Tensor& t) {
  switch (t.scalar_type()) {
    case torch::kFloat: return kF32;
    case torch::kDouble: return kF64;
    case torch::kLong: return kI64;
    default: throw CheckpointError("unsupported array dtype");
  }
}

torch::Dtype dtype_of(std::uint8_t tag, const std::filesystem::path& path) {
  switch (tag) {
    case kF32: return torch::kFloat;
    case kF64: return torch::kDouble;
    case kI64: return torch::kLong;
    default: throw CheckpointError(path.string() + ": unknown dtype tag");
  }
}

}  // namespace

void save_archive(const std::filesystem::path& path, const Archive& archive) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp);
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, Archive::kVersion);
    put<std::uint64_t>(out, archive.config_text.size());
    out.write(archive.config_text.data(), static_cast<std::streamsize>(archive.config_text.size()));
    put<std::uint64_t>(out, archive.arrays.size());
    for (const auto& [name, tensor] : archive.arrays) {
      auto t = tensor.detach().cpu().contiguous();
      put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put<std::uint8_t>(out, tag_of(t));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(t.dim()));
      for (auto d : t.sizes()) put<std::int64_t>(out, d);
      out.write(static_cast<const char*>(t.data_ptr()), static_cast<std::streamsize>(t.numel() * t.element_size()));
    }
    if (!out) throw CheckpointError("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Archive load_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
    throw CheckpointError(path.string() + ": not a moyolo checkpoint");
  const auto version = take<std::uint32_t>(in, path);
  if (version != Archive::kVersion)
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  Archive a;
  a.config_text = take_string(in, take<std::uint64_t>(in, path), path);
  const auto count = take<std::uint64_t>(in, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    auto name = take_string(in, take<std::uint32_t>(in, path), path);
    const auto dtype = dtype_of(take<std::uint8_t>(in, path), path);
    const auto ndim = take<std::uint32_t>(in, path);
    if (ndim > 8) throw CheckpointError(path.string() + ": corrupt array rank");
    std::vector<std::int64_t> dims(ndim);
    for (auto& d : dims) d = take<std::int64_t>(in, path);
    auto t = torch::empty(dims, torch::TensorOptions().dtype(dtype));
    if (t.numel() && !in.read(static_cast<char*>(t.data_ptr()), static_cast<std::streamsize>(t.numel() * t.element_size())))
      throw CheckpointError(path.string() + ": truncated array " + name);
    a.arrays.emplace(std::move(name), std::move(t));
  }
  return a;
}

void export_module(const torch::nn::Module& module, Archive& archive, const std::string& prefix) {
  for (const auto& p : module.named_parameters()) archive.arrays[prefix + p.key()] = p.value().detach().clone();
  for (const auto& b : module.named_buffers()) archive.arrays[prefix + b.key()] = b.value().detach().clone();
}

void import_module(torch::nn::Module& module, const Archive& archive, const std::string& prefix) {
  std::vector<std::pair<torch::Tensor, const torch::Tensor*>> copies;
  auto collect = [&](const std::string& name, torch::Tensor& target) {
    const auto it = archive.arrays.find(prefix + name);
    if (it == archive.arrays.end()) throw CheckpointError("checkpoint lacks array " + prefix + name);
    if (it->second.sizes() != target.sizes())
      throw CheckpointError("checkpoint array " + prefix + name + " has a different shape than the configured model");
    copies.emplace_back(target, &it->second);
  };
  for (auto& p : module.named_parameters()) collect(p.key(), p.value());
  for (auto& b : module.named_buffers()) collect(b.key(), b.value());
  torch::NoGradGuard guard;
  for (auto& [target, source] : copies) target.copy_(*source);
}

void export_adamw(const torch::optim::AdamW& optimizer, const torch::nn::Module& module, Archive& archive) {
  const auto& state = optimizer.state();
  for (const auto& p : module.named_parameters()) {
    const auto it = state.find(p.value().unsafeGetTensorImpl());
    if (it == state.end()) continue;
    const auto& s = static_cast<const torch::optim::AdamWParamState&>(*it->second);
    const auto base = "optim/" + p.key();
    archive.arrays[base + "/exp_avg"] = s.exp_avg().clone();
    archive.arrays[base + "/exp_avg_sq"] = s.exp_avg_sq().clone();
    archive.arrays[base + "/step"] = torch::tensor(s.step(), torch::kLong);
  }
}

void import_adamw(torch::optim::AdamW& optimizer, const torch::nn::Module& module, const Archive& archive) {
  auto& state = optimizer.state();
  for (const auto& p : module.named_parameters()) {
    const auto base = "optim/" + p.key();
    const auto avg = archive.arrays.find(base + "/exp_avg");
    if (avg == archive.arrays.end()) continue;
    auto s = std::make_unique<torch::optim::AdamWParamState>();
    s->step(archive.arrays.at(base + "/step").item<std::int64_t>());
    s->exp_avg(avg->second.clone().to(p.value().dtype()));
    s->exp_avg_sq(archive.arrays.at(base + "/exp_avg_sq").clone().to(p.value().dtype()));
    state[p.value().unsafeGetTensorImpl()] = std::move(s);
  }
}

}  // namespace moyolo::model
