// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/training.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "moyolo/log.hpp"

namespace moyolo::model {

ForwardRecord forward_detection(MoYolo& model, const torch::Tensor& images, const std::vector<FrameTargets>& targets,
                                const RunConfig& config) {
  const auto b = images.size(0);
  if (static_cast<std::size_t>(b) != targets.size()) throw std::invalid_argument("targets not aligned with images");
  auto memory = model->encode(images);
  auto q = model->detect->forward();
  auto out = model->decoder(q.embeddings.unsqueeze(0).expand({b, -1, -1}), q.boxes.unsqueeze(0).expand({b, -1, -1}),
                            memory);
  ForwardRecord rec;
  const std::map<std::int64_t, std::int64_t> no_tracks;
  for (std::int64_t i = 0; i < b; ++i) {
    auto logits = out.logits.select(1, i), boxes = out.boxes.select(1, i);
    auto t = targets[i].to(boxes.scalar_type());
    auto match = tala_assign(q.entries, logits[-1], boxes[-1], t, no_tracks, config.loss);
    rec.frames.push_back(frame_loss(logits, boxes, match, t, config.loss));
    rec.matches.push_back(std::move(match));
    rec.track_queries.push_back(0);
  }
  return rec;
}

namespace {

QuerySet select_queries(const QuerySet& q, const std::vector<std::int64_t>& keep) {
  QuerySet out;
  for (auto k : keep) out.entries.push_back(q.entries[k]);
  const auto index = torch::tensor(keep, torch::kLong);
  out.embeddings = q.embeddings.index_select(0, index);
  out.boxes = q.boxes.index_select(0, index);
  return out;
}

}  // namespace

ForwardRecord forward_clip(MoYolo& model, const torch::Tensor& images, const std::vector<FrameTargets>& targets,
                           const RunConfig& config, std::mt19937_64* rng) {
  const auto n = images.size(0);
  if (static_cast<std::size_t>(n) != targets.size()) throw std::invalid_argument("targets not aligned with images");
  auto memory = model->encode(images);
  const auto dim = model->config.hidden_dim;
  auto tracks = QuerySet::empty(dim, images.options());
  IdentityAllocator ids;
  std::map<std::int64_t, std::int64_t> live;  // track identity -> gt identity
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ForwardRecord rec;
  for (std::int64_t t = 0; t < n; ++t) {
    auto q = QuerySet::concat(tracks, model->detect->forward());
    auto out = model->decode(q, memory.select(t));
    auto logits = out.logits.select(1, 0), boxes = out.boxes.select(1, 0);
    auto tg = targets[t].to(boxes.scalar_type());
    auto match = tala_assign(q.entries, logits[-1], boxes[-1], tg, live, config.loss);
    rec.frames.push_back(frame_loss(logits, boxes, match, tg, config.loss));
    rec.track_queries.push_back(tracks.size());

    if (config.train.propagate_tracks && t + 1 < n) {
      std::vector<double> scores(q.size(), 0.0);
      std::vector<std::optional<std::size_t>> gt_of(q.size());
      for (const auto& [p, g] : match.pairs) {
        scores[p] = 1.0;
        gt_of[p] = g;
      }
      if (rng && u(*rng) < config.train.track_insert_prob) {
        const auto last = std::get<0>(logits[-1].detach().max(-1)).to(torch::kDouble).contiguous();
        std::optional<std::size_t> best;
        for (auto p : match.unmatched_predictions)
          if (q.entries[p].kind == QueryKind::Detect &&
              (!best || last.data_ptr<double>()[p] > last.data_ptr<double>()[*best]))
            best = p;
        if (best) scores[*best] = 1.0;
      }
      auto prop = propagate(q, out, scores, config.tracker, ids, model->tan, config.train.detach_boxes_between_frames);
      for (auto id : prop.plan.removed) live.erase(id);
      for (std::size_t k = prop.plan.kept_tracks; k < prop.plan.next.size(); ++k)
        if (const auto g = gt_of[prop.plan.source[k]]) live[*prop.plan.next[k].identity] = tg.identities[*g];
      if (rng && config.train.track_drop_prob > 0.0) {
        std::vector<std::int64_t> keep;
        for (std::size_t k = 0; k < prop.plan.next.size(); ++k) {
          const auto id = *prop.plan.next[k].identity;
          if (gt_of[prop.plan.source[k]] && u(*rng) < config.train.track_drop_prob) {
            live.erase(id);
          } else {
            keep.push_back(static_cast<std::int64_t>(k));
          }
        }
        if (keep.size() != prop.plan.next.size()) prop.next = select_queries(prop.next, keep);
      }
      tracks = std::move(prop.next);
    } else {
      tracks = QuerySet::empty(dim, images.options());
      live.clear();
    }
    rec.matches.push_back(std::move(match));
  }
  return rec;
}

std::string loss_log_header() { return "iteration,stage,loss,cls,l1,giou\n"; }

std::string loss_log_row(const StepRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%d,%.8g,%.8g,%.8g,%.8g\n", r.iteration, r.stage, r.loss, r.cls, r.l1, r.giou);
  return buf;
}

Trainer::Trainer(const RunConfig& config, std::vector<TrainingSequence> data) : config_(config), data_(std::move(data)) {
  if (config_.train.stage != 1 && config_.train.stage != 2) throw ConfigError("train.stage must be 1 or 2");
  if (data_.empty()) throw std::invalid_argument("training set is empty");
  model_ = make_model(config_.model, config_.train.seed);
  optimizer_ = std::make_unique<torch::optim::AdamW>(
      model_->parameters(), torch::optim::AdamWOptions(config_.train.lr).weight_decay(config_.train.weight_decay));
}

double Trainer::current_lr() const {
  const int drop_at = static_cast<int>(std::floor(config_.train.iterations * config_.train.lr_drop_fraction));
  return iteration_ >= drop_at ? config_.train.lr * config_.train.lr_drop_factor : config_.train.lr;
}

void Trainer::apply_schedule() {
  const double lr = current_lr();
  for (auto& group : optimizer_->param_groups())
    static_cast<torch::optim::AdamWOptions&>(group.options()).lr(lr);
}

StepRecord Trainer::step() {
  apply_schedule();
  model_->train();
  std::seed_seq seq{static_cast<std::uint64_t>(config_.train.seed), static_cast<std::uint64_t>(iteration_)};
  std::mt19937_64 rng(seq);

  ForwardRecord rec;
  torch::Tensor loss;
  if (config_.train.stage == 1) {
    std::vector<torch::Tensor> images;
    std::vector<FrameTargets> targets;
    for (int k = 0; k < config_.train.batch_size; ++k) {
      const auto s = std::uniform_int_distribution<std::size_t>(0, data_.size() - 1)(rng);
      const auto f = std::uniform_int_distribution<std::int64_t>(0, data_[s].frame_count() - 1)(rng);
      if (config_.train.augment) {
        const auto a = sample_augmentation(rng, config_.train.min_crop_scale, config_.model.input_width,
                                           config_.model.input_height);
        images.push_back(augment_images(data_[s].images.narrow(0, f, 1), a).squeeze(0));
        targets.push_back(augment_targets(data_[s].targets[f], a));
      } else {
        images.push_back(normalize_images(data_[s].images[f]));
        targets.push_back(data_[s].targets[f]);
      }
    }
    rec = forward_detection(model_, torch::stack(images), targets, config_);
    for (const auto& f : rec.frames) loss = loss.defined() ? loss + stage1_loss(f) : stage1_loss(f);
    loss = loss / static_cast<double>(rec.frames.size());
  } else {
    std::vector<torch::Tensor> images;
    std::vector<FrameTargets> targets;
    for (int k = 0; k < config_.train.batch_size; ++k) {
      const auto clip = sample_clip(rng, data_, config_.train.clip_length, config_.train.max_stride);
      const auto& seqn = data_[clip.sequence];
      images.clear();
      targets.clear();
      for (auto f : clip.frames) {
        images.push_back(seqn.images[f]);
        targets.push_back(seqn.targets[f]);
      }
      auto batch = torch::stack(images);
      if (config_.train.augment) {
        const auto a = sample_augmentation(rng, config_.train.min_crop_scale, config_.model.input_width,
                                           config_.model.input_height);
        batch = augment_images(batch, a);
        for (auto& t : targets) t = augment_targets(t, a);
      } else {
        batch = normalize_images(batch);
      }
      auto r = forward_clip(model_, batch, targets, config_, &rng);
      auto l = cal_loss(r.frames, config_.train.clip_length);
      loss = loss.defined() ? loss + l : l;
      rec.frames.insert(rec.frames.end(), r.frames.begin(), r.frames.end());
    }
    loss = loss / static_cast<double>(config_.train.batch_size);
  }

  StepRecord out;
  out.iteration = iteration_ + 1;
  out.stage = config_.train.stage;
  out.loss = loss.item<double>();
  if (!std::isfinite(out.loss))
    throw std::runtime_error("training diverged: non-finite loss at iteration " + std::to_string(out.iteration));
  std::int64_t v = 0;
  for (const auto& f : rec.frames) {
    out.cls += f.cls.item<double>();
    out.l1 += f.l1.item<double>();
    out.giou += f.giou.item<double>();
    v += f.normalizer;
  }
  const double norm = static_cast<double>(std::max<std::int64_t>(v, 1));
  out.cls /= norm;
  out.l1 /= norm;
  out.giou /= norm;

  optimizer_->zero_grad();
  loss.backward();
  if (config_.train.grad_clip > 0) torch::nn::utils::clip_grad_norm_(model_->parameters(), config_.train.grad_clip);
  optimizer_->step();
  ++iteration_;
  return out;
}

void Trainer::run(const std::function<void(const StepRecord&)>& on_step) {
  while (iteration_ < config_.train.iterations) {
    const auto r = step();
    if (on_step) on_step(r);
  }
}

void Trainer::save(const std::filesystem::path& path) const {
  Archive a;
  a.config_text = format_config(config_);
  export_module(*model_, a);
  export_adamw(*optimizer_, *model_, a);
  a.arrays["train/iteration"] = torch::tensor(static_cast<std::int64_t>(iteration_), torch::kLong);
  a.arrays["train/stage"] = torch::tensor(static_cast<std::int64_t>(config_.train.stage), torch::kLong);
  save_archive(path, a);
}

namespace {

ModelConfig stored_model_config(const Archive& a, const std::filesystem::path& path) {
  try {
    return parse_config_text(a.config_text, path.string()).model;
  } catch (const ConfigError& e) {
    throw CheckpointError(path.string() + ": stored configuration is invalid: " + e.what());
  }
}

}  // namespace

void Trainer::resume(const std::filesystem::path& path) {
  const auto a = load_archive(path);
  if (!(stored_model_config(a, path) == config_.model))
    throw CheckpointError(path.string() + ": model configuration differs from the checkpoint");
  const auto stage = a.arrays.find("train/stage");
  if (stage == a.arrays.end() || stage->second.item<std::int64_t>() != config_.train.stage)
    throw CheckpointError(path.string() + ": checkpoint belongs to another training stage");
  import_module(*model_, a);
  import_adamw(*optimizer_, *model_, a);
  iteration_ = static_cast<int>(a.arrays.at("train/iteration").item<std::int64_t>());
}

void Trainer::load_weights(const std::filesystem::path& path) {
  const auto a = load_archive(path);
  if (!(stored_model_config(a, path) == config_.model))
    throw CheckpointError(path.string() + ": model configuration differs from the checkpoint");
  import_module(*model_, a);
}

MoYolo load_model(const std::filesystem::path& checkpoint, ModelConfig* config_out, const ModelConfig* expected) {
  const auto a = load_archive(checkpoint);
  const auto cfg = stored_model_config(a, checkpoint);
  if (expected && !(cfg == *expected))
    throw CheckpointError(checkpoint.string() + ": model configuration differs from the checkpoint");
  auto model = make_model(cfg, 0);
  import_module(*model, a);
  if (config_out) *config_out = cfg;
  return model;
}

}  // namespace moyolo::model
