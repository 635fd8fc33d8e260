// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

// moyolo: synth | train | track | eval | overlay

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "moyolo/config.hpp"
#include "moyolo/log.hpp"
#include "moyolo/metrics.hpp"
#include "moyolo/model/opencv_loader.hpp"
#include "moyolo/model/tracker.hpp"
#include "moyolo/model/training.hpp"
#include "moyolo/synthetic.hpp"

namespace fs = std::filesystem;
using namespace moyolo;

namespace {

constexpr int kUsage = 1;
constexpr int kRuntime = 2;

// Bad input supplied by the caller: missing path, malformed file.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require_exists(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw UsageError(what + " not found: " + p.string());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct ConfigArgs {
  std::string config;
  std::vector<std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", config, "INI configuration file");
    cmd->add_option("-s,--set", overrides, "override, section.key=value (repeatable)");
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config.empty()) {
      require_exists(config, "config file");
      c = load_config(config);
    }
    for (const auto& o : overrides) apply_override(c, o);
    return c;
  }
};

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string out;
  DatasetOptions options;
};

std::string format_synth(const DatasetOptions& o) {
  const auto& s = o.scene;
  std::ostringstream ss;
  ss << "[synth]\nseed = " << o.seed << "\ntrain_sequences = " << o.train_sequences
     << "\neval_sequences = " << o.eval_sequences << "\nwidth = " << s.width << "\nheight = " << s.height
     << "\nframes = " << s.frame_count << "\nmin_objects = " << s.min_objects << "\nmax_objects = " << s.max_objects
     << "\nmin_box_width = " << s.min_width << "\nmax_box_width = " << s.max_width
     << "\nmin_box_height = " << s.min_height << "\nmax_box_height = " << s.max_height
     << "\nmax_speed = " << s.max_speed << "\nlate_birth_probability = " << s.late_birth_probability
     << "\nearly_death_probability = " << s.early_death_probability
     << "\nocclusion_probability = " << s.occlusion_probability << "\n";
  return ss.str();
}

int run_synth(const SynthArgs& a) {
  const auto& s = a.options.scene;
  if (s.min_width > s.max_width || s.min_height > s.max_height || s.min_objects > s.max_objects)
    throw UsageError("synth: minimum exceeds maximum");
  write_synthetic_dataset(a.out, a.options);
  write_text(fs::path(a.out) / "synth.ini", format_synth(a.options));
  log_info("wrote " + std::to_string(a.options.train_sequences) + " train and " +
           std::to_string(a.options.eval_sequences) + " eval sequences to " + a.out);
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  ConfigArgs cfg;
  std::string out;
};

int run_train(const TrainArgs& a) {
  auto config = a.cfg.resolve();
  validate(config.model);
  if (config.train.dataset.empty()) throw ConfigError("train.dataset is not set");
  require_exists(config.train.dataset, "dataset");
  if (!config.train.stage1_checkpoint.empty()) require_exists(config.train.stage1_checkpoint, "stage-1 checkpoint");
  if (!config.train.resume_checkpoint.empty()) require_exists(config.train.resume_checkpoint, "checkpoint");
  torch::set_num_threads(config.train.threads);

  const fs::path out = a.out;
  fs::create_directories(out);
  write_text(out / "config.ini", format_config(config));

  auto data = model::load_training_set(config.train.dataset, config.model, config.train.split);
  model::Trainer trainer(config, std::move(data));
  if (!config.train.resume_checkpoint.empty()) {
    trainer.resume(config.train.resume_checkpoint);
  } else if (!config.train.stage1_checkpoint.empty()) {
    trainer.load_weights(config.train.stage1_checkpoint);
  }

  const fs::path log_path = out / config.train.log_path;
  std::ofstream log_file;
  if (trainer.iteration() > 0 && fs::exists(log_path)) {
    log_file.open(log_path, std::ios::app);
  } else {
    log_file.open(log_path);
    log_file << model::loss_log_header();
  }
  const int every = std::max(1, config.train.log_every);
  trainer.run([&](const model::StepRecord& r) {
    log_file << model::loss_log_row(r);
    if (r.iteration % every == 0) {
      log_file.flush();
      char line[160];
      std::snprintf(line, sizeof(line), "stage %d iter %d/%d loss %.4f (cls %.3f l1 %.3f giou %.3f) lr %.2e", r.stage,
                    r.iteration, config.train.iterations, r.loss, r.cls, r.l1, r.giou, trainer.current_lr());
      log_info(line);
    }
  });
  const fs::path ckpt = out / config.train.output_checkpoint;
  trainer.save(ckpt);
  log_info("saved " + ckpt.string());
  return 0;
}

// ---- track ----------------------------------------------------------------

struct TrackArgs {
  ConfigArgs cfg;
  std::string checkpoint, data, out;
  bool no_propagate = false;
};

int run_track(const TrackArgs& a) {
  auto config = a.cfg.resolve();
  if (a.no_propagate) config.train.propagate_tracks = false;
  require_exists(a.checkpoint, "checkpoint");
  require_exists(a.data, "data directory");
  torch::set_num_threads(config.train.threads);

  auto net = model::load_model(a.checkpoint, &config.model);
  const auto sequences = select_split(load_sequences(a.data), config.train.split);
  if (sequences.empty()) throw UsageError("no sequences found below " + a.data);

  const fs::path out = a.out;
  fs::create_directories(out);
  write_text(out / "config.ini", format_config(config) + "\n[track]\ncheckpoint = " + a.checkpoint +
                                     "\ndata = " + a.data + "\n");
  const model::TrackerOptions options{config.tracker, config.train.propagate_tracks};
  for (const auto& s : sequences) {
    const auto tracks = model::run_inference(net, s, options);
    write_results(out / (s.descriptor.name + ".txt"), tracks);
    log_info(s.descriptor.name + ": " + std::to_string(tracks.box_count()) + " boxes");
  }
  return 0;
}

// ---- eval -----------------------------------------------------------------

struct EvalArgs {
  std::string gt, results, out, split = "all";
};

int run_eval(const EvalArgs& a) {
  require_exists(a.gt, "ground-truth directory");
  require_exists(a.results, "results directory");
  const auto sequences = select_split(load_sequences(a.gt), a.split);
  if (sequences.empty()) throw UsageError("no sequences found below " + a.gt);

  std::vector<metrics::MetricReport> reports;
  for (const auto& s : sequences) {
    const fs::path res = fs::path(a.results) / (s.descriptor.name + ".txt");
    require_exists(res, "results file");
    metrics::SequenceEval ev{s.descriptor.name, s.gt, parse_results(res), s.descriptor.image_size()};
    reports.push_back(metrics::evaluate(ev));
  }
  reports.push_back(metrics::combine(reports));

  const fs::path table = a.out.empty() ? fs::path(a.results) / "metrics.csv" : fs::path(a.out);
  write_text(table, metrics::format_table(reports));
  write_text(table.parent_path() / (table.stem().string() + ".ini"),
             "[eval]\ngt = " + a.gt + "\nresults = " + a.results + "\nsplit = " + a.split + "\n");
  std::cout << metrics::format_text(reports);
  return 0;
}

// ---- overlay --------------------------------------------------------------

struct OverlayArgs {
  std::string sequence, results, out, split = "all";
  int thickness = 2;
};

int run_overlay(const OverlayArgs& a) {
  require_exists(a.sequence, "sequence directory");
  require_exists(a.results, "results file");
  const auto picked = select_split({load_sequence(a.sequence)}, a.split);
  const auto& seq = picked.front();
  const auto tracks = parse_results(a.results);

  const fs::path out = a.out;
  fs::create_directories(out);
  write_text(out / "overlay.ini", "[overlay]\nsequence = " + a.sequence + "\nresults = " + a.results +
                                      "\nsplit = " + a.split + "\nthickness = " + std::to_string(a.thickness) + "\n");
  for (int f = 1; f <= seq.descriptor.frame_count; ++f) {
    auto img = load_image(seq.image_path(f));
    if (static_cast<std::size_t>(f) <= tracks.frames.size()) {
      for (const auto& t : tracks.frames[f - 1]) {
        const auto& b = t.box;
        draw_rectangle(img, static_cast<int>(std::lround(b.left)), static_cast<int>(std::lround(b.top)),
                       static_cast<int>(std::lround(b.left + b.width)) - 1,
                       static_cast<int>(std::lround(b.top + b.height)) - 1, identity_color(t.id), a.thickness);
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.ppm", f);
    write_ppm(out / name, img);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moyolo: end-to-end multi-object tracking"};
  app.require_subcommand(1);
  app.fallthrough();
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "only log warnings and errors");

  SynthArgs synth;
  auto* cs = app.add_subcommand("synth", "write a synthetic train/eval dataset");
  auto& so = synth.options;
  cs->add_option("-o,--out", synth.out, "output directory")->required();
  cs->add_option("--seed", so.seed, "dataset seed")->capture_default_str();
  cs->add_option("--train", so.train_sequences, "train sequences")->capture_default_str()->check(CLI::NonNegativeNumber);
  cs->add_option("--eval", so.eval_sequences, "eval sequences")->capture_default_str()->check(CLI::NonNegativeNumber);
  cs->add_option("--width", so.scene.width)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--height", so.scene.height)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--frames", so.scene.frame_count)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--min-objects", so.scene.min_objects)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--max-objects", so.scene.max_objects)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--min-box-width", so.scene.min_width)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--max-box-width", so.scene.max_width)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--min-box-height", so.scene.min_height)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--max-box-height", so.scene.max_height)->capture_default_str()->check(CLI::PositiveNumber);
  cs->add_option("--max-speed", so.scene.max_speed)->capture_default_str()->check(CLI::NonNegativeNumber);
  cs->add_option("--late-birth", so.scene.late_birth_probability)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cs->add_option("--early-death", so.scene.early_death_probability)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  cs->add_option("--occlusion", so.scene.occlusion_probability)->capture_default_str()->check(CLI::Range(0.0, 1.0));

  TrainArgs train;
  auto* ct = app.add_subcommand("train", "train stage 1 (detection) or stage 2 (clips)");
  train.cfg.attach(ct);
  ct->add_option("-o,--out", train.out, "output directory")->required();

  TrackArgs track;
  auto* ck = app.add_subcommand("track", "track every sequence below a directory");
  track.cfg.attach(ck);
  ck->add_option("-m,--checkpoint", track.checkpoint, "trained checkpoint")->required();
  ck->add_option("-d,--data", track.data, "sequence directory or a directory of sequences")->required();
  ck->add_option("-o,--out", track.out, "results directory")->required();
  ck->add_flag("--no-propagate", track.no_propagate, "discard track queries after every frame");

  EvalArgs eval;
  auto* ce = app.add_subcommand("eval", "score results files against ground truth");
  ce->add_option("-g,--gt", eval.gt, "ground-truth sequence directory or directory of sequences")->required();
  ce->add_option("-r,--results", eval.results, "directory of <sequence>.txt results")->required();
  ce->add_option("-o,--out", eval.out, "metrics table (default <results>/metrics.csv)");
  ce->add_option("--split", eval.split, "all, first_half or second_half")
      ->check(CLI::IsMember({"all", "first_half", "second_half"}))
      ->capture_default_str();

  OverlayArgs overlay;
  auto* co = app.add_subcommand("overlay", "draw tracked boxes onto the frames of one sequence");
  co->add_option("-d,--sequence", overlay.sequence, "sequence directory")->required();
  co->add_option("-r,--results", overlay.results, "results file")->required();
  co->add_option("-o,--out", overlay.out, "image directory")->required();
  co->add_option("--split", overlay.split, "all, first_half or second_half")
      ->check(CLI::IsMember({"all", "first_half", "second_half"}))
      ->capture_default_str();
  co->add_option("--thickness", overlay.thickness)->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  if (quiet) set_log_level(LogLevel::Warning);
  install_opencv_loader();

  try {
    if (cs->parsed()) return run_synth(synth);
    if (ct->parsed()) return run_train(train);
    if (ck->parsed()) return run_track(track);
    if (ce->parsed()) return run_eval(eval);
    if (co->parsed()) return run_overlay(overlay);
  } catch (const UsageError& e) {
    std::cerr << "moyolo: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "moyolo: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "moyolo: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "moyolo: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
