// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

// Acceptance gate: one PASS/FAIL line per criterion.
//
//   acceptance [--only N[,N...]] [--work DIR]
//
// MOYOLO_MOT17_DIR selects a real MOT17 train directory for criterion 9;
// otherwise a MOTChallenge-shaped fixture is generated.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "../unit/audits.hpp"
#include "../unit/model_fixtures.hpp"
#include "../unit/oracles.hpp"
#include "moyolo/box.hpp"
#include "moyolo/config.hpp"
#include "moyolo/hungarian.hpp"
#include "moyolo/lifecycle.hpp"
#include "moyolo/log.hpp"
#include "moyolo/metrics.hpp"
#include "moyolo/model/deform_attn.hpp"
#include "moyolo/model/training.hpp"
#include "moyolo/synthetic.hpp"

namespace fs = std::filesystem;
using namespace moyolo;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// ---- 1. metric oracles -----------------------------------------------------

TrackBox tb(std::int64_t id, double l, double t, double w, double h) { return {id, {l, t, w, h}, 1.0, 1.0}; }

metrics::SequenceEval case_of(std::vector<std::vector<TrackBox>> gt, std::vector<std::vector<TrackBox>> pred) {
  metrics::SequenceEval s;
  s.name = "case";
  s.gt.frames = std::move(gt);
  s.pred.frames = std::move(pred);
  return s;
}

Verdict metric_oracles() {
  constexpr double tol = 1e-9;
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  auto near = [&](std::optional<double> v, double want) { return v && std::fabs(*v - want) <= tol; };

  {
    const auto r = metrics::evaluate(case_of({{tb(1, 0, 0, 10, 20), tb(2, 50, 50, 10, 10)}, {tb(1, 2, 0, 10, 20)}},
                                             {{tb(1, 0, 0, 10, 20), tb(2, 50, 50, 10, 10)}, {tb(1, 2, 0, 10, 20)}}));
    bool every_alpha = true;
    for (std::size_t a = 0; a < metrics::kAlphaCount; ++a)
      every_alpha = every_alpha && std::fabs(r.hota.hota_alpha[a] - 1) <= tol &&
                    std::fabs(r.hota.deta_alpha[a] - 1) <= tol && std::fabs(r.hota.assa_alpha[a] - 1) <= tol;
    expect(near(r.MOTA(), 1) && r.clear.fp == 0 && r.clear.fn == 0 && r.clear.idsw == 0, "perfect MOTA");
    expect(near(r.IDF1(), 1), "perfect IDF1");
    expect(near(r.HOTA(), 1) && near(r.DetA(), 1) && near(r.AssA(), 1) && every_alpha, "perfect HOTA");
  }
  {
    const auto r = metrics::evaluate(case_of({{tb(1, 0, 0, 10, 20)}, {tb(1, 2, 0, 10, 20), tb(2, 40, 0, 5, 5)}}, {}));
    expect(near(r.MOTA(), 0) && r.clear.fn == 3, "empty MOTA");
    expect(near(r.IDF1(), 0), "empty IDF1");
    expect(near(r.HOTA(), 0) && near(r.DetA(), 0), "empty HOTA");
  }
  {
    // One gt identity matched by prediction 7 then 9: IDSW 1, MOTA = 1 - 1/2.
    const auto c = metrics::clear_mot(
        case_of({{tb(1, 0, 0, 10, 10)}, {tb(1, 0, 0, 10, 10)}}, {{tb(7, 0, 0, 10, 10)}, {tb(9, 0, 0, 10, 10)}}));
    expect(c.idsw == 1 && near(c.mota, 0.5), "switch MOTA");
  }
  {
    // Length-4 trajectory split 2/2 across A and B: IDF1 = 2*2 / (2*2 + 2 + 2).
    const auto r = metrics::idf1(
        case_of({{tb(1, 0, 0, 10, 10)}, {tb(1, 0, 0, 10, 10)}, {tb(1, 0, 0, 10, 10)}, {tb(1, 0, 0, 10, 10)}},
                {{tb(1, 0, 0, 10, 10)}, {tb(1, 0, 0, 10, 10)}, {tb(2, 0, 0, 10, 10)}, {tb(2, 0, 0, 10, 10)}}));
    expect(r.idtp == 2 && r.idfp == 2 && r.idfn == 2 && near(r.idf1, 0.5), "split IDF1");
  }
  {
    // Fresh prediction id on frame 2: TPA 1, FNA 1, FPA 0 -> A = 1/2.
    const auto h = metrics::hota(
        case_of({{tb(1, 0, 0, 10, 10)}, {tb(1, 0, 0, 10, 10)}}, {{tb(1, 0, 0, 10, 10)}, {tb(2, 0, 0, 10, 10)}}));
    expect(near(h.deta, 1) && near(h.assa, 0.5) && near(h.hota, std::sqrt(0.5)), "fresh-id HOTA");
  }
  {
    // Two prediction ids swap targets: TPA = FNA = FPA = 1 -> A = 1/3.
    const auto h = metrics::hota(
        case_of({{tb(1, 0, 0, 10, 10), tb(2, 100, 0, 10, 10)}, {tb(1, 0, 0, 10, 10), tb(2, 100, 0, 10, 10)}},
                {{tb(1, 0, 0, 10, 10), tb(2, 100, 0, 10, 10)}, {tb(2, 0, 0, 10, 10), tb(1, 100, 0, 10, 10)}}));
    expect(near(h.deta, 1) && near(h.assa, 1.0 / 3) && near(h.hota, std::sqrt(1.0 / 3)), "swap HOTA");
  }

  SceneOptions opt;
  opt.width = 160;
  opt.height = 160;
  opt.frame_count = 30;
  opt.min_width = 10, opt.max_width = 30, opt.min_height = 20, opt.max_height = 50;
  int sequences_ok = 0;
  for (int i = 0; i < 20; ++i) {
    const auto syn = generate_synthetic(random_scene(1000 + i, opt));
    const ImageSize size{static_cast<double>(opt.width), static_cast<double>(opt.height)};
    const auto perfect = metrics::evaluate({"p", syn.gt, syn.gt, size});
    const auto empty = metrics::evaluate({"e", syn.gt, Tracks{}, size});
    const bool ok = near(perfect.MOTA(), 1) && near(perfect.IDF1(), 1) && near(perfect.HOTA(), 1) &&
                    near(empty.MOTA(), 0) && near(empty.IDF1(), 0) && near(empty.HOTA(), 0);
    sequences_ok += ok;
  }
  expect(sequences_ok == 20, "synthetic perfect/empty");

  std::string detail = "6 micro-cases, " + std::to_string(sequences_ok) + "/20 synthetic sequences";
  for (const auto& f : failed) detail += "; failed: " + f;
  return {failed.empty(), detail};
}

// ---- 2. hungarian ----------------------------------------------------------

Verdict hungarian_brute_force() {
  std::mt19937_64 rng(2024);
  int exact = 0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + rng() % 6, m = 1 + rng() % 6;
    CostMatrix c(n, m);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < m; ++k) c(r, k) = (i % 4 == 0) ? static_cast<double>(rng() % 5) : oracle::uniform(rng, -3, 7);
    const auto res = hungarian(c);
    exact += res.pairs.size() == std::min(n, m) && res.total_cost(c) == oracle::brute_force_assignment(c);
  }
  return {exact == 200, std::to_string(exact) + "/200 matrices equal brute force exactly"};
}

// ---- 3. giou / iou ---------------------------------------------------------

Verdict giou_oracle() {
  std::mt19937_64 rng(99);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = oracle::random_box(rng), b = oracle::random_box(rng);
    worst = std::max(worst, std::fabs(iou(a, b) - oracle::iou_by_area(a, b)));
    worst = std::max(worst, std::fabs(giou(a, b) - oracle::giou_by_area(a, b)));
  }
  // Central differences at a step well below every box extent.
  double grad_worst = 0;
  for (int audited = 0; audited < 1000;) {
    const auto a = oracle::random_box(rng, 0.1).cxcywh(), b = oracle::random_box(rng, 0.1).cxcywh();
    if (oracle::near_corner_coincidence(a, b, 5e-3)) continue;
    const auto analytic = giou_with_gradient(a, b).grad;
    const auto numeric = oracle::giou_central_difference(a, b, 1e-3);
    for (int k = 0; k < 8; ++k)
      grad_worst = std::max(grad_worst, std::fabs(analytic[k] - numeric[k]) / std::max(1.0, std::fabs(numeric[k])));
    ++audited;
  }
  return {worst <= 1e-12 && grad_worst < 1e-4,
          "10^4 pairs max |diff| " + fmt("%.2e", worst) + "; gradient rel. error " + fmt("%.2e", grad_worst)};
}

// ---- 4. deformable attention and decoder gradient --------------------------

Verdict deformable_audit() {
  using namespace moyolo::model;
  // One-hot weights on lattice points of dyadic maps must return cells exactly.
  const std::vector<std::array<std::int64_t, 2>> shapes{{8, 8}, {4, 4}, {2, 2}};
  const std::vector<std::int64_t> offsets{0, 64, 80};
  torch::manual_seed(3);
  const int heads = 2, dh = 4, k = 3;
  auto value = torch::randn({1, 84, heads, dh});
  std::int64_t cells = 0, exact = 0;
  for (std::int64_t level = 0; level < 3; ++level) {
    const auto [h, w] = shapes[level];
    for (std::int64_t row = 0; row < h; ++row) {
      for (std::int64_t col = 0; col < w; ++col) {
        auto loc = torch::rand({1, 1, heads, 3, k, 2});
        auto weights = torch::zeros({1, 1, heads, 3, k});
        for (int hd = 0; hd < heads; ++hd) {
          loc[0][0][hd][level][2][0] = (col + 0.5) / static_cast<double>(w);
          loc[0][0][hd][level][2][1] = (row + 0.5) / static_cast<double>(h);
          weights[0][0][hd][level][2] = 1.0;
        }
        auto out = ms_deform_attn_sample(value, shapes, offsets, loc, weights).view({heads, dh});
        ++cells;
        exact += torch::equal(out, value[0][offsets[level] + row * w + col]);
      }
    }
  }
  const double rel = std::max(fixture::decoder_gradient_audit(1), fixture::decoder_gradient_audit(2));
  return {exact == cells && rel < 1e-3, std::to_string(exact) + "/" + std::to_string(cells) +
                                            " lattice samples exact; decoder gradient rel. error " + fmt("%.2e", rel)};
}

// ---- 5. lifecycle simulation -----------------------------------------------

Verdict lifecycle_simulation() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Thresholds th;
  th.miss_tolerance = 3;
  IdentityAllocator ids;
  std::vector<QueryEntry> tracks;
  std::map<std::int64_t, int> lows;  // oracle: consecutive low frames per live identity
  std::map<std::int64_t, double> quality;
  std::int64_t highest = 0;
  long violations = 0, removals = 0, promotions = 0;
  std::size_t peak = 0;
  for (int step = 0; step < 100000; ++step) {
    if (step % 20000 == 0) th.miss_tolerance = static_cast<int>(rng() % 6);
    auto q = tracks;
    const std::size_t detects = 1 + rng() % 4;
    q.resize(tracks.size() + detects);
    std::vector<double> scores(q.size());
    // Tracks fire with a persistent per-identity rate so long low streaks occur.
    for (std::size_t i = 0; i < tracks.size(); ++i) scores[i] = u(rng) < quality[*q[i].identity] ? 0.9 : 0.1;
    for (std::size_t i = tracks.size(); i < q.size(); ++i) scores[i] = u(rng) < 0.15 ? 0.8 : 0.2;

    std::size_t want_kept = 0, want_new = 0;
    std::set<std::int64_t> want_removed;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      const auto id = *q[i].identity;
      const int low = scores[i] > th.keep ? 0 : lows[id] + 1;
      if (low > th.miss_tolerance) {
        want_removed.insert(id);
      } else {
        ++want_kept;
      }
    }
    for (std::size_t i = tracks.size(); i < q.size(); ++i) want_new += scores[i] > th.new_track;

    const auto plan = plan_propagation(q, scores, th, ids);
    if (plan.next.size() != want_kept + want_new || plan.kept_tracks != want_kept || plan.promotions != want_new) ++violations;
    if (std::set<std::int64_t>(plan.removed.begin(), plan.removed.end()) != want_removed) ++violations;
    std::set<std::int64_t> seen;
    for (const auto& e : plan.next) {
      if (e.kind != QueryKind::Track || !e.identity || !seen.insert(*e.identity).second) ++violations;
    }
    for (std::size_t i = want_kept; i < plan.next.size(); ++i) {
      const auto id = *plan.next[i].identity;
      if (id <= highest) ++violations;  // never reused
      highest = id;
      quality[id] = 0.9 * u(rng);
    }
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      const auto id = *q[i].identity;
      lows[id] = scores[i] > th.keep ? 0 : lows[id] + 1;
    }
    for (auto id : want_removed) lows.erase(id);
    removals += static_cast<long>(plan.removed.size());
    promotions += static_cast<long>(plan.promotions);
    tracks = plan.next;
    peak = std::max(peak, tracks.size());
  }
  return {violations == 0, "10^5 steps, " + std::to_string(promotions) + " births, " + std::to_string(removals) +
                               " removals, peak " + std::to_string(peak) + " tracks, " + std::to_string(violations) +
                               " violations"};
}

// ---- 6. loss bookkeeping ---------------------------------------------------

Verdict loss_bookkeeping() {
  using namespace moyolo::model;
  RunConfig cfg;
  cfg.model = fixture::tiny_config();
  cfg.train.clip_length = 5;
  torch::manual_seed(0);
  auto net = make_model(cfg.model, 11);
  std::vector<TrainingSequence> data;
  for (int s = 0; s < 3; ++s) data.push_back(fixture::synthetic_sequence(50 + s, cfg.model, 16));
  std::mt19937_64 rng(5);
  double worst = 0;
  for (int clip = 0; clip < 100; ++clip) {
    const auto c = sample_clip(rng, data, 5, 3);
    const auto& seq = data[c.sequence];
    std::vector<torch::Tensor> imgs;
    std::vector<FrameTargets> targets;
    for (auto f : c.frames) {
      imgs.push_back(seq.images[f]);
      targets.push_back(seq.targets[f]);
    }
    const auto rec = forward_clip(net, normalize_images(torch::stack(imgs)), targets, cfg);
    // Re-sum from the per-frame components and the ground-truth counts.
    double sum = 0, gt = 0;
    for (std::size_t k = 0; k < rec.frames.size(); ++k) {
      const auto& f = rec.frames[k];
      sum += cfg.loss.weight_cls * f.cls.item<double>() + cfg.loss.weight_l1 * f.l1.item<double>() +
             cfg.loss.weight_giou * f.giou.item<double>();
      gt += static_cast<double>(targets[k].size());
    }
    const double want = sum / std::max(gt, 1.0);
    const double got = cal_loss(rec.frames, 5).item<double>();
    worst = std::max(worst, std::fabs(got - want) / std::max(1.0, std::fabs(want)));
  }
  double single = 0;
  for (std::int64_t f = 0; f < 16; f += 3) {
    const auto img = normalize_images(data[0].images.narrow(0, f, 1));
    const std::vector<FrameTargets> t{data[0].targets[f]};
    net->eval();
    const auto det = forward_detection(net, img, t, cfg);
    const auto clip = forward_clip(net, img, t, cfg);
    const double a = stage1_loss(det.frames[0]).item<double>(), b = cal_loss(clip.frames, 1).item<double>();
    single = std::max(single, std::fabs(a - b) / std::max(1.0, std::fabs(b)));
  }
  return {worst <= 1e-6 && single <= 1e-6,
          "100 clips rel. error " + fmt("%.2e", worst) + "; one-frame stage1 vs collective " + fmt("%.2e", single)};
}

// ---- 7. overfit smoke ------------------------------------------------------

struct Descent {
  double at10 = 0, best = 0;
  int reached = -1;  // first iteration below 10% of the iteration-10 loss
};

Descent overfit(int stage, const model::TrainingSequence& seq) {
  RunConfig cfg;
  cfg.model = fixture::tiny_config();
  cfg.model.input_width = cfg.model.input_height = 96;
  cfg.model.hidden_dim = 32;
  cfg.model.decoder_ffn_dim = 64;
  cfg.model.num_queries = 8;
  cfg.train.stage = stage;
  cfg.train.iterations = 500;
  cfg.train.lr = 1e-3;
  cfg.train.lr_drop_fraction = 1.0;
  cfg.train.augment = false;
  cfg.train.batch_size = 1;
  cfg.train.clip_length = static_cast<int>(seq.frame_count());
  cfg.train.max_stride = 1;
  cfg.train.seed = 3;
  model::Trainer trainer(cfg, {seq});
  Descent d;
  d.best = std::numeric_limits<double>::infinity();
  trainer.run([&](const model::StepRecord& r) {
    if (r.iteration == 10) d.at10 = r.loss;
    d.best = std::min(d.best, r.loss);
    if (r.iteration > 10 && d.reached < 0 && r.loss < 0.1 * d.at10) d.reached = r.iteration;
  });
  return d;
}

Verdict overfit_smoke() {
  ModelConfig shape = fixture::tiny_config();
  shape.input_width = shape.input_height = 96;
  const auto seq = fixture::synthetic_sequence(21, shape, 5, 128);
  model::TrainingSequence one = seq;
  one.images = seq.images.narrow(0, 0, 1);
  one.targets.resize(1);
  const auto s1 = overfit(1, one);
  const auto s2 = overfit(2, seq);
  auto describe = [](const char* name, const Descent& d) {
    return std::string(name) + " iter10 " + fmt("%.3f", d.at10) + " best " + fmt("%.3f", d.best) +
           (d.reached > 0 ? " (<10% at iter " + std::to_string(d.reached) + ")" : " (never <10%)");
  };
  return {s1.reached > 0 && s2.reached > 0, describe("stage 1", s1) + "; " + describe("stage 2", s2)};
}

// ---- 8. desk benchmark -----------------------------------------------------

struct Paths {
  fs::path work;
  fs::path cli = MOYOLO_CLI_PATH;
  fs::path configs = MOYOLO_CONFIG_DIR;
};

int run(const std::string& command) {
  std::cerr << "$ " << command << '\n';
  return std::system(command.c_str());
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Reads the COMBINED row of a metrics table.
std::map<std::string, double> combined_row(const fs::path& table) {
  std::ifstream in(table);
  std::string header, line, cell;
  std::getline(in, header);
  std::vector<std::string> names;
  for (std::stringstream hs(header); std::getline(hs, cell, ',');) names.push_back(cell);
  std::map<std::string, double> row;
  while (std::getline(in, line)) {
    if (line.rfind("COMBINED,", 0) != 0) continue;
    std::stringstream ls(line);
    for (std::size_t i = 0; std::getline(ls, cell, ','); ++i)
      if (i > 0 && i < names.size()) row[names[i]] = cell == "undefined" ? std::nan("") : std::stod(cell);
  }
  return row;
}

Verdict desk_benchmark(const Paths& p) {
  const auto data = p.work / "desk";
  const auto s1 = p.work / "stage1", s2 = p.work / "stage2";
  const auto full = p.work / "track_full", ablation = p.work / "track_ablation";
  const auto cli = q(p.cli) + " -q ";
  const auto wall = std::chrono::steady_clock::now();

  std::vector<std::string> steps = {
      cli + "synth -o " + q(data) + " --seed 7",
      cli + "train -c " + q(p.configs / "desk.ini") + " -s train.dataset=" + q(data / "train") + " -o " + q(s1),
      cli + "train -c " + q(p.configs / "desk_stage2.ini") + " -s train.dataset=" + q(data / "train") +
          " -s train.stage1_checkpoint=" + q(s1 / "checkpoint.mck") + " -o " + q(s2),
      cli + "track -c " + q(p.configs / "desk_stage2.ini") + " -m " + q(s2 / "checkpoint.mck") + " -d " +
          q(data / "eval") + " -o " + q(full),
      cli + "track -c " + q(p.configs / "desk_stage2.ini") + " --no-propagate -m " + q(s2 / "checkpoint.mck") +
          " -d " + q(data / "eval") + " -o " + q(ablation),
      cli + "eval -g " + q(data / "eval") + " -r " + q(full),
      cli + "eval -g " + q(data / "eval") + " -r " + q(ablation),
  };
  for (const auto& s : steps) {
    if (run(s + " > /dev/null") != 0) return {false, "command failed: " + s};
  }
  const double hours =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall).count() / 3600.0;
  const auto m = combined_row(full / "metrics.csv");
  const auto a = combined_row(ablation / "metrics.csv");
  const double mota = m.at("MOTA"), idf1 = m.at("IDF1"), ab_idf1 = a.at("IDF1");
  const bool ok = mota >= 0.5 && idf1 >= 0.5 && ab_idf1 < idf1 && hours < 4.0;
  return {ok, "MOTA " + fmt("%.3f", mota) + " IDF1 " + fmt("%.3f", idf1) + " HOTA " + fmt("%.3f", m.at("HOTA")) +
                  "; ablation IDF1 " + fmt("%.3f", ab_idf1) + " MOTA " + fmt("%.3f", a.at("MOTA")) + "; " +
                  fmt("%.2f", hours) + " h on CPU"};
}

// ---- 9. MOT17 plumbing -----------------------------------------------------

// A MOTChallenge-shaped sequence: non-pedestrian classes, ignored rows,
// 9-column gt, and a frame count that does not split evenly.
void write_mot17_fixture(const fs::path& root) {
  SceneOptions opt;
  opt.width = 320;
  opt.height = 180;
  opt.frame_count = 21;
  opt.min_width = 12, opt.max_width = 30, opt.min_height = 30, opt.max_height = 70;
  for (const char* name : {"MOT17-02-FRCNN", "MOT17-04-FRCNN"}) {
    const auto syn = generate_synthetic(random_scene(name[7] * 31ULL, opt), name);
    write_sequence(root / name, syn);
    std::ofstream gt(root / name / "gt" / "gt.txt", std::ios::app);
    gt << "3,900,10,10,20,40,0,1,1.0\n"   // ignored by the consider flag
       << "4,901,50,10,20,40,1,7,0.5\n";  // class 7 is not a pedestrian
  }
}

Verdict mot17_plumbing(const Paths& p) {
  fs::path root;
  std::string source;
  if (const char* env = std::getenv("MOYOLO_MOT17_DIR"); env && *env) {
    root = env;
    source = "MOT17 at " + root.string();
  } else {
    root = p.work / "mot17_fixture";
    fs::remove_all(root);
    write_mot17_fixture(root);
    source = "MOTChallenge-shaped fixture";
  }
  // Trained desk checkpoint when available, an untrained one otherwise.
  fs::path ckpt = p.work / "stage2" / "checkpoint.mck";
  if (!fs::exists(ckpt)) {
    RunConfig cfg = load_config(p.configs / "desk.ini");
    auto seq = fixture::synthetic_sequence(1, cfg.model, 2);
    model::Trainer t(cfg, {seq});
    ckpt = p.work / "untrained.mck";
    t.save(ckpt);
  }
  const auto sequences = load_sequences(root);
  if (sequences.empty()) return {false, "no sequences under " + root.string()};
  for (const auto& s : sequences) {
    const auto [train, eval] = half_split(s);
    if (train.descriptor.frame_count + eval.descriptor.frame_count != s.descriptor.frame_count)
      return {false, "half split lost frames in " + s.descriptor.name};
  }
  const auto out = p.work / "mot17_results";
  fs::remove_all(out);
  const auto cli = q(p.cli) + " -q ";
  if (run(cli + "track -s train.split=second_half -m " + q(ckpt) + " -d " + q(root) + " -o " + q(out)) != 0)
    return {false, "track failed"};
  if (run(cli + "eval --split second_half -g " + q(root) + " -r " + q(out) + " > /dev/null") != 0)
    return {false, "eval failed"};
  std::ifstream in(out / "metrics.csv");
  std::string line;
  std::getline(in, line);
  const bool header = line == "name,HOTA,DetA,AssA,IDF1,MOTA,TP,FP,FN,IDSW";
  std::size_t rows = 0;
  bool defined = true;
  while (std::getline(in, line)) {
    ++rows;
    defined = defined && line.find("undefined") == std::string::npos &&
              std::count(line.begin(), line.end(), ',') == 9;
  }
  const bool ok = header && rows == sequences.size() + 1 && defined;
  return {ok, source + ": " + std::to_string(sequences.size()) + " sequences, eval half tracked and scored, " +
                  std::to_string(rows) + " report rows" + (defined ? "" : " (incomplete)")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  std::string work = (fs::temp_directory_path() / "moyolo_acceptance").string();
  app.add_option("--only", only, "criterion numbers to run")->delimiter(',');
  app.add_option("--work", work, "scratch directory for benchmark artifacts");
  CLI11_PARSE(app, argc, argv);
  set_log_level(LogLevel::Warning);
  torch::set_num_threads(1);

  Paths paths;
  paths.work = work;
  fs::create_directories(paths.work);

  struct Criterion {
    int number;
    const char* name;
    double budget_seconds;  // wall clock; <= 0 means unbounded here
    std::function<Verdict()> check;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracles", 10, metric_oracles},
      {2, "hungarian vs brute force", 5, hungarian_brute_force},
      {3, "giou/iou oracle and gradient", 0, giou_oracle},
      {4, "deformable lattice and decoder gradient", 60, deformable_audit},
      {5, "lifecycle invariants", 0, lifecycle_simulation},
      {6, "loss bookkeeping", 0, loss_bookkeeping},
      {7, "overfit smoke", 15 * 60, overfit_smoke},
      {8, "desk benchmark", 4 * 3600, [&] { return desk_benchmark(paths); }},
      {9, "MOT17 plumbing", 0, [&] { return mot17_plumbing(paths); }},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.number) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0 && secs >= c.budget_seconds) {
      v.pass = false;
      v.detail += "; over the " + fmt("%.0f", c.budget_seconds) + " s budget";
    }
    failures += !v.pass;
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << c.number << ". " << c.name << ": " << v.detail << " ("
              << fmt("%.1f", secs) << " s)" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
