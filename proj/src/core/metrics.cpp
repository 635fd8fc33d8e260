// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "moyolo/hungarian.hpp"

namespace moyolo::metrics {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
const std::vector<TrackBox> kNoBoxes;

const std::vector<TrackBox>& frame_at(const Tracks& t, std::size_t f) {
  return f < t.frames.size() ? t.frames[f] : kNoBoxes;
}

/// Dense indices for the identities of one side of a sequence.
class IdIndex {
 public:
  explicit IdIndex(const Tracks& t) {
    for (const auto& frame : t.frames)
      for (const auto& b : frame) ids_.emplace(b.id, 0);
    std::size_t next = 0;
    for (auto& [id, idx] : ids_) idx = next++;
  }
  std::size_t size() const { return ids_.size(); }
  std::size_t operator()(std::int64_t id) const { return ids_.at(id); }

 private:
  std::map<std::int64_t, std::size_t> ids_;
};

CostMatrix similarity(const std::vector<TrackBox>& gt, const std::vector<TrackBox>& pred) {
  CostMatrix s(gt.size(), pred.size());
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < pred.size(); ++j) s(i, j) = iou_ltwh(gt[i].box, pred[j].box);
  return s;
}

CostMatrix negated(const CostMatrix& m) {
  CostMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = -m(i, j);
  return out;
}

std::optional<double> ratio(double num, double den) {
  if (den <= 0.0) return std::nullopt;
  return num / den;
}

}  // namespace

std::size_t SequenceEval::frame_count() const { return std::max(gt.frame_count(), pred.frame_count()); }

double iou_ltwh(const PixelBox& a, const PixelBox& b) {
  const double iw = std::max(0.0, std::min(a.left + a.width, b.left + b.width) - std::max(a.left, b.left));
  const double ih = std::max(0.0, std::min(a.top + a.height, b.top + b.height) - std::max(a.top, b.top));
  const double inter = iw * ih;
  const double uni = a.width * a.height + b.width * b.height - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

std::array<double, kAlphaCount> hota_alphas() {
  std::array<double, kAlphaCount> a{};
  for (std::size_t i = 0; i < kAlphaCount; ++i) a[i] = 0.05 * static_cast<double>(i + 1);
  return a;
}

ClearResult clear_mot(const SequenceEval& seq, double iou_gate) {
  ClearResult r;
  const IdIndex gt_index(seq.gt);
  constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::min();
  std::vector<std::int64_t> last_match(gt_index.size(), kNone);      // last matched prediction id, ever
  std::vector<std::int64_t> prev_frame_match(gt_index.size(), kNone);  // pairing in the previous frame only

  for (std::size_t f = 0; f < seq.frame_count(); ++f) {
    const auto& gt = frame_at(seq.gt, f);
    const auto& pred = frame_at(seq.pred, f);
    r.gt_total += static_cast<std::int64_t>(gt.size());
    if (gt.empty() || pred.empty()) {
      r.fp += static_cast<std::int64_t>(pred.size());
      r.fn += static_cast<std::int64_t>(gt.size());
      std::fill(prev_frame_match.begin(), prev_frame_match.end(), kNone);
      continue;
    }
    const CostMatrix sim = similarity(gt, pred);
    CostMatrix score(gt.size(), pred.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const auto gi = gt_index(gt[i].id);
      for (std::size_t j = 0; j < pred.size(); ++j) {
        if (sim(i, j) < iou_gate - kEps) continue;
        // Continuing last frame's pairing dominates any IoU difference.
        score(i, j) = (prev_frame_match[gi] == pred[j].id ? 1000.0 : 0.0) + sim(i, j);
      }
    }
    const MatchResult m = hungarian(negated(score));
    std::fill(prev_frame_match.begin(), prev_frame_match.end(), kNone);
    std::int64_t matches = 0;
    for (const auto& [i, j] : m.pairs) {
      if (score(i, j) <= kEps) continue;
      ++matches;
      const auto gi = gt_index(gt[i].id);
      if (last_match[gi] != kNone && last_match[gi] != pred[j].id) ++r.idsw;
      last_match[gi] = pred[j].id;
      prev_frame_match[gi] = pred[j].id;
    }
    r.tp += matches;
    r.fn += static_cast<std::int64_t>(gt.size()) - matches;
    r.fp += static_cast<std::int64_t>(pred.size()) - matches;
  }
  if (r.gt_total > 0) {
    r.mota = 1.0 - static_cast<double>(r.fp + r.fn + r.idsw) / static_cast<double>(r.gt_total);
  }
  return r;
}

IdentityResult idf1(const SequenceEval& seq, double iou_gate) {
  IdentityResult r;
  const IdIndex gt_index(seq.gt);
  const IdIndex pred_index(seq.pred);
  CostMatrix counts(gt_index.size(), pred_index.size());
  std::int64_t gt_total = 0, pred_total = 0;
  for (std::size_t f = 0; f < seq.frame_count(); ++f) {
    const auto& gt = frame_at(seq.gt, f);
    const auto& pred = frame_at(seq.pred, f);
    gt_total += static_cast<std::int64_t>(gt.size());
    pred_total += static_cast<std::int64_t>(pred.size());
    for (const auto& g : gt)
      for (const auto& p : pred)
        if (iou_ltwh(g.box, p.box) >= iou_gate - kEps) counts(gt_index(g.id), pred_index(p.id)) += 1.0;
  }
  if (counts.rows() > 0 && counts.cols() > 0) {
    const MatchResult m = hungarian(negated(counts));
    for (const auto& [i, j] : m.pairs) r.idtp += static_cast<std::int64_t>(counts(i, j));
  }
  r.idfn = gt_total - r.idtp;
  r.idfp = pred_total - r.idtp;
  if (gt_total > 0) {
    r.idf1 = 2.0 * static_cast<double>(r.idtp) / static_cast<double>(2 * r.idtp + r.idfp + r.idfn);
  }
  return r;
}

HotaResult hota(const SequenceEval& seq) {
  HotaResult r;
  const auto alphas = hota_alphas();
  const IdIndex gt_index(seq.gt);
  const IdIndex pred_index(seq.pred);
  const std::size_t ng = gt_index.size(), np = pred_index.size();

  // Pass 1: global alignment between identities from soft per-frame overlaps.
  std::vector<double> potential(ng * np, 0.0);
  std::vector<double> gt_count(ng, 0.0), pred_count(np, 0.0);
  std::int64_t gt_total = 0;
  for (std::size_t f = 0; f < seq.frame_count(); ++f) {
    const auto& gt = frame_at(seq.gt, f);
    const auto& pred = frame_at(seq.pred, f);
    gt_total += static_cast<std::int64_t>(gt.size());
    for (const auto& g : gt) gt_count[gt_index(g.id)] += 1.0;
    for (const auto& p : pred) pred_count[pred_index(p.id)] += 1.0;
    if (gt.empty() || pred.empty()) continue;
    const CostMatrix sim = similarity(gt, pred);
    std::vector<double> row_sum(gt.size(), 0.0), col_sum(pred.size(), 0.0);
    for (std::size_t i = 0; i < gt.size(); ++i)
      for (std::size_t j = 0; j < pred.size(); ++j) {
        row_sum[i] += sim(i, j);
        col_sum[j] += sim(i, j);
      }
    for (std::size_t i = 0; i < gt.size(); ++i)
      for (std::size_t j = 0; j < pred.size(); ++j) {
        const double denom = row_sum[i] + col_sum[j] - sim(i, j);
        if (denom > kEps) potential[gt_index(gt[i].id) * np + pred_index(pred[j].id)] += sim(i, j) / denom;
      }
  }
  std::vector<double> alignment(ng * np, 0.0);
  for (std::size_t g = 0; g < ng; ++g)
    for (std::size_t p = 0; p < np; ++p) {
      const double pm = potential[g * np + p];
      const double den = gt_count[g] + pred_count[p] - pm;
      alignment[g * np + p] = den > 0.0 ? pm / den : 0.0;
    }

  // Pass 2: per-frame matching on alignment-weighted similarity.
  std::vector<std::vector<double>> matches(kAlphaCount, std::vector<double>(ng * np, 0.0));
  for (std::size_t f = 0; f < seq.frame_count(); ++f) {
    const auto& gt = frame_at(seq.gt, f);
    const auto& pred = frame_at(seq.pred, f);
    if (gt.empty() || pred.empty()) {
      for (std::size_t a = 0; a < kAlphaCount; ++a) {
        r.fp[a] += static_cast<std::int64_t>(pred.size());
        r.fn[a] += static_cast<std::int64_t>(gt.size());
      }
      continue;
    }
    const CostMatrix sim = similarity(gt, pred);
    CostMatrix score(gt.size(), pred.size());
    for (std::size_t i = 0; i < gt.size(); ++i)
      for (std::size_t j = 0; j < pred.size(); ++j)
        score(i, j) = -alignment[gt_index(gt[i].id) * np + pred_index(pred[j].id)] * sim(i, j);
    const MatchResult m = hungarian(score);
    for (std::size_t a = 0; a < kAlphaCount; ++a) {
      std::int64_t n = 0;
      for (const auto& [i, j] : m.pairs) {
        if (sim(i, j) < alphas[a] - kEps) continue;
        ++n;
        matches[a][gt_index(gt[i].id) * np + pred_index(pred[j].id)] += 1.0;
      }
      r.tp[a] += n;
      r.fn[a] += static_cast<std::int64_t>(gt.size()) - n;
      r.fp[a] += static_cast<std::int64_t>(pred.size()) - n;
    }
  }

  double hota_sum = 0.0, deta_sum = 0.0, assa_sum = 0.0;
  for (std::size_t a = 0; a < kAlphaCount; ++a) {
    double weighted = 0.0;
    for (std::size_t g = 0; g < ng; ++g)
      for (std::size_t p = 0; p < np; ++p) {
        const double tpa = matches[a][g * np + p];
        if (tpa == 0.0) continue;
        // A(c) = TPA / (TPA + FNA + FPA)
        weighted += tpa * tpa / std::max(1.0, gt_count[g] + pred_count[p] - tpa);
      }
    const double tp = static_cast<double>(r.tp[a]);
    r.assa_alpha[a] = weighted / std::max(1.0, tp);
    r.deta_alpha[a] = tp / std::max(1.0, tp + static_cast<double>(r.fn[a] + r.fp[a]));
    r.hota_alpha[a] = std::sqrt(r.deta_alpha[a] * r.assa_alpha[a]);
    hota_sum += r.hota_alpha[a];
    deta_sum += r.deta_alpha[a];
    assa_sum += r.assa_alpha[a];
  }
  if (gt_total > 0) {
    r.hota = hota_sum / kAlphaCount;
    r.deta = deta_sum / kAlphaCount;
    r.assa = assa_sum / kAlphaCount;
  }
  return r;
}

MetricReport evaluate(const SequenceEval& seq) {
  return MetricReport{seq.name, clear_mot(seq), idf1(seq), hota(seq)};
}

MetricReport combine(std::span<const MetricReport> reports, const std::string& name) {
  MetricReport out;
  out.name = name;
  auto& c = out.clear;
  auto& id = out.identity;
  auto& h = out.hota;
  std::array<double, kAlphaCount> assa_weighted{};
  for (const auto& r : reports) {
    c.tp += r.clear.tp;
    c.fp += r.clear.fp;
    c.fn += r.clear.fn;
    c.idsw += r.clear.idsw;
    c.gt_total += r.clear.gt_total;
    id.idtp += r.identity.idtp;
    id.idfp += r.identity.idfp;
    id.idfn += r.identity.idfn;
    for (std::size_t a = 0; a < kAlphaCount; ++a) {
      h.tp[a] += r.hota.tp[a];
      h.fn[a] += r.hota.fn[a];
      h.fp[a] += r.hota.fp[a];
      assa_weighted[a] += r.hota.assa_alpha[a] * static_cast<double>(r.hota.tp[a]);
    }
  }
  if (c.gt_total > 0) {
    c.mota = 1.0 - static_cast<double>(c.fp + c.fn + c.idsw) / static_cast<double>(c.gt_total);
    id.idf1 = ratio(2.0 * static_cast<double>(id.idtp), static_cast<double>(2 * id.idtp + id.idfp + id.idfn));
    double hs = 0, ds = 0, as = 0;
    for (std::size_t a = 0; a < kAlphaCount; ++a) {
      const double tp = static_cast<double>(h.tp[a]);
      h.assa_alpha[a] = assa_weighted[a] / std::max(1.0, tp);
      h.deta_alpha[a] = tp / std::max(1.0, tp + static_cast<double>(h.fn[a] + h.fp[a]));
      h.hota_alpha[a] = std::sqrt(h.deta_alpha[a] * h.assa_alpha[a]);
      hs += h.hota_alpha[a];
      ds += h.deta_alpha[a];
      as += h.assa_alpha[a];
    }
    h.hota = hs / kAlphaCount;
    h.deta = ds / kAlphaCount;
    h.assa = as / kAlphaCount;
  }
  return out;
}

namespace {
std::string fmt_ratio(const std::optional<double>& v) {
  if (!v) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}
}  // namespace

std::string format_table(std::span<const MetricReport> reports) {
  std::ostringstream out;
  out << "name,HOTA,DetA,AssA,IDF1,MOTA,TP,FP,FN,IDSW\n";
  for (const auto& r : reports) {
    out << r.name << ',' << fmt_ratio(r.HOTA()) << ',' << fmt_ratio(r.DetA()) << ',' << fmt_ratio(r.AssA()) << ','
        << fmt_ratio(r.IDF1()) << ',' << fmt_ratio(r.MOTA()) << ',' << r.clear.tp << ',' << r.clear.fp << ','
        << r.clear.fn << ',' << r.clear.idsw << '\n';
  }
  return out.str();
}

std::string format_text(std::span<const MetricReport> reports) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %9s %9s %9s %9s %9s %8s %8s %8s %6s\n", "sequence", "HOTA", "DetA", "AssA",
                "IDF1", "MOTA", "TP", "FP", "FN", "IDSW");
  out << line;
  auto pct = [](const std::optional<double>& v) {
    if (!v) return std::string("undef");
    char b[32];
    std::snprintf(b, sizeof(b), "%.2f", 100.0 * *v);
    return std::string(b);
  };
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%-28s %9s %9s %9s %9s %9s %8lld %8lld %8lld %6lld\n", r.name.c_str(),
                  pct(r.HOTA()).c_str(), pct(r.DetA()).c_str(), pct(r.AssA()).c_str(), pct(r.IDF1()).c_str(),
                  pct(r.MOTA()).c_str(), static_cast<long long>(r.clear.tp), static_cast<long long>(r.clear.fp),
                  static_cast<long long>(r.clear.fn), static_cast<long long>(r.clear.idsw));
    out << line;
  }
  return out.str();
}

}  // namespace moyolo::metrics
