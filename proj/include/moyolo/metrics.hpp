// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moyolo/mot_io.hpp"

namespace moyolo::metrics {

/// Ground truth and predictions for one sequence, pixel ltwh boxes.
struct SequenceEval {
  std::string name;
  Tracks gt;
  Tracks pred;
  ImageSize image{0.0, 0.0};

  /// Frame count after padding both sides to the same length.
  std::size_t frame_count() const;
};

double iou_ltwh(const PixelBox& a, const PixelBox& b);

struct ClearResult {
  std::optional<double> mota;  // empty when there is no ground truth
  std::int64_t tp = 0, fp = 0, fn = 0, idsw = 0, gt_total = 0;
};

struct IdentityResult {
  std::optional<double> idf1;
  std::int64_t idtp = 0, idfp = 0, idfn = 0;
};

inline constexpr std::size_t kAlphaCount = 19;
std::array<double, kAlphaCount> hota_alphas();

struct HotaResult {
  std::optional<double> hota, deta, assa;  // averaged over the alpha levels
  std::array<double, kAlphaCount> hota_alpha{}, deta_alpha{}, assa_alpha{};
  std::array<std::int64_t, kAlphaCount> tp{}, fn{}, fp{};
};

ClearResult clear_mot(const SequenceEval& seq, double iou_gate = 0.5);
IdentityResult idf1(const SequenceEval& seq, double iou_gate = 0.5);
HotaResult hota(const SequenceEval& seq);

struct MetricReport {
  std::string name;
  ClearResult clear;
  IdentityResult identity;
  HotaResult hota;

  std::optional<double> HOTA() const { return hota.hota; }
  std::optional<double> DetA() const { return hota.deta; }
  std::optional<double> AssA() const { return hota.assa; }
  std::optional<double> IDF1() const { return identity.idf1; }
  std::optional<double> MOTA() const { return clear.mota; }
};

MetricReport evaluate(const SequenceEval& seq);

/// Combines sequences by summing raw counts before forming ratios; AssA is
/// TP-weighted per alpha as in the per-sequence definition.
MetricReport combine(std::span<const MetricReport> reports, const std::string& name = "COMBINED");

/// Machine-readable table, one row per report. Columns: name, HOTA, DetA,
/// AssA, IDF1, MOTA, TP, FP, FN, IDSW. Undefined ratios print as "undefined".
std::string format_table(std::span<const MetricReport> reports);
/// Human-readable summary.
std::string format_text(std::span<const MetricReport> reports);

}  // namespace moyolo::metrics
