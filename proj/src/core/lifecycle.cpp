// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/lifecycle.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace moyolo {

void check_identities(std::span<const QueryEntry> entries) {
  std::set<std::int64_t> seen;
  for (const auto& e : entries) {
    if (e.kind == QueryKind::Detect) {
      if (e.identity) throw InvariantViolation("detect query carries an identity");
      continue;
    }
    if (!e.identity) throw InvariantViolation("track query without identity");
    if (!seen.insert(*e.identity).second) {
      throw InvariantViolation("identity collision on " + std::to_string(*e.identity));
    }
  }
}

PropagationPlan plan_propagation(std::span<const QueryEntry> entries, std::span<const double> scores,
                                 const Thresholds& th, IdentityAllocator& ids) {
  if (entries.size() != scores.size()) {
    throw std::invalid_argument("plan_propagation: scores not aligned with queries");
  }
  check_identities(entries);
  PropagationPlan plan;

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.kind != QueryKind::Track) continue;
    QueryEntry next = e;
    next.score = scores[i];
    if (scores[i] > th.keep) {
      next.miss_count = 0;
    } else {
      next.miss_count = e.miss_count + 1;
      if (next.miss_count > th.miss_tolerance) {
        plan.removed.push_back(*e.identity);
        continue;
      }
    }
    plan.source.push_back(i);
    plan.next.push_back(next);
    ++plan.kept_tracks;
  }

  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.kind != QueryKind::Detect || !(scores[i] > th.new_track)) continue;
    QueryEntry next;
    next.kind = QueryKind::Track;
    next.identity = ids.allocate();
    next.score = scores[i];
    next.miss_count = 0;
    plan.source.push_back(i);
    plan.next.push_back(next);
    ++plan.promotions;
  }

  check_identities(plan.next);
  return plan;
}

std::vector<std::size_t> emit_order(std::span<const QueryEntry> entries, double emit) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.kind == QueryKind::Track && e.score && *e.score > emit) out.push_back(i);
  }
  std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return *entries[a].identity < *entries[b].identity; });
  return out;
}

void TrackInstance::record(int frame, const LabeledBox& box) {
  if (!history.empty() && history.rbegin()->first >= frame) {
    throw InvariantViolation("track " + std::to_string(identity) + ": frames must strictly increase");
  }
  history.emplace(frame, box);
}

}  // namespace moyolo
