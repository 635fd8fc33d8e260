// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "moyolo/box.hpp"

namespace moyolo {

/// Raised when identity bookkeeping is inconsistent. Indicates a bug, never bad input.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class QueryKind { Detect, Track };

struct QueryEntry {
  QueryKind kind = QueryKind::Detect;
  std::optional<std::int64_t> identity;  // set iff kind == Track
  std::optional<double> score;           // set after decoding
  int miss_count = 0;
};

struct Thresholds {
  double new_track = 0.5;  // detect -> track promotion
  double keep = 0.5;       // track considered re-observed
  double emit = 0.5;       // track written to results
  int miss_tolerance = 5;  // frames a track may stay below `keep`

  static constexpr int kNeverDrop = std::numeric_limits<int>::max();
};

/// Per-sequence identity counter starting at 1; identities are never reused.
class IdentityAllocator {
 public:
  std::int64_t allocate() { return next_++; }
  std::int64_t peek() const { return next_; }

 private:
  std::int64_t next_ = 1;
};

/// Outcome of one propagation step, index-aligned with the next query set.
struct PropagationPlan {
  std::vector<std::size_t> source;  // index into the previous set for each next entry
  std::vector<QueryEntry> next;
  std::size_t kept_tracks = 0;
  std::size_t promotions = 0;
  std::vector<std::int64_t> removed;
};

/// Track part of frame t+1 = surviving tracks of frame t followed by the
/// detect entries promoted at frame t. `scores` aligns with `entries`.
/// Detect entries above `new_track` get fresh identities; track entries above
/// `keep` reset their miss count; others count a miss and are dropped once the
/// count exceeds `miss_tolerance`.
PropagationPlan plan_propagation(std::span<const QueryEntry> entries, std::span<const double> scores,
                                 const Thresholds& thresholds, IdentityAllocator& ids);

/// Indices of track entries whose score exceeds `emit`, ordered by identity.
std::vector<std::size_t> emit_order(std::span<const QueryEntry> entries, double emit);

/// Throws InvariantViolation on duplicate or missing track identities.
void check_identities(std::span<const QueryEntry> entries);

/// Identity with its per-frame boxes.
struct TrackInstance {
  std::int64_t identity = 0;
  std::map<int, LabeledBox> history;  // frame -> box
  bool active = true;

  /// Frames must strictly increase.
  void record(int frame, const LabeledBox& box);
};

}  // namespace moyolo
