// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "moyolo/box.hpp"

namespace moyolo {

/// Left-top-width-height in pixels, the MOTChallenge box convention.
struct PixelBox {
  double left = 0.0;
  double top = 0.0;
  double width = 0.0;
  double height = 0.0;

  bool operator==(const PixelBox&) const = default;
};

struct TrackBox {
  std::int64_t id = 0;
  PixelBox box;
  double score = 1.0;
  double visibility = 1.0;

  bool operator==(const TrackBox&) const = default;
};

/// Per-frame boxes; frames[i] holds frame i + 1.
struct Tracks {
  std::vector<std::vector<TrackBox>> frames;

  std::size_t frame_count() const { return frames.size(); }
  std::size_t box_count() const;
  /// Grows (never shrinks) to hold `count` frames.
  void ensure_frames(std::size_t count);
  bool operator==(const Tracks&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct GtFilter {
  bool enabled = true;
  int keep_class = 1;  // pedestrian
};

/// Ground truth: frame, id, left, top, width, height, consider, class, visibility.
/// Lines with consider = 0 or another class are dropped when the filter is on.
Tracks parse_gt(const std::filesystem::path& path, const GtFilter& filter = {});
Tracks parse_gt_text(const std::string& text, const GtFilter& filter = {}, const std::string& origin = "<text>");

/// Results: frame, id, left, top, width, height, score, -1, -1, -1.
Tracks parse_results(const std::filesystem::path& path);
Tracks parse_results_text(const std::string& text, const std::string& origin = "<text>");

void write_results(const std::filesystem::path& path, const Tracks& tracks);
std::string format_results(const Tracks& tracks);

/// Rounds a score to the 6 decimals the results format keeps.
double quantize_score(double score);

void write_gt(const std::filesystem::path& path, const Tracks& tracks);

struct SequenceDescriptor {
  std::string name;
  std::string image_dir = "img1";
  double frame_rate = 30.0;
  int frame_count = 1;
  int image_width = 0;
  int image_height = 0;
  std::string image_ext = ".jpg";

  ImageSize image_size() const {
    return {static_cast<double>(image_width), static_cast<double>(image_height)};
  }
};

SequenceDescriptor parse_seqinfo(const std::filesystem::path& path);
void write_seqinfo(const std::filesystem::path& path, const SequenceDescriptor& desc);

/// One MOTChallenge sequence directory: seqinfo.ini, img1/, gt/gt.txt.
struct Sequence {
  SequenceDescriptor descriptor;
  std::filesystem::path root;
  Tracks gt;
  int first_frame = 1;  // original number of local frame 1 (after splitting)

  std::filesystem::path image_path(int local_frame) const;
};

Sequence load_sequence(const std::filesystem::path& dir, const GtFilter& filter = {});
/// All sequence directories (those holding a seqinfo.ini) below `root`, sorted by name.
std::vector<Sequence> load_sequences(const std::filesystem::path& root, const GtFilter& filter = {});

/// First floor(F/2) frames train, the rest evaluate; identities are renumbered
/// 1..K within each half in ascending order of the original id.
std::pair<Sequence, Sequence> half_split(const Sequence& sequence);

/// "all" keeps the sequences, "first_half" / "second_half" take that half
/// of each; anything else throws std::invalid_argument.
std::vector<Sequence> select_split(const std::vector<Sequence>& sequences, const std::string& split);

}  // namespace moyolo
