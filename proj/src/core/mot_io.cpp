// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/mot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "moyolo/log.hpp"

namespace moyolo {

namespace fs = std::filesystem;

std::size_t Tracks::box_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.size();
  return n;
}

void Tracks::ensure_frames(std::size_t count) {
  if (frames.size() < count) frames.resize(count);
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_number(std::string_view field, const std::string& origin, std::size_t line, int column) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || field.empty() || !std::isfinite(value)) {
    throw ParseError(origin, line, "field " + std::to_string(column + 1) + " is not a number: '" +
                                       std::string(field) + "'");
  }
  return value;
}

struct RawRow {
  int frame;
  std::int64_t id;
  PixelBox box;
  double conf;
  int class_id;
  double visibility;
};

template <typename Visitor>
void for_each_row(const std::string& text, const std::string& origin, Visitor&& visit) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string_view line = trim(std::string_view(text).substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() < 6) {
      throw ParseError(origin, line_no, "expected at least 6 comma-separated fields, got " +
                                            std::to_string(fields.size()));
    }
    std::vector<double> v;
    v.reserve(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      v.push_back(parse_number(fields[i], origin, line_no, static_cast<int>(i)));
    }
    RawRow row{};
    if (v[0] < 1 || v[0] != std::floor(v[0])) throw ParseError(origin, line_no, "frame must be an integer >= 1");
    if (v[1] < 1 || v[1] != std::floor(v[1])) throw ParseError(origin, line_no, "id must be an integer >= 1");
    row.frame = static_cast<int>(v[0]);
    row.id = static_cast<std::int64_t>(v[1]);
    row.box = {v[2], v[3], v[4], v[5]};
    row.conf = v.size() > 6 ? v[6] : 1.0;
    row.class_id = v.size() > 7 ? static_cast<int>(v[7]) : 1;
    row.visibility = v.size() > 8 ? v[8] : 1.0;
    if (row.box.width < 0 || row.box.height < 0) throw ParseError(origin, line_no, "negative box extent");
    visit(row, line_no);
    if (end == text.size()) break;
  }
}

void sort_frames(Tracks& t) {
  for (auto& f : t.frames) {
    std::stable_sort(f.begin(), f.end(), [](const TrackBox& a, const TrackBox& b) { return a.id < b.id; });
  }
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

Tracks parse_gt_text(const std::string& text, const GtFilter& filter, const std::string& origin) {
  Tracks tracks;
  for_each_row(text, origin, [&](RawRow row, std::size_t line_no) {
    if (filter.enabled && (row.conf == 0.0 || row.class_id != filter.keep_class)) return;
    if (row.box.width == 0.0 || row.box.height == 0.0) {
      log_warning(origin + ":" + std::to_string(line_no) + ": zero-extent box inflated to 1e-6");
      if (row.box.width == 0.0) row.box.width = 1e-6;
      if (row.box.height == 0.0) row.box.height = 1e-6;
    }
    tracks.ensure_frames(static_cast<std::size_t>(row.frame));
    auto& frame = tracks.frames[row.frame - 1];
    for (const auto& existing : frame) {
      if (existing.id == row.id) {
        throw ParseError(origin, line_no, "duplicate id " + std::to_string(row.id) + " in frame " +
                                              std::to_string(row.frame));
      }
    }
    frame.push_back({row.id, row.box, 1.0, row.visibility});
  });
  sort_frames(tracks);
  return tracks;
}

Tracks parse_gt(const fs::path& path, const GtFilter& filter) {
  return parse_gt_text(read_file(path), filter, path.string());
}

Tracks parse_results_text(const std::string& text, const std::string& origin) {
  Tracks tracks;
  for_each_row(text, origin, [&](RawRow row, std::size_t line_no) {
    tracks.ensure_frames(static_cast<std::size_t>(row.frame));
    auto& frame = tracks.frames[row.frame - 1];
    for (const auto& existing : frame) {
      if (existing.id == row.id) {
        throw ParseError(origin, line_no, "duplicate id " + std::to_string(row.id) + " in frame " +
                                              std::to_string(row.frame));
      }
    }
    frame.push_back({row.id, row.box, row.conf, 1.0});
  });
  sort_frames(tracks);
  return tracks;
}

Tracks parse_results(const fs::path& path) { return parse_results_text(read_file(path), path.string()); }

double quantize_score(double score) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", score);
  return std::strtod(buf, nullptr);
}

std::string format_results(const Tracks& tracks) {
  std::string out;
  char score[64];
  for (std::size_t f = 0; f < tracks.frames.size(); ++f) {
    auto frame = tracks.frames[f];
    std::sort(frame.begin(), frame.end(), [](const TrackBox& a, const TrackBox& b) { return a.id < b.id; });
    for (const auto& b : frame) {
      if (b.id < 1) throw std::invalid_argument("write_results: box without a positive identity");
      std::snprintf(score, sizeof(score), "%.6f", b.score);
      out += std::to_string(f + 1) + ',' + std::to_string(b.id) + ',' + format_double(b.box.left) + ',' +
             format_double(b.box.top) + ',' + format_double(b.box.width) + ',' + format_double(b.box.height) +
             ',' + score + ",-1,-1,-1\n";
    }
  }
  return out;
}

void write_results(const fs::path& path, const Tracks& tracks) {
  const std::string text = format_results(tracks);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_gt(const fs::path& path, const Tracks& tracks) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  char vis[32];
  for (std::size_t f = 0; f < tracks.frames.size(); ++f) {
    for (const auto& b : tracks.frames[f]) {
      std::snprintf(vis, sizeof(vis), "%.6f", b.visibility);
      out << (f + 1) << ',' << b.id << ',' << format_double(b.box.left) << ',' << format_double(b.box.top) << ','
          << format_double(b.box.width) << ',' << format_double(b.box.height) << ",1,1," << vis << '\n';
    }
  }
}

SequenceDescriptor parse_seqinfo(const fs::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::runtime_error("cannot read " + path.string() + ": " + e.message());
  }
  SequenceDescriptor d;
  try {
    const auto& s = tree.get_child("Sequence");
    d.name = s.get<std::string>("name");
    d.image_dir = s.get<std::string>("imDir", "img1");
    d.frame_rate = s.get<double>("frameRate", 30.0);
    d.frame_count = s.get<int>("seqLength");
    d.image_width = s.get<int>("imWidth");
    d.image_height = s.get<int>("imHeight");
    d.image_ext = s.get<std::string>("imExt", ".jpg");
  } catch (const boost::property_tree::ptree_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  if (d.frame_count < 1) throw std::runtime_error(path.string() + ": seqLength must be >= 1");
  if (d.image_width <= 0 || d.image_height <= 0) throw std::runtime_error(path.string() + ": bad image size");
  return d;
}

void write_seqinfo(const fs::path& path, const SequenceDescriptor& d) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "[Sequence]\n"
      << "name=" << d.name << '\n'
      << "imDir=" << d.image_dir << '\n'
      << "frameRate=" << d.frame_rate << '\n'
      << "seqLength=" << d.frame_count << '\n'
      << "imWidth=" << d.image_width << '\n'
      << "imHeight=" << d.image_height << '\n'
      << "imExt=" << d.image_ext << '\n';
}

fs::path Sequence::image_path(int local_frame) const {
  char name[32];
  std::snprintf(name, sizeof(name), "%06d", local_frame + first_frame - 1);
  return root / descriptor.image_dir / (std::string(name) + descriptor.image_ext);
}

Sequence load_sequence(const fs::path& dir, const GtFilter& filter) {
  Sequence seq;
  seq.root = dir;
  seq.descriptor = parse_seqinfo(dir / "seqinfo.ini");
  const fs::path gt_path = dir / "gt" / "gt.txt";
  if (fs::exists(gt_path)) seq.gt = parse_gt(gt_path, filter);
  if (seq.gt.frame_count() > static_cast<std::size_t>(seq.descriptor.frame_count)) {
    throw std::runtime_error(gt_path.string() + ": frames beyond seqLength");
  }
  seq.gt.ensure_frames(static_cast<std::size_t>(seq.descriptor.frame_count));
  return seq;
}

std::vector<Sequence> load_sequences(const fs::path& root, const GtFilter& filter) {
  if (fs::exists(root / "seqinfo.ini")) return {load_sequence(root, filter)};
  std::vector<fs::path> dirs;
  if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "seqinfo.ini")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::vector<Sequence> out;
  for (const auto& d : dirs) out.push_back(load_sequence(d, filter));
  return out;
}

namespace {

Sequence slice(const Sequence& src, int first, int last, const std::string& suffix) {
  Sequence out;
  out.root = src.root;
  out.descriptor = src.descriptor;
  out.descriptor.name = src.descriptor.name + suffix;
  out.descriptor.frame_count = last - first + 1;
  out.first_frame = src.first_frame + first - 1;

  std::map<std::int64_t, std::int64_t> remap;
  for (int f = first; f <= last; ++f) {
    if (static_cast<std::size_t>(f) > src.gt.frames.size()) break;
    for (const auto& b : src.gt.frames[f - 1]) remap.emplace(b.id, 0);
  }
  std::int64_t next = 1;
  for (auto& [orig, rebased] : remap) rebased = next++;

  out.gt.frames.resize(static_cast<std::size_t>(out.descriptor.frame_count));
  for (int f = first; f <= last; ++f) {
    if (static_cast<std::size_t>(f) > src.gt.frames.size()) break;
    for (auto b : src.gt.frames[f - 1]) {
      b.id = remap.at(b.id);
      out.gt.frames[f - first].push_back(b);
    }
  }
  sort_frames(out.gt);
  return out;
}

}  // namespace

std::pair<Sequence, Sequence> half_split(const Sequence& sequence) {
  const int total = sequence.descriptor.frame_count;
  if (total < 2) throw std::invalid_argument("half_split: sequence needs at least 2 frames");
  const int train_last = total / 2;
  return {slice(sequence, 1, train_last, "-train-half"), slice(sequence, train_last + 1, total, "-val-half")};
}

std::vector<Sequence> select_split(const std::vector<Sequence>& sequences, const std::string& split) {
  if (split == "all") return sequences;
  if (split != "first_half" && split != "second_half") throw std::invalid_argument("unknown split '" + split + "'");
  std::vector<Sequence> out;
  for (const auto& s : sequences) {
    auto halves = half_split(s);
    out.push_back(split == "first_half" ? std::move(halves.first) : std::move(halves.second));
  }
  return out;
}

}  // namespace moyolo
