// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace moyolo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "true/false");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(key, trim(item)));
  if (out.empty()) bad_value(key, v, "a comma-separated integer list");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

std::string fmt(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  std::string key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define MOYOLO_INT(sec, name, member)                                                                     \
  Field {                                                                                                 \
    sec "." name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_int(k, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                                      \
  }
#define MOYOLO_DOUBLE(sec, name, member)                                                                     \
  Field {                                                                                                    \
    sec "." name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_double(k, v); }, \
        [](const RunConfig& c) { return fmt(c.member); }                                                    \
  }
#define MOYOLO_BOOL(sec, name, member)                                                                     \
  Field {                                                                                                  \
    sec "." name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_bool(k, v); }, \
        [](const RunConfig& c) { return fmt_bool(c.member); }                                             \
  }
#define MOYOLO_STRING(sec, name, member)                                                            \
  Field {                                                                                           \
    sec "." name, [](RunConfig& c, const std::string&, const std::string& v) { c.member = v; },   \
        [](const RunConfig& c) { return c.member; }                                                \
  }
#define MOYOLO_LIST(sec, name, member)                                                                         \
  Field {                                                                                                      \
    sec "." name, [](RunConfig& c, const std::string& k, const std::string& v) { c.member = to_int_list(k, v); }, \
        [](const RunConfig& c) { return fmt(c.member); }                                                      \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      MOYOLO_INT("model", "input_width", model.input_width),
      MOYOLO_INT("model", "input_height", model.input_height),
      MOYOLO_INT("model", "stem_channels", model.stem_channels),
      MOYOLO_LIST("model", "stage_depths", model.stage_depths),
      MOYOLO_DOUBLE("model", "width_multiple", model.width_multiple),
      MOYOLO_DOUBLE("model", "depth_multiple", model.depth_multiple),
      MOYOLO_LIST("model", "pyramid_channels", model.pyramid_channels),
      MOYOLO_INT("model", "hidden_dim", model.hidden_dim),
      MOYOLO_INT("model", "encoder_heads", model.encoder_heads),
      MOYOLO_INT("model", "encoder_ffn_ratio", model.encoder_ffn_ratio),
      MOYOLO_INT("model", "decoder_layers", model.decoder_layers),
      MOYOLO_INT("model", "decoder_heads", model.decoder_heads),
      MOYOLO_INT("model", "decoder_points", model.decoder_points),
      MOYOLO_INT("model", "decoder_ffn_dim", model.decoder_ffn_dim),
      MOYOLO_INT("model", "num_queries", model.num_queries),
      MOYOLO_INT("model", "num_classes", model.num_classes),
      MOYOLO_INT("model", "tan_heads", model.tan_heads),
      MOYOLO_INT("model", "tan_ffn_dim", model.tan_ffn_dim),
      MOYOLO_BOOL("model", "detach_refs_between_layers", model.detach_refs_between_layers),

      MOYOLO_DOUBLE("tracker", "new_track", tracker.new_track),
      MOYOLO_DOUBLE("tracker", "keep", tracker.keep),
      MOYOLO_DOUBLE("tracker", "emit", tracker.emit),
      MOYOLO_INT("tracker", "miss_tolerance", tracker.miss_tolerance),

      MOYOLO_DOUBLE("loss", "weight_cls", loss.weight_cls),
      MOYOLO_DOUBLE("loss", "weight_l1", loss.weight_l1),
      MOYOLO_DOUBLE("loss", "weight_giou", loss.weight_giou),
      MOYOLO_DOUBLE("loss", "focal_alpha", loss.focal_alpha),
      MOYOLO_DOUBLE("loss", "focal_gamma", loss.focal_gamma),
      MOYOLO_BOOL("loss", "aux_loss", loss.aux_loss),

      MOYOLO_INT("train", "stage", train.stage),
      MOYOLO_DOUBLE("train", "lr", train.lr),
      MOYOLO_DOUBLE("train", "weight_decay", train.weight_decay),
      MOYOLO_INT("train", "iterations", train.iterations),
      MOYOLO_DOUBLE("train", "lr_drop_fraction", train.lr_drop_fraction),
      MOYOLO_DOUBLE("train", "lr_drop_factor", train.lr_drop_factor),
      MOYOLO_DOUBLE("train", "grad_clip", train.grad_clip),
      MOYOLO_INT("train", "clip_length", train.clip_length),
      MOYOLO_INT("train", "max_stride", train.max_stride),
      MOYOLO_INT("train", "batch_size", train.batch_size),
      Field{"train.seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.train.seed = to_u64(k, v); },
            [](const RunConfig& c) { return std::to_string(c.train.seed); }},
      MOYOLO_STRING("train", "dataset", train.dataset),
      Field{"train.split",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              if (v != "all" && v != "first_half" && v != "second_half")
                throw ConfigError("bad value for '" + k + "': '" + v + "' (all, first_half, second_half)");
              c.train.split = v;
            },
            [](const RunConfig& c) { return c.train.split; }},
      MOYOLO_STRING("train", "stage1_checkpoint", train.stage1_checkpoint),
      MOYOLO_STRING("train", "output_checkpoint", train.output_checkpoint),
      MOYOLO_STRING("train", "resume_checkpoint", train.resume_checkpoint),
      MOYOLO_STRING("train", "log_path", train.log_path),
      MOYOLO_BOOL("train", "augment", train.augment),
      Field{"train.min_crop_scale",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const double x = to_double(k, v);
              if (!(x > 0.0 && x <= 1.0)) throw ConfigError("bad value for '" + k + "': '" + v + "' (0 < x <= 1)");
              c.train.min_crop_scale = x;
            },
            [](const RunConfig& c) { return fmt(c.train.min_crop_scale); }},
      MOYOLO_DOUBLE("train", "track_drop_prob", train.track_drop_prob),
      MOYOLO_DOUBLE("train", "track_insert_prob", train.track_insert_prob),
      MOYOLO_BOOL("train", "propagate_tracks", train.propagate_tracks),
      MOYOLO_BOOL("train", "detach_boxes_between_frames", train.detach_boxes_between_frames),
      MOYOLO_INT("train", "log_every", train.log_every),
      MOYOLO_INT("train", "threads", train.threads),
  };
  return table;
}

#undef MOYOLO_INT
#undef MOYOLO_DOUBLE
#undef MOYOLO_BOOL
#undef MOYOLO_STRING
#undef MOYOLO_LIST

}  // namespace

void set_value(RunConfig& config, const std::string& dotted_key, const std::string& value) {
  for (const auto& f : fields()) {
    if (f.key == dotted_key) {
      f.set(config, dotted_key, trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key '" + dotted_key + "'");
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  }
  set_value(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(origin + ": key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) set_value(config, section + "." + key, value.data());
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string format_config(const RunConfig& config) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const auto section = f.key.substr(0, dot);
    if (section != current) {
      out += (current.empty() ? "" : "\n") + std::string("[") + section + "]\n";
      current = section;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(config) + "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

void validate(const ModelConfig& m) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("model config: " + what);
  };
  require(m.input_width > 0 && m.input_width % 32 == 0, "input_width must be a positive multiple of 32");
  require(m.input_height > 0 && m.input_height % 32 == 0, "input_height must be a positive multiple of 32");
  require(m.stage_depths.size() == 4, "stage_depths needs 4 entries");
  require(m.pyramid_channels.size() == 3, "pyramid_channels needs 3 entries");
  require(m.stem_channels > 0 && m.width_multiple > 0 && m.depth_multiple > 0, "widths must be positive");
  require(m.hidden_dim > 0 && m.hidden_dim % 4 == 0, "hidden_dim must be divisible by 4");
  require(m.hidden_dim % m.encoder_heads == 0, "hidden_dim must be divisible by encoder_heads");
  require(m.hidden_dim % m.decoder_heads == 0, "hidden_dim must be divisible by decoder_heads");
  require(m.hidden_dim % m.tan_heads == 0, "hidden_dim must be divisible by tan_heads");
  require(m.decoder_layers >= 1, "decoder_layers must be >= 1");
  require(m.decoder_points >= 1, "decoder_points must be >= 1");
  require(m.num_queries >= 1, "num_queries must be >= 1");
  require(m.num_classes >= 1, "num_classes must be >= 1");
}

}  // namespace moyolo
