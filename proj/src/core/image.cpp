// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <string>

namespace moyolo {

namespace fs = std::filesystem;

Image::Image(int w, int h, std::array<std::uint8_t, 3> fill) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw std::invalid_argument("Image: non-positive size");
  rgb.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = fill[0];
    rgb[i + 1] = fill[1];
    rgb[i + 2] = fill[2];
  }
}

namespace {

// Reads the next header token, skipping whitespace and comments.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

std::mutex g_hook_mutex;
ImageLoaderHook g_hook;

}  // namespace

Image read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  if (next_token(in) != "P6") throw std::runtime_error(path.string() + ": not a binary PPM (P6)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in));
    h = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ": malformed PPM header");
  }
  if (w <= 0 || h <= 0 || maxval != 255) throw std::runtime_error(path.string() + ": unsupported PPM header");
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) {
    throw std::runtime_error(path.string() + ": truncated PPM data");
  }
  return img;
}

void write_ppm(const fs::path& path, const Image& image) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()), static_cast<std::streamsize>(image.rgb.size()));
}

void set_image_loader_hook(ImageLoaderHook hook) {
  std::lock_guard lock(g_hook_mutex);
  g_hook = std::move(hook);
}

bool has_image_loader_hook() {
  std::lock_guard lock(g_hook_mutex);
  return static_cast<bool>(g_hook);
}

Image load_image(const fs::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ppm") return read_ppm(path);
  ImageLoaderHook hook;
  {
    std::lock_guard lock(g_hook_mutex);
    hook = g_hook;
  }
  Image img;
  if (hook && hook(path, img)) return img;
  throw std::runtime_error("no decoder for " + path.string() + " (only PPM is built in)");
}

void draw_rectangle(Image& image, int x1, int y1, int x2, int y2, std::array<std::uint8_t, 3> color, int thickness) {
  auto put = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= image.width || y >= image.height) return;
    auto* p = image.pixel(x, y);
    p[0] = color[0];
    p[1] = color[1];
    p[2] = color[2];
  };
  for (int t = 0; t < thickness; ++t) {
    for (int x = x1; x < x2; ++x) {
      put(x, y1 + t);
      put(x, y2 - 1 - t);
    }
    for (int y = y1; y < y2; ++y) {
      put(x1 + t, y);
      put(x2 - 1 - t, y);
    }
  }
}

std::array<std::uint8_t, 3> identity_color(std::int64_t id) {
  // Golden-angle hue walk, full saturation.
  const double hue = std::fmod(static_cast<double>(id) * 137.508, 360.0) / 60.0;
  const double x = 1.0 - std::fabs(std::fmod(hue, 2.0) - 1.0);
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hue)) {
    case 0: r = 1, g = x; break;
    case 1: r = x, g = 1; break;
    case 2: g = 1, b = x; break;
    case 3: g = x, b = 1; break;
    case 4: r = x, b = 1; break;
    default: r = 1, b = x; break;
  }
  auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(40.0 + 215.0 * v)); };
  return {q(r), q(g), q(b)};
}

}  // namespace moyolo
