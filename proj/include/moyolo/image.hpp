// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

namespace moyolo {

/// Interleaved 8-bit RGB image.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(int w, int h, std::array<std::uint8_t, 3> fill = {0, 0, 0});

  std::uint8_t* pixel(int x, int y) { return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x); }
  const std::uint8_t* pixel(int x, int y) const {
    return rgb.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  bool operator==(const Image&) const = default;
};

Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& image);

/// Decoder for formats other than PPM (e.g. JPEG). Registered by builds that
/// link an image codec library; returns false when the format is unsupported.
using ImageLoaderHook = std::function<bool(const std::filesystem::path&, Image&)>;
void set_image_loader_hook(ImageLoaderHook hook);
bool has_image_loader_hook();

/// PPM natively; everything else through the registered hook.
Image load_image(const std::filesystem::path& path);

/// Draws a rectangle outline (x1, y1 inclusive, x2, y2 exclusive), clipped.
void draw_rectangle(Image& image, int x1, int y1, int x2, int y2, std::array<std::uint8_t, 3> color,
                    int thickness = 2);

/// Distinct saturated color per identity.
std::array<std::uint8_t, 3> identity_color(std::int64_t id);

}  // namespace moyolo
