// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/model/opencv_loader.hpp"

#include <cstring>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "moyolo/image.hpp"

namespace moyolo {

bool install_opencv_loader() {
  set_image_loader_hook([](const std::filesystem::path& path, Image& out) {
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty()) return false;
    out = Image(bgr.cols, bgr.rows);
    for (int y = 0; y < bgr.rows; ++y) {
      const auto* row = bgr.ptr<cv::Vec3b>(y);
      for (int x = 0; x < bgr.cols; ++x) {
        auto* px = out.pixel(x, y);
        px[0] = row[x][2];
        px[1] = row[x][1];
        px[2] = row[x][0];
      }
    }
    return true;
  });
  return true;
}

}  // namespace moyolo
