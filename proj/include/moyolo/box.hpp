// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace moyolo {

/// Axis-aligned box in normalized center format. Coordinates are fractions of
/// the image width/height. Construction clamps drift of up to 1e-6 outside
/// the valid range and rejects anything larger.
class BoundingBox {
 public:
  static constexpr double kClampTolerance = 1e-6;
  static constexpr double kMinExtent = 1e-6;

  BoundingBox() : BoundingBox(0.5, 0.5, 1.0, 1.0) {}
  BoundingBox(double cx, double cy, double w, double h);

  /// Builds from corner form (x1, y1, x2, y2), normalized.
  static BoundingBox from_corners(double x1, double y1, double x2, double y2);

  double cx() const { return cx_; }
  double cy() const { return cy_; }
  double w() const { return w_; }
  double h() const { return h_; }
  double area() const { return w_ * h_; }

  std::array<double, 4> cxcywh() const { return {cx_, cy_, w_, h_}; }
  std::array<double, 4> corners() const {
    return {cx_ - 0.5 * w_, cy_ - 0.5 * h_, cx_ + 0.5 * w_, cy_ + 0.5 * h_};
  }

  bool operator==(const BoundingBox&) const = default;

 private:
  double cx_, cy_, w_, h_;
};

struct LabeledBox {
  BoundingBox box;
  int class_id = 1;
  double score = 1.0;
  std::optional<std::int64_t> identity;

  bool operator==(const LabeledBox&) const = default;
};

double iou(const BoundingBox& a, const BoundingBox& b);
double giou(const BoundingBox& a, const BoundingBox& b);

/// GIoU together with its gradient w.r.t. (a.cx, a.cy, a.w, a.h, b.cx, b.cy,
/// b.w, b.h). Non-differentiable where corners coincide; the returned value
/// is then a one-sided derivative.
struct GiouGradient {
  double value;
  std::array<double, 8> grad;
};
GiouGradient giou_with_gradient(const std::array<double, 4>& a, const std::array<double, 4>& b);

/// Unclamped GIoU over raw cxcywh quadruples; used by the gradient path.
double giou_raw(const std::array<double, 4>& a, const std::array<double, 4>& b);

enum class BoxFormat { CxcywhNormalized, XyxyPixels, LtwhPixels };

BoxFormat parse_box_format(std::string_view tag);
std::string_view box_format_name(BoxFormat format);

struct ImageSize {
  double width;
  double height;
};

/// Affine conversion between box encodings. Pixel formats need the image size.
std::array<double, 4> convert(const std::array<double, 4>& coords, BoxFormat from, BoxFormat to,
                              ImageSize image);

/// Convenience for the common MOTChallenge direction; inflates zero extents.
BoundingBox box_from_ltwh(double left, double top, double width, double height, ImageSize image);
std::array<double, 4> box_to_ltwh(const BoundingBox& box, ImageSize image);

}  // namespace moyolo
