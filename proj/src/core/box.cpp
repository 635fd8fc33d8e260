// Copyright (C) 2026 moyolo contributors
// SPDX-License-Identifier: Apache-2.0
//

#include "moyolo/box.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace moyolo {

namespace {

double clamp_coordinate(double v, double lo, double hi, const char* name) {
  if (!std::isfinite(v)) {
    throw std::invalid_argument(std::string("BoundingBox: non-finite ") + name);
  }
  if (v < lo - BoundingBox::kClampTolerance || v > hi + BoundingBox::kClampTolerance) {
    throw std::invalid_argument(std::string("BoundingBox: ") + name + " = " + std::to_string(v) +
                                " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return std::clamp(v, lo, hi);
}

struct Corners {
  double x1, y1, x2, y2;
};

Corners corners_of(const std::array<double, 4>& b) {
  return {b[0] - 0.5 * b[2], b[1] - 0.5 * b[3], b[0] + 0.5 * b[2], b[1] + 0.5 * b[3]};
}

}  // namespace

BoundingBox::BoundingBox(double cx, double cy, double w, double h)
    : cx_(clamp_coordinate(cx, 0.0, 1.0, "cx")),
      cy_(clamp_coordinate(cy, 0.0, 1.0, "cy")),
      w_(clamp_coordinate(w, 0.0, 1.0, "w")),
      h_(clamp_coordinate(h, 0.0, 1.0, "h")) {
  if (w_ <= 0.0 || h_ <= 0.0) {
    throw std::invalid_argument("BoundingBox: zero extent");
  }
}

BoundingBox BoundingBox::from_corners(double x1, double y1, double x2, double y2) {
  return BoundingBox(0.5 * (x1 + x2), 0.5 * (y1 + y2), x2 - x1, y2 - y1);
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const auto ca = a.corners();
  const auto cb = b.corners();
  const double iw = std::max(0.0, std::min(ca[2], cb[2]) - std::max(ca[0], cb[0]));
  const double ih = std::max(0.0, std::min(ca[3], cb[3]) - std::max(ca[1], cb[1]));
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double giou_raw(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  const Corners ca = corners_of(a);
  const Corners cb = corners_of(b);
  const double iw = std::max(0.0, std::min(ca.x2, cb.x2) - std::max(ca.x1, cb.x1));
  const double ih = std::max(0.0, std::min(ca.y2, cb.y2) - std::max(ca.y1, cb.y1));
  const double inter = iw * ih;
  const double uni = a[2] * a[3] + b[2] * b[3] - inter;
  const double enclosing =
      (std::max(ca.x2, cb.x2) - std::min(ca.x1, cb.x1)) * (std::max(ca.y2, cb.y2) - std::min(ca.y1, cb.y1));
  return inter / uni - (enclosing - uni) / enclosing;
}

double giou(const BoundingBox& a, const BoundingBox& b) { return giou_raw(a.cxcywh(), b.cxcywh()); }

GiouGradient giou_with_gradient(const std::array<double, 4>& a, const std::array<double, 4>& b) {
  const Corners ca = corners_of(a);
  const Corners cb = corners_of(b);

  // Derivatives are accumulated in corner space: index 0..3 = a(x1,y1,x2,y2),
  // 4..7 = b(x1,y1,x2,y2).
  std::array<double, 8> d_inter{};
  std::array<double, 8> d_encl{};

  const double ix1 = std::max(ca.x1, cb.x1), ix2 = std::min(ca.x2, cb.x2);
  const double iy1 = std::max(ca.y1, cb.y1), iy2 = std::min(ca.y2, cb.y2);
  const double iw = std::max(0.0, ix2 - ix1);
  const double ih = std::max(0.0, iy2 - iy1);
  const double inter = iw * ih;

  if (iw > 0.0 && ih > 0.0) {
    // d iw
    const int x1_owner = ca.x1 >= cb.x1 ? 0 : 4;
    const int x2_owner = ca.x2 <= cb.x2 ? 2 : 6;
    const int y1_owner = ca.y1 >= cb.y1 ? 1 : 5;
    const int y2_owner = ca.y2 <= cb.y2 ? 3 : 7;
    d_inter[x1_owner] -= ih;
    d_inter[x2_owner] += ih;
    d_inter[y1_owner] -= iw;
    d_inter[y2_owner] += iw;
  }

  const double ew = std::max(ca.x2, cb.x2) - std::min(ca.x1, cb.x1);
  const double eh = std::max(ca.y2, cb.y2) - std::min(ca.y1, cb.y1);
  const double enclosing = ew * eh;
  {
    const int x1_owner = ca.x1 <= cb.x1 ? 0 : 4;
    const int x2_owner = ca.x2 >= cb.x2 ? 2 : 6;
    const int y1_owner = ca.y1 <= cb.y1 ? 1 : 5;
    const int y2_owner = ca.y2 >= cb.y2 ? 3 : 7;
    d_encl[x1_owner] -= eh;
    d_encl[x2_owner] += eh;
    d_encl[y1_owner] -= ew;
    d_encl[y2_owner] += ew;
  }

  const double area_a = a[2] * a[3];
  const double area_b = b[2] * b[3];
  const double uni = area_a + area_b - inter;
  const double value = inter / uni - 1.0 + uni / enclosing;

  // giou = I/U - 1 + U/C  with U = Aa + Ab - I
  const double dg_dI = 1.0 / uni;
  const double dg_dU = -inter / (uni * uni) + 1.0 / enclosing;
  const double dg_dC = -uni / (enclosing * enclosing);

  std::array<double, 8> corner_grad{};
  for (std::size_t k = 0; k < 8; ++k) {
    corner_grad[k] = dg_dI * d_inter[k] + dg_dU * (-d_inter[k]) + dg_dC * d_encl[k];
  }

  GiouGradient out{value, {}};
  for (int box = 0; box < 2; ++box) {
    const int o = box * 4;
    const auto& src = box == 0 ? a : b;
    const double gx1 = corner_grad[o + 0], gy1 = corner_grad[o + 1];
    const double gx2 = corner_grad[o + 2], gy2 = corner_grad[o + 3];
    out.grad[o + 0] = gx1 + gx2;
    out.grad[o + 1] = gy1 + gy2;
    out.grad[o + 2] = 0.5 * (gx2 - gx1);
    out.grad[o + 3] = 0.5 * (gy2 - gy1);
    // area terms enter only through U
    out.grad[o + 2] += dg_dU * src[3];
    out.grad[o + 3] += dg_dU * src[2];
  }
  return out;
}

BoxFormat parse_box_format(std::string_view tag) {
  if (tag == "cxcywh") return BoxFormat::CxcywhNormalized;
  if (tag == "xyxy") return BoxFormat::XyxyPixels;
  if (tag == "ltwh") return BoxFormat::LtwhPixels;
  throw std::invalid_argument("unknown box format '" + std::string(tag) + "'");
}

std::string_view box_format_name(BoxFormat format) {
  switch (format) {
    case BoxFormat::CxcywhNormalized: return "cxcywh";
    case BoxFormat::XyxyPixels: return "xyxy";
    case BoxFormat::LtwhPixels: return "ltwh";
  }
  throw std::invalid_argument("unknown box format");
}

std::array<double, 4> convert(const std::array<double, 4>& c, BoxFormat from, BoxFormat to, ImageSize image) {
  if (from != BoxFormat::CxcywhNormalized || to != BoxFormat::CxcywhNormalized) {
    if (!(image.width > 0.0) || !(image.height > 0.0)) {
      throw std::invalid_argument("convert: pixel formats need a positive image size");
    }
  }
  // Everything goes through pixel xyxy.
  std::array<double, 4> xyxy{};
  switch (from) {
    case BoxFormat::CxcywhNormalized:
      xyxy = {(c[0] - 0.5 * c[2]) * image.width, (c[1] - 0.5 * c[3]) * image.height,
              (c[0] + 0.5 * c[2]) * image.width, (c[1] + 0.5 * c[3]) * image.height};
      if (to == BoxFormat::CxcywhNormalized) return c;
      break;
    case BoxFormat::XyxyPixels:
      xyxy = c;
      break;
    case BoxFormat::LtwhPixels:
      xyxy = {c[0], c[1], c[0] + c[2], c[1] + c[3]};
      break;
  }
  switch (to) {
    case BoxFormat::CxcywhNormalized:
      return {0.5 * (xyxy[0] + xyxy[2]) / image.width, 0.5 * (xyxy[1] + xyxy[3]) / image.height,
              (xyxy[2] - xyxy[0]) / image.width, (xyxy[3] - xyxy[1]) / image.height};
    case BoxFormat::XyxyPixels:
      return xyxy;
    case BoxFormat::LtwhPixels:
      return {xyxy[0], xyxy[1], xyxy[2] - xyxy[0], xyxy[3] - xyxy[1]};
  }
  throw std::invalid_argument("unknown box format");
}

BoundingBox box_from_ltwh(double left, double top, double width, double height, ImageSize image) {
  // Crop to the image first; MOTChallenge boxes routinely extend past the border.
  double x1 = std::clamp(left, 0.0, image.width);
  double y1 = std::clamp(top, 0.0, image.height);
  double x2 = std::clamp(left + width, 0.0, image.width);
  double y2 = std::clamp(top + height, 0.0, image.height);
  const double min_w = BoundingBox::kMinExtent * image.width;
  const double min_h = BoundingBox::kMinExtent * image.height;
  if (x2 - x1 < min_w) {
    x2 = std::min(x1 + min_w, image.width);
    x1 = x2 - min_w;
  }
  if (y2 - y1 < min_h) {
    y2 = std::min(y1 + min_h, image.height);
    y1 = y2 - min_h;
  }
  const auto n = convert({x1, y1, x2, y2}, BoxFormat::XyxyPixels, BoxFormat::CxcywhNormalized, image);
  return BoundingBox(n[0], n[1], n[2], n[3]);
}

std::array<double, 4> box_to_ltwh(const BoundingBox& box, ImageSize image) {
  return convert(box.cxcywh(), BoxFormat::CxcywhNormalized, BoxFormat::LtwhPixels, image);
}

}  // namespace moyolo
