// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "genodkit/error.hpp"

namespace genodkit {

BBox box_from_corners(double x1, double y1, double x2, double y2) noexcept {
  return BBox{x1, y1, x2 - x1, y2 - y1};
}

bool is_valid(const BBox& box) noexcept {
  return std::isfinite(box.x) && std::isfinite(box.y) && std::isfinite(box.w) &&
         std::isfinite(box.h) && box.w > 0.0 && box.h > 0.0;
}

double iou_unchecked(const BBox& a, const BBox& b) noexcept {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  // Areas from the same corner differences as the intersection, so that
  // identical boxes give exactly 1.
  const double inter = iw * ih;
  const double uni =
      (a.right() - a.x) * (a.bottom() - a.y) + (b.right() - b.x) * (b.bottom() - b.y) - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double iou(const BBox& a, const BBox& b) {
  if (!is_valid(a) || !is_valid(b)) {
    throw Error(ErrorCode::degenerate_box, "degenerate box: iou requires positive area");
  }
  return iou_unchecked(a, b);
}

std::optional<BBox> clamp_to_image(const BBox& box, double width, double height) noexcept {
  if (box.x >= 0.0 && box.y >= 0.0 && box.right() <= width && box.bottom() <= height) {
    return box;
  }
  const double x1 = std::clamp(box.x, 0.0, width);
  const double y1 = std::clamp(box.y, 0.0, height);
  const double x2 = std::clamp(box.right(), 0.0, width);
  const double y2 = std::clamp(box.bottom(), 0.0, height);
  if (x2 <= x1 || y2 <= y1) {
    return std::nullopt;
  }
  return box_from_corners(x1, y1, x2, y2);
}

}  // namespace genodkit
