// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <optional>

namespace genodkit {

/// Axis-aligned box in pixels, top-left origin.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const noexcept { return x + w; }
  double bottom() const noexcept { return y + h; }
  double area() const noexcept { return w * h; }

  friend bool operator==(const BBox&, const BBox&) = default;
  friend auto operator<=>(const BBox&, const BBox&) = default;
};

BBox box_from_corners(double x1, double y1, double x2, double y2) noexcept;

/// Finite coordinates and strictly positive extent.
bool is_valid(const BBox& box) noexcept;

/// Intersection over union. Throws Error(degenerate_box) if either box is invalid.
double iou(const BBox& a, const BBox& b);

/// Same as iou() without validation; callers guarantee valid boxes.
double iou_unchecked(const BBox& a, const BBox& b) noexcept;

/// Clips a box to [0, width] x [0, height]. Returns nullopt if nothing is left.
std::optional<BBox> clamp_to_image(const BBox& box, double width, double height) noexcept;

}  // namespace genodkit
