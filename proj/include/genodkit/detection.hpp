// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "genodkit/geometry.hpp"

namespace genodkit {

enum class Origin { model, propagated };

struct Provenance {
  Origin origin = Origin::model;
  std::optional<std::string> from_category;  // set for propagated detections

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Detection {
  std::string image_id;
  std::string category_id;
  BBox bbox;
  double score = 0.0;
  std::optional<std::string> head_id;
  Provenance provenance;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct DetectionSet {
  std::vector<Detection> detections;
  // Images that were processed but may carry no detections.
  std::set<std::string, std::less<>> images;

  bool has_image(std::string_view image_id) const;

  friend bool operator==(const DetectionSet&, const DetectionSet&) = default;
};

/// Suppression priority within one (image, category) group: higher score
/// first, model output before propagated copies, then box, source category
/// and head id so the order never depends on input position.
bool higher_priority(const Detection& a, const Detection& b);

/// Canonical output order: image, category, then higher_priority.
bool canonical_less(const Detection& a, const Detection& b);

void sort_canonical(std::vector<Detection>& detections);

/// Throws Error(invalid_argument / degenerate_box) on out-of-range scores or invalid boxes.
void validate_detection(const Detection& detection);

}  // namespace genodkit
