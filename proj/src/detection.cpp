// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/detection.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "genodkit/error.hpp"

namespace genodkit {

bool DetectionSet::has_image(std::string_view image_id) const {
  if (images.contains(image_id)) {
    return true;
  }
  return std::any_of(detections.begin(), detections.end(),
                     [&](const Detection& d) { return d.image_id == image_id; });
}

bool higher_priority(const Detection& a, const Detection& b) {
  if (a.score != b.score) {
    return a.score > b.score;
  }
  if (a.provenance.origin != b.provenance.origin) {
    return a.provenance.origin == Origin::model;
  }
  return std::tie(a.bbox, a.provenance.from_category, a.head_id) <
         std::tie(b.bbox, b.provenance.from_category, b.head_id);
}

bool canonical_less(const Detection& a, const Detection& b) {
  if (a.image_id != b.image_id) {
    return a.image_id < b.image_id;
  }
  if (a.category_id != b.category_id) {
    return a.category_id < b.category_id;
  }
  return higher_priority(a, b);
}

void sort_canonical(std::vector<Detection>& detections) {
  std::stable_sort(detections.begin(), detections.end(), canonical_less);
}

void validate_detection(const Detection& detection) {
  if (!std::isfinite(detection.score) || detection.score < 0.0 || detection.score > 1.0) {
    throw Error(ErrorCode::invalid_argument,
                "score out of range [0,1] on image " + detection.image_id);
  }
  if (!is_valid(detection.bbox)) {
    throw Error(ErrorCode::degenerate_box, "degenerate box on image " + detection.image_id);
  }
}

}  // namespace genodkit
