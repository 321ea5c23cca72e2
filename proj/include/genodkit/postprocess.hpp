// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genodkit/detection.hpp"
#include "genodkit/metrics.hpp"
#include "genodkit/taxonomy.hpp"

namespace genodkit {

// All transforms return detections in canonical order (see canonical_less).

/// Copies every detection's box and score to each taxonomy ancestor, then per
/// (image, category) keeps only the highest-priority detection among those
/// overlapping at IoU >= dedup_iou. Copies remember the category they were
/// propagated from.
DetectionSet propagate_labels(const DetectionSet& input, const Taxonomy& taxonomy,
                              double dedup_iou = 1.0);

/// Greedy per-(image, category) suppression at IoU >= iou_thresh.
DetectionSet nms(const DetectionSet& input, double iou_thresh = 0.5);

using ScoreThresholds = std::map<std::string, double, std::less<>>;

/// Keeps detections scoring at least the category threshold (or the default).
DetectionSet filter_scores(const DetectionSet& input, const ScoreThresholds& thresholds,
                           double default_thresh);

/// True iff some detection on the image scores >= min_score and its category
/// or one of its ancestors is in the segment.
bool image_trigger(const DetectionSet& detections, std::string_view image_id,
                   const std::set<std::string, std::less<>>& segment, const Taxonomy& taxonomy,
                   double min_score);

/// Stable filter keeping items of the query category or its descendants.
std::vector<RankedItem> category_filter(std::string_view query_category,
                                        std::span<const RankedItem> items,
                                        const Taxonomy& taxonomy);

enum class PostStep { propagate, nms, filter };

struct PostprocessConfig {
  std::vector<PostStep> steps{PostStep::propagate, PostStep::nms, PostStep::filter};
  double dedup_iou = 1.0;
  double nms_iou = 0.5;
  ScoreThresholds thresholds;
  double default_thresh = 0.0;
};

DetectionSet run_postprocess(const DetectionSet& input, const Taxonomy& taxonomy,
                             const PostprocessConfig& config);

const char* post_step_name(PostStep step) noexcept;
PostStep parse_post_step(std::string_view name);

}  // namespace genodkit
