// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/postprocess.hpp"

#include <algorithm>

#include "genodkit/error.hpp"

namespace genodkit {

namespace {

void check_ratio(double v, const char* what) {
  if (!(v > 0.0 && v <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, std::string(what) + " must be in (0, 1]");
  }
}

bool same_group(const Detection& a, const Detection& b) {
  return a.image_id == b.image_id && a.category_id == b.category_id;
}

// Greedy suppression within each (image, category) group of a canonically
// sorted vector.
std::vector<Detection> suppress(std::vector<Detection> sorted, double iou_thresh) {
  std::vector<Detection> out;
  out.reserve(sorted.size());
  std::size_t begin = 0;
  while (begin < sorted.size()) {
    std::size_t end = begin + 1;
    while (end < sorted.size() && same_group(sorted[begin], sorted[end])) ++end;
    const std::size_t group_start = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      bool keep = true;
      for (std::size_t k = group_start; k < out.size(); ++k) {
        if (iou_unchecked(out[k].bbox, sorted[i].bbox) >= iou_thresh) {
          keep = false;
          break;
        }
      }
      if (keep) out.push_back(std::move(sorted[i]));
    }
    begin = end;
  }
  return out;
}

}  // namespace

DetectionSet propagate_labels(const DetectionSet& input, const Taxonomy& taxonomy,
                              double dedup_iou) {
  check_ratio(dedup_iou, "dedup_iou");
  DetectionSet out;
  out.images = input.images;
  out.detections.reserve(input.detections.size() * 2);
  for (const auto& d : input.detections) {
    if (!taxonomy.contains(d.category_id)) {
      throw Error(ErrorCode::unknown_category, "unknown category: " + d.category_id);
    }
    out.detections.push_back(d);
    // Copies always point at the model category they came from, so a second
    // pass produces exact duplicates of the first.
    const std::string& root_source =
        d.provenance.origin == Origin::propagated && d.provenance.from_category
            ? *d.provenance.from_category
            : d.category_id;
    for (const auto& ancestor : taxonomy.ancestors(d.category_id)) {
      Detection copy = d;
      copy.category_id = ancestor;
      copy.provenance = {Origin::propagated, root_source};
      out.detections.push_back(std::move(copy));
    }
  }
  sort_canonical(out.detections);
  out.detections = suppress(std::move(out.detections), dedup_iou);
  return out;
}

DetectionSet nms(const DetectionSet& input, double iou_thresh) {
  check_ratio(iou_thresh, "NMS IoU threshold");
  DetectionSet out;
  out.images = input.images;
  out.detections = input.detections;
  sort_canonical(out.detections);
  out.detections = suppress(std::move(out.detections), iou_thresh);
  return out;
}

DetectionSet filter_scores(const DetectionSet& input, const ScoreThresholds& thresholds,
                           double default_thresh) {
  auto check = [](double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "score thresholds must be in [0, 1]");
    }
  };
  check(default_thresh);
  for (const auto& [category, t] : thresholds) check(t);

  DetectionSet out;
  out.images = input.images;
  for (const auto& d : input.detections) {
    const auto it = thresholds.find(d.category_id);
    const double t = it == thresholds.end() ? default_thresh : it->second;
    if (d.score >= t) out.detections.push_back(d);
  }
  sort_canonical(out.detections);
  return out;
}

bool image_trigger(const DetectionSet& detections, std::string_view image_id,
                   const std::set<std::string, std::less<>>& segment, const Taxonomy& taxonomy,
                   double min_score) {
  if (segment.empty()) {
    throw Error(ErrorCode::invalid_argument, "trigger segment is empty");
  }
  if (!detections.has_image(image_id)) {
    throw Error(ErrorCode::unknown_image, "unknown image: " + std::string(image_id));
  }
  for (const auto& d : detections.detections) {
    if (d.image_id != image_id || d.score < min_score) continue;
    if (segment.contains(d.category_id)) return true;
    if (!taxonomy.contains(d.category_id)) continue;
    for (const auto& a : taxonomy.ancestors(d.category_id)) {
      if (segment.contains(a)) return true;
    }
  }
  return false;
}

std::vector<RankedItem> category_filter(std::string_view query_category,
                                        std::span<const RankedItem> items,
                                        const Taxonomy& taxonomy) {
  const bool known_query = taxonomy.contains(query_category);
  std::vector<RankedItem> out;
  for (const auto& item : items) {
    bool keep = item.category == query_category;
    if (!keep && known_query && taxonomy.contains(item.category)) {
      keep = taxonomy.is_self_or_descendant(item.category, query_category);
    }
    if (keep) out.push_back(item);
  }
  return out;
}

DetectionSet run_postprocess(const DetectionSet& input, const Taxonomy& taxonomy,
                             const PostprocessConfig& config) {
  DetectionSet current = input;
  sort_canonical(current.detections);
  for (PostStep step : config.steps) {
    switch (step) {
      case PostStep::propagate: current = propagate_labels(current, taxonomy, config.dedup_iou); break;
      case PostStep::nms: current = nms(current, config.nms_iou); break;
      case PostStep::filter:
        current = filter_scores(current, config.thresholds, config.default_thresh);
        break;
    }
  }
  return current;
}

const char* post_step_name(PostStep step) noexcept {
  switch (step) {
    case PostStep::propagate: return "propagate";
    case PostStep::nms: return "nms";
    case PostStep::filter: return "filter";
  }
  return "propagate";
}

PostStep parse_post_step(std::string_view name) {
  if (name == "propagate") return PostStep::propagate;
  if (name == "nms") return PostStep::nms;
  if (name == "filter") return PostStep::filter;
  throw Error(ErrorCode::invalid_argument, "unknown post-processing step: " + std::string(name));
}

}  // namespace genodkit
