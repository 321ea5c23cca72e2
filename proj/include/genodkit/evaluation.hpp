// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "genodkit/dataset.hpp"
#include "genodkit/detection.hpp"
#include "genodkit/taxonomy.hpp"

namespace genodkit {

enum class ApMode {
  exact,    // integral of the precision envelope over recall
  coco101,  // mean envelope precision at recall 0.00, 0.01, ..., 1.00
};

enum class MatchLabel { tp, fp, ignored };

struct MatchedDetection {
  std::size_t input_index = 0;
  double score = 0.0;
  MatchLabel label = MatchLabel::fp;
  std::optional<std::size_t> gt_index;  // set for TPs
};

struct MatchResult {
  std::vector<MatchedDetection> detections;  // in processing order
  std::vector<bool> gt_matched;
  std::size_t n_gt = 0;  // evaluable ground truths
};

/// Greedy one-to-one matching for a single category. Detections are visited by
/// descending score (ties: image id, box, input position); each takes the
/// unmatched same-image ground truth with the highest IoU >= iou_thresh, lowest
/// index on ties. With `federated`, detections and ground truths on images
/// outside positive ∪ negative are ignored.
MatchResult match_detections(std::span<const Detection> detections,
                             std::span<const Annotation> ground_truths,
                             const FederatedEntry* federated, double iou_thresh);

/// nullopt when the result has no evaluable ground truth.
std::optional<double> average_precision(const MatchResult& match, ApMode mode);

/// Weighted mean of per-category APs: sum(w_c * AP_c) / sum(w_c).
double weighted_ap(std::span<const double> ap, std::span<const double> weights);

enum class FederatedMode { automatic, on, off };
enum class WeightSource { instance_count, uniform, custom };

struct EvalConfig {
  std::vector<double> iou_thresholds = default_iou_thresholds();
  double primary_iou = 0.5;
  ApMode mode = ApMode::exact;
  FederatedMode federated = FederatedMode::automatic;
  WeightSource weights = WeightSource::instance_count;
  std::map<std::string, double, std::less<>> custom_weights;
  std::size_t workers = 1;

  /// 0.50, 0.55, ..., 0.95
  static std::vector<double> default_iou_thresholds();
};

struct CategoryResult {
  std::string category;
  std::size_t n_gt = 0;
  std::size_t n_det = 0;
  std::optional<double> ap50;
  std::optional<double> ap;  // mean over iou_thresholds
  double weight = 0.0;
};

struct EvalReport {
  std::vector<CategoryResult> categories;  // sorted by category id
  std::vector<std::string> excluded;       // categories without evaluable ground truth
  double ap50 = 0.0;
  double wap50 = 0.0;
  double ap = 0.0;
  EvalConfig config;
  bool federated = false;
};

/// Throws Error(empty_ground_truth) if no category has evaluable ground truth.
/// With a taxonomy, every category must exist in it.
EvalReport evaluate(const Dataset& ground_truth, const DetectionSet& detections,
                    const EvalConfig& config, const Taxonomy* taxonomy = nullptr);

const char* ap_mode_name(ApMode mode) noexcept;
ApMode parse_ap_mode(std::string_view name);

}  // namespace genodkit
