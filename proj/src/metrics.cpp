// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/metrics.hpp"

#include <algorithm>

#include "genodkit/error.hpp"

namespace genodkit {

double defect_rate(std::span<const QueryResult> queries, std::size_t k) {
  if (k < 1) {
    throw Error(ErrorCode::invalid_argument, "cutoff k must be at least 1");
  }
  if (queries.empty()) {
    throw Error(ErrorCode::invalid_argument, "empty query set");
  }
  double sum = 0.0;
  for (const auto& q : queries) {
    if (q.items.empty()) {
      throw Error(ErrorCode::invalid_argument,
                  "query " + q.query_category + " has no retrieved items");
    }
    const std::size_t n = std::min(k, q.items.size());
    std::size_t defects = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (q.items[i].category != q.query_category) ++defects;
    }
    sum += static_cast<double>(defects) / static_cast<double>(n);
  }
  return sum / static_cast<double>(queries.size());
}

TriggerMetrics trigger_metrics(const ImageIdSet& predicted, const ImageIdSet& ground_truth,
                               const ImageIdSet& universe) {
  for (const auto* set : {&predicted, &ground_truth}) {
    for (const auto& id : *set) {
      if (!universe.contains(id)) {
        throw Error(ErrorCode::unknown_image, "image outside the universe: " + id);
      }
    }
  }
  std::size_t both = 0;
  for (const auto& id : predicted) {
    if (ground_truth.contains(id)) ++both;
  }
  TriggerMetrics m;
  if (!predicted.empty()) {
    m.precision = static_cast<double>(both) / static_cast<double>(predicted.size());
  } else if (ground_truth.empty()) {
    m.precision = 1.0;
  }
  if (!ground_truth.empty()) {
    m.recall = static_cast<double>(both) / static_cast<double>(ground_truth.size());
  }
  return m;
}

double relative_reduction(double baseline, double value) {
  if (!(baseline > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "baseline must be positive");
  }
  return 100.0 * (baseline - value) / baseline;
}

double relative_gain(double baseline, double value) {
  if (!(baseline > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "baseline must be positive");
  }
  return 100.0 * (value - baseline) / baseline;
}

}  // namespace genodkit
