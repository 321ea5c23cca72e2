// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace genodkit {

struct RankedItem {
  std::string item;
  std::string category;

  friend bool operator==(const RankedItem&, const RankedItem&) = default;
};

struct QueryResult {
  std::string query_category;
  std::vector<RankedItem> items;  // rank order
};

/// Mean over queries of the fraction of the top-min(k, n) items whose category
/// differs from the query category.
double defect_rate(std::span<const QueryResult> queries, std::size_t k);

struct TriggerMetrics {
  std::optional<double> precision;  // absent when nothing triggered but ground truth did
  std::optional<double> recall;     // absent when ground truth is empty
};

using ImageIdSet = std::set<std::string, std::less<>>;

TriggerMetrics trigger_metrics(const ImageIdSet& predicted, const ImageIdSet& ground_truth,
                               const ImageIdSet& universe);

/// 100 * (baseline - value) / baseline. Requires baseline > 0.
double relative_reduction(double baseline, double value);

/// 100 * (value - baseline) / baseline. Requires baseline > 0.
double relative_gain(double baseline, double value);

}  // namespace genodkit
