// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "genodkit/dataset.hpp"

namespace genodkit {

/// Per-image replication counts. 0 drops an image, k keeps k copies.
struct SamplingPlan {
  std::optional<std::size_t> n_min;          // set by plan_upsample
  std::optional<std::size_t> target_images;  // set by plan_downsample
  std::uint64_t seed = 0;
  std::map<std::string, std::size_t, std::less<>> repeats;

  friend bool operator==(const SamplingPlan&, const SamplingPlan&) = default;
};

/// ceil(n_min / n_c) for a category with n_c instances.
std::size_t repeat_factor(std::size_t n_min, std::size_t category_count);

// Class-aware upsampling: each image is repeated by the largest repeat factor
// among the categories it contains, so every category reaches n_min.
SamplingPlan plan_upsample(const Dataset& dataset, std::size_t n_min);

/// Keeps a uniformly random subset of exactly `target_images` images.
SamplingPlan plan_downsample(const Dataset& dataset, std::size_t target_images,
                             std::uint64_t seed);

/// Copy k of image "x" is "x" for k = 0 and "x#k" afterwards. Images absent
/// from the plan keep a single copy.
Dataset apply_plan(const SamplingPlan& plan, const Dataset& dataset);

std::string image_copy_id(std::string_view image_id, std::size_t copy);

struct DistributionRow {
  std::size_t rank = 0;  // 1-based, by count_before descending
  std::string category;
  std::size_t count_before = 0;
  std::size_t count_after = 0;
};

std::vector<DistributionRow> distribution_report(const Dataset& before, const Dataset& after);

}  // namespace genodkit
