// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/sampling.hpp"

#include <algorithm>
#include <numeric>

#include "genodkit/error.hpp"
#include "genodkit/rng.hpp"

namespace genodkit {

std::size_t repeat_factor(std::size_t n_min, std::size_t category_count) {
  if (category_count == 0) {
    throw Error(ErrorCode::invalid_argument, "repeat factor needs a positive category count");
  }
  return (n_min + category_count - 1) / category_count;
}

SamplingPlan plan_upsample(const Dataset& dataset, std::size_t n_min) {
  if (n_min < 1) {
    throw Error(ErrorCode::invalid_argument, "n_min must be at least 1");
  }
  if (dataset.images.empty()) {
    throw Error(ErrorCode::invalid_argument, "cannot upsample an empty dataset");
  }
  const auto counts = category_counts(dataset);
  std::map<std::string, std::size_t, std::less<>> factor;
  for (const auto& [category, count] : counts) {
    factor[category] = repeat_factor(n_min, count);
  }

  SamplingPlan plan;
  plan.n_min = n_min;
  for (const auto& im : dataset.images) {
    plan.repeats[im.id] = 1;
  }
  for (const auto& a : dataset.annotations) {
    auto& r = plan.repeats[a.image_id];
    r = std::max(r, factor.find(a.category_id)->second);
  }
  return plan;
}

SamplingPlan plan_downsample(const Dataset& dataset, std::size_t target_images,
                             std::uint64_t seed) {
  const std::size_t n = dataset.images.size();
  if (target_images < 1 || target_images > n) {
    throw Error(ErrorCode::out_of_range, "target out of range: " + std::to_string(target_images) +
                                             " not in [1, " + std::to_string(n) + "]");
  }
  // Sort first so the subset depends on the id set, not on file order.
  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& im : dataset.images) {
    ids.push_back(im.id);
  }
  std::sort(ids.begin(), ids.end());

  // Partial Fisher-Yates: the first target_images slots form the sample.
  Rng rng(derive_seed(seed, "downsample"));
  for (std::size_t i = 0; i < target_images; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(ids[i], ids[j]);
  }

  SamplingPlan plan;
  plan.target_images = target_images;
  plan.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    plan.repeats[ids[i]] = i < target_images ? 1 : 0;
  }
  return plan;
}

std::string image_copy_id(std::string_view image_id, std::size_t copy) {
  if (copy == 0) {
    return std::string(image_id);
  }
  return std::string(image_id) + "#" + std::to_string(copy);
}

Dataset apply_plan(const SamplingPlan& plan, const Dataset& dataset) {
  std::set<std::string, std::less<>> known;
  for (const auto& im : dataset.images) {
    known.insert(im.id);
  }
  for (const auto& [id, count] : plan.repeats) {
    if (!known.contains(id)) {
      throw Error(ErrorCode::unknown_image, "plan references unknown image: " + id);
    }
  }
  auto copies_of = [&](std::string_view id) -> std::size_t {
    const auto it = plan.repeats.find(id);
    return it == plan.repeats.end() ? 1 : it->second;
  };

  std::map<std::string, std::vector<const Annotation*>, std::less<>> by_image;
  for (const auto& a : dataset.annotations) {
    by_image[a.image_id].push_back(&a);
  }

  Dataset out;
  out.name = dataset.name;
  out.taxonomy_version = dataset.taxonomy_version;
  for (const auto& im : dataset.images) {
    const std::size_t copies = copies_of(im.id);
    const auto anns = by_image.find(im.id);
    for (std::size_t k = 0; k < copies; ++k) {
      ImageRecord copy = im;
      copy.id = image_copy_id(im.id, k);
      if (anns != by_image.end()) {
        for (const Annotation* a : anns->second) {
          out.annotations.push_back({copy.id, a->category_id, a->bbox});
        }
      }
      out.images.push_back(std::move(copy));
    }
  }
  if (dataset.federated) {
    FederatedSets fed;
    for (const auto& [category, entry] : *dataset.federated) {
      auto& target = fed[category];
      for (const auto& id : entry.positive) {
        for (std::size_t k = 0; k < copies_of(id); ++k) target.positive.insert(image_copy_id(id, k));
      }
      for (const auto& id : entry.negative) {
        for (std::size_t k = 0; k < copies_of(id); ++k) target.negative.insert(image_copy_id(id, k));
      }
    }
    out.federated = std::move(fed);
  }
  return out;
}

std::vector<DistributionRow> distribution_report(const Dataset& before, const Dataset& after) {
  const auto after_counts = category_counts(after);
  std::vector<DistributionRow> rows;
  std::size_t rank = 0;
  for (const auto& [category, count] : histogram(before)) {
    const auto it = after_counts.find(category);
    rows.push_back({++rank, category, count, it == after_counts.end() ? 0 : it->second});
  }
  return rows;
}

}  // namespace genodkit
