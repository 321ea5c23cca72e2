// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "genodkit/detection.hpp"
#include "genodkit/taxonomy.hpp"

namespace genodkit {

using CategorySet = std::set<std::string, std::less<>>;

struct HeadSpec {
  std::string head_id;
  std::uint64_t version = 1;
  CategorySet categories;
  // The default head owns whatever no specialized head claims. Registering a
  // specialized head moves the claimed categories out of it.
  bool is_default = false;

  friend bool operator==(const HeadSpec&, const HeadSpec&) = default;
};

// Value-semantic registry of detector heads with pairwise-disjoint category
// ownership. register_head() returns a new registry and leaves the input intact.
class HeadRegistry {
 public:
  const std::map<std::string, HeadSpec, std::less<>>& heads() const noexcept { return heads_; }
  const std::map<std::string, std::string, std::less<>>& category_index() const noexcept {
    return category_index_;
  }

  const HeadSpec* find(std::string_view head_id) const;
  std::optional<std::string> owner(std::string_view category) const;

  friend HeadRegistry register_head(const HeadRegistry& registry, HeadSpec head);

 private:
  void reindex();

  std::map<std::string, HeadSpec, std::less<>> heads_;
  std::map<std::string, std::string, std::less<>> category_index_;
};

/// Adds or replaces a head. Replacement needs the same id and a strictly
/// higher version. Throws Error(category_overlap) naming every conflicting
/// category and its owner, or Error(version_not_increased).
HeadRegistry register_head(const HeadRegistry& registry, HeadSpec head);

/// Registers a default head owning every taxonomy category not yet claimed.
HeadRegistry register_default_head(const HeadRegistry& registry, std::string head_id,
                                   std::uint64_t version, const Taxonomy& taxonomy);

HeadRegistry registry_from_heads(const std::vector<HeadSpec>& heads);

/// Concatenates per-head outputs, tags each detection with its head id and
/// returns them in canonical order. Throws Error(ownership_violation) when a
/// head emits a category it does not own and Error(unknown_head) for
/// unregistered heads.
DetectionSet merge_head_outputs(const HeadRegistry& registry,
                                const std::map<std::string, DetectionSet, std::less<>>& outputs);

struct ForeignDifference {
  std::string image_id;
  std::string category;
  std::string field;  // "count", "score", "bbox", "head_id" or "provenance"

  friend bool operator==(const ForeignDifference&, const ForeignDifference&) = default;
};

struct DiffReport {
  bool pass = true;
  std::vector<std::string> changed_categories;  // owned by the changed head and differing
  std::vector<ForeignDifference> foreign_differences;
};

/// PASS iff every differing (image, category) group belongs to the changed head.
DiffReport non_regression_diff(const DetectionSet& before, const DetectionSet& after,
                               const HeadSpec& changed_head);

/// Keeps detections whose category is not in `excluded`.
DetectionSet without_categories(const DetectionSet& input, const CategorySet& excluded);

// Shared registry for concurrent readers. Writers are serialized and publish a
// complete new registry, so a snapshot is always either the old or the new one.
class RegistryStore {
 public:
  explicit RegistryStore(HeadRegistry initial = {})
      : current_(std::make_shared<const HeadRegistry>(std::move(initial))) {}

  std::shared_ptr<const HeadRegistry> snapshot() const;
  std::shared_ptr<const HeadRegistry> register_head(HeadSpec head);

 private:
  mutable std::mutex read_mutex_;
  std::mutex write_mutex_;
  std::shared_ptr<const HeadRegistry> current_;
};

}  // namespace genodkit
