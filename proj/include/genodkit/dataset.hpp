// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genodkit/geometry.hpp"
#include "genodkit/taxonomy.hpp"

namespace genodkit {

struct ImageRecord {
  std::string id;
  int width = 0;
  int height = 0;
  std::string source;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Annotation {
  std::string image_id;
  std::string category_id;
  BBox bbox;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

/// Images evaluable for one category: exhaustively annotated (positive) or
/// verified free of the category (negative).
struct FederatedEntry {
  std::set<std::string, std::less<>> positive;
  std::set<std::string, std::less<>> negative;

  bool covers(std::string_view image_id) const {
    return positive.contains(image_id) || negative.contains(image_id);
  }

  friend bool operator==(const FederatedEntry&, const FederatedEntry&) = default;
};

using FederatedSets = std::map<std::string, FederatedEntry, std::less<>>;

struct Dataset {
  std::string name;
  std::string taxonomy_version;
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  // Absent means every image is exhaustively annotated for every category.
  std::optional<FederatedSets> federated;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct DatasetLoadOptions {
  MappingMode mapping = MappingMode::strict;
  // Receives clamp and drop notices. Null discards them.
  std::vector<std::string>* warnings = nullptr;
};

Dataset load_dataset(const std::filesystem::path& path, const Taxonomy& taxonomy,
                     const DatasetLoadOptions& options = {});
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Turns freshly parsed content into a Dataset under the taxonomy: resolves
/// source categories, rejects degenerate boxes and unknown images, and clamps
/// boxes overflowing the image with a warning.
Dataset resolve_dataset(Dataset raw, const Taxonomy& taxonomy,
                        const DatasetLoadOptions& options = {});

/// Checks the Dataset invariants against a taxonomy; throws the first violation.
void validate_dataset(const Dataset& dataset, const Taxonomy& taxonomy);

/// Image ids become "<source>:<id>" (ids already carrying their source prefix
/// are kept), categories are resolved through the taxonomy, and federated sets
/// are unioned per category. Inputs without federated sets contribute their
/// images as exhaustively annotated for every category seen in the merge.
Dataset merge_datasets(std::span<const Dataset> datasets, const Taxonomy& taxonomy);

std::string namespaced_image_id(std::string_view source, std::string_view id);

struct CategoryCount {
  std::string category;
  std::size_t count = 0;

  friend bool operator==(const CategoryCount&, const CategoryCount&) = default;
};

/// Instance counts per category, count descending then id ascending.
std::vector<CategoryCount> histogram(const Dataset& dataset);

std::map<std::string, std::size_t, std::less<>> category_counts(const Dataset& dataset);

}  // namespace genodkit
