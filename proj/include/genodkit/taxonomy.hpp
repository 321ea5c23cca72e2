// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace genodkit {

struct CategoryNode {
  std::string id;
  std::string display_name;
  std::optional<std::string> parent_id;  // absent for roots

  friend bool operator==(const CategoryNode&, const CategoryNode&) = default;
};

/// Maps a category of one source dataset into the unified vocabulary.
struct SourceMapping {
  std::string dataset;
  std::string source_id;
  std::string target_id;

  friend bool operator==(const SourceMapping&, const SourceMapping&) = default;
};

/// Unvalidated taxonomy content, as read from a file.
struct TaxonomySpec {
  std::string version;
  std::vector<CategoryNode> nodes;
  std::vector<SourceMapping> mappings;

  friend bool operator==(const TaxonomySpec&, const TaxonomySpec&) = default;
};

enum class ViolationKind {
  duplicate_id,
  dangling_parent,
  cycle,
  mapping_to_unknown_node,
  duplicate_mapping,
};

/// "duplicate id", "dangling parent", "cycle detected", ...
std::string_view violation_name(ViolationKind kind) noexcept;

struct Violation {
  ViolationKind kind;
  std::string subject;  // offending node id or "dataset/source_id"
  std::string message;
};

/// Lists every invariant violation. Empty iff the spec describes a valid forest
/// whose mappings all target existing nodes.
std::vector<Violation> validate(const TaxonomySpec& spec);

enum class MappingMode { strict, lenient };

// Immutable single-parent category forest. Build a new instance to change it.
class Taxonomy {
 public:
  Taxonomy() = default;

  /// Throws Error carrying the first violation reported by validate().
  static Taxonomy build(TaxonomySpec spec);

  const TaxonomySpec& spec() const noexcept { return spec_; }
  const std::string& version() const noexcept { return spec_.version; }
  std::span<const CategoryNode> nodes() const noexcept { return spec_.nodes; }
  std::span<const SourceMapping> mappings() const noexcept { return spec_.mappings; }
  std::size_t size() const noexcept { return spec_.nodes.size(); }

  bool contains(std::string_view id) const;
  const CategoryNode& node(std::string_view id) const;

  /// Strict ancestors ordered nearest-first. Throws on an unknown id.
  const std::vector<std::string>& ancestors(std::string_view id) const;

  /// True if `ancestor` is a strict ancestor of `id`.
  bool is_ancestor(std::string_view ancestor, std::string_view id) const;

  /// True if `id` equals `root` or lies below it. Unknown ids only match themselves.
  bool is_self_or_descendant(std::string_view id, std::string_view root) const;

  std::vector<std::string> roots() const;
  std::vector<std::string> children(std::string_view id) const;

  /// Resolves a source-dataset category. Explicit mappings win; otherwise a
  /// source id equal to a unified id maps to itself. Unresolvable categories
  /// throw in strict mode and return nullopt in lenient mode.
  std::optional<std::string> map_source(std::string_view dataset, std::string_view source_id,
                                        MappingMode mode = MappingMode::strict) const;

 private:
  std::size_t index_of(std::string_view id) const;

  TaxonomySpec spec_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::vector<std::string>> ancestors_;
  std::map<std::pair<std::string, std::string>, std::string, std::less<>> mapping_index_;
};

TaxonomySpec read_taxonomy_spec(const std::filesystem::path& path);
Taxonomy load_taxonomy(const std::filesystem::path& path);
void save_taxonomy(const Taxonomy& taxonomy, const std::filesystem::path& path);

}  // namespace genodkit
