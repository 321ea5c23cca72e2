// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/federation.hpp"

#include <algorithm>
#include <tuple>

#include "genodkit/error.hpp"

namespace genodkit {

const HeadSpec* HeadRegistry::find(std::string_view head_id) const {
  const auto it = heads_.find(head_id);
  return it == heads_.end() ? nullptr : &it->second;
}

std::optional<std::string> HeadRegistry::owner(std::string_view category) const {
  const auto it = category_index_.find(category);
  if (it == category_index_.end()) return std::nullopt;
  return it->second;
}

void HeadRegistry::reindex() {
  category_index_.clear();
  for (const auto& [id, head] : heads_) {
    for (const auto& c : head.categories) {
      category_index_.emplace(c, id);
    }
  }
}

HeadRegistry register_head(const HeadRegistry& registry, HeadSpec head) {
  if (head.head_id.empty()) {
    throw Error(ErrorCode::invalid_argument, "head id must not be empty");
  }
  if (head.categories.empty() && !head.is_default) {
    throw Error(ErrorCode::invalid_argument, "head " + head.head_id + " owns no categories");
  }
  const HeadSpec* previous = registry.find(head.head_id);
  if (previous != nullptr && head.version <= previous->version) {
    throw Error(ErrorCode::version_not_increased,
                "version not increased: head " + head.head_id + " is at version " +
                    std::to_string(previous->version) + ", got " + std::to_string(head.version));
  }

  std::string default_id;
  for (const auto& [id, h] : registry.heads()) {
    if (h.is_default && id != head.head_id) default_id = id;
  }
  if (head.is_default && !default_id.empty()) {
    throw Error(ErrorCode::invalid_argument, "registry already has default head " + default_id);
  }

  std::vector<std::string> conflicts;
  std::vector<std::string> carved;
  for (const auto& c : head.categories) {
    const auto owner = registry.owner(c);
    if (!owner || *owner == head.head_id) continue;
    if (*owner == default_id && !head.is_default) {
      carved.push_back(c);
    } else {
      conflicts.push_back(c + " (owned by " + *owner + ")");
    }
  }
  if (!conflicts.empty()) {
    std::string message = "category overlap: ";
    for (std::size_t i = 0; i < conflicts.size(); ++i) {
      if (i > 0) message += "; ";
      message += conflicts[i];
    }
    throw Error(ErrorCode::category_overlap, message);
  }

  HeadRegistry out = registry;
  if (!default_id.empty()) {
    HeadSpec& fallback = out.heads_.find(default_id)->second;
    for (const auto& c : carved) fallback.categories.erase(c);
    // Categories a replaced head gives up fall back to the default head.
    if (previous != nullptr) {
      for (const auto& c : previous->categories) {
        if (!head.categories.contains(c)) fallback.categories.insert(c);
      }
    }
  }
  out.heads_[head.head_id] = std::move(head);
  out.reindex();
  return out;
}

HeadRegistry register_default_head(const HeadRegistry& registry, std::string head_id,
                                   std::uint64_t version, const Taxonomy& taxonomy) {
  HeadSpec head;
  head.head_id = std::move(head_id);
  head.version = version;
  head.is_default = true;
  for (const auto& node : taxonomy.nodes()) {
    const auto owner = registry.owner(node.id);
    if (!owner || *owner == head.head_id) head.categories.insert(node.id);
  }
  return register_head(registry, std::move(head));
}

HeadRegistry registry_from_heads(const std::vector<HeadSpec>& heads) {
  HeadRegistry registry;
  std::set<std::string> seen;
  // Default heads first so specialized heads carve out of them, not the reverse.
  std::vector<const HeadSpec*> order;
  for (const auto& h : heads) {
    if (h.is_default) order.push_back(&h);
  }
  for (const auto& h : heads) {
    if (!h.is_default) order.push_back(&h);
  }
  for (const HeadSpec* h : order) {
    if (!seen.insert(h->head_id).second) {
      throw Error(ErrorCode::duplicate_id, "duplicate head id: " + h->head_id);
    }
    registry = register_head(registry, *h);
  }
  return registry;
}

DetectionSet merge_head_outputs(const HeadRegistry& registry,
                                const std::map<std::string, DetectionSet, std::less<>>& outputs) {
  DetectionSet merged;
  for (const auto& [head_id, output] : outputs) {
    const HeadSpec* head = registry.find(head_id);
    if (head == nullptr) {
      throw Error(ErrorCode::unknown_head, "unknown head: " + head_id);
    }
    merged.images.insert(output.images.begin(), output.images.end());
    for (const auto& d : output.detections) {
      if (!head->categories.contains(d.category_id)) {
        throw Error(ErrorCode::ownership_violation,
                    "head " + head_id + " does not own " + d.category_id);
      }
      Detection tagged = d;
      tagged.head_id = head_id;
      merged.detections.push_back(std::move(tagged));
    }
  }
  sort_canonical(merged.detections);
  return merged;
}

namespace {

using GroupKey = std::pair<std::string, std::string>;  // image, category
using Groups = std::map<GroupKey, std::vector<const Detection*>>;

Groups group(const DetectionSet& ds) {
  std::vector<const Detection*> sorted;
  sorted.reserve(ds.detections.size());
  for (const auto& d : ds.detections) sorted.push_back(&d);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Detection* a, const Detection* b) { return canonical_less(*a, *b); });
  Groups groups;
  for (const Detection* d : sorted) groups[{d->image_id, d->category_id}].push_back(d);
  return groups;
}

std::optional<std::string> first_difference(const std::vector<const Detection*>& a,
                                            const std::vector<const Detection*>& b) {
  if (a.size() != b.size()) return "count";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i]->score != b[i]->score) return "score";
    if (!(a[i]->bbox == b[i]->bbox)) return "bbox";
    if (a[i]->head_id != b[i]->head_id) return "head_id";
    if (!(a[i]->provenance == b[i]->provenance)) return "provenance";
  }
  return std::nullopt;
}

}  // namespace

DiffReport non_regression_diff(const DetectionSet& before, const DetectionSet& after,
                               const HeadSpec& changed_head) {
  const Groups lhs = group(before);
  const Groups rhs = group(after);
  std::set<GroupKey> keys;
  for (const auto& [k, v] : lhs) keys.insert(k);
  for (const auto& [k, v] : rhs) keys.insert(k);

  static const std::vector<const Detection*> kEmpty;
  std::set<std::string> changed;
  DiffReport report;
  for (const auto& key : keys) {
    const auto l = lhs.find(key);
    const auto r = rhs.find(key);
    const auto diff = first_difference(l == lhs.end() ? kEmpty : l->second,
                                       r == rhs.end() ? kEmpty : r->second);
    if (!diff) continue;
    if (changed_head.categories.contains(key.second)) {
      changed.insert(key.second);
    } else {
      report.foreign_differences.push_back({key.first, key.second, *diff});
    }
  }
  report.changed_categories.assign(changed.begin(), changed.end());
  report.pass = report.foreign_differences.empty();
  return report;
}

DetectionSet without_categories(const DetectionSet& input, const CategorySet& excluded) {
  DetectionSet out;
  out.images = input.images;
  for (const auto& d : input.detections) {
    if (!excluded.contains(d.category_id)) out.detections.push_back(d);
  }
  return out;
}

std::shared_ptr<const HeadRegistry> RegistryStore::snapshot() const {
  std::lock_guard lock(read_mutex_);
  return current_;
}

std::shared_ptr<const HeadRegistry> RegistryStore::register_head(HeadSpec head) {
  std::lock_guard writer(write_mutex_);
  auto next = std::make_shared<const HeadRegistry>(
      genodkit::register_head(*snapshot(), std::move(head)));
  std::lock_guard lock(read_mutex_);
  current_ = next;
  return next;
}

}  // namespace genodkit
