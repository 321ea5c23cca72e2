// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/taxonomy.hpp"

#include <set>

#include "genodkit/error.hpp"
#include "genodkit/serialization.hpp"

namespace genodkit {

std::string_view violation_name(ViolationKind kind) noexcept {
  switch (kind) {
    case ViolationKind::duplicate_id: return "duplicate id";
    case ViolationKind::dangling_parent: return "dangling parent";
    case ViolationKind::cycle: return "cycle detected";
    case ViolationKind::mapping_to_unknown_node: return "mapping to unknown node";
    case ViolationKind::duplicate_mapping: return "duplicate mapping";
  }
  return "unknown violation";
}

std::vector<Violation> validate(const TaxonomySpec& spec) {
  std::vector<Violation> out;
  std::map<std::string, std::size_t, std::less<>> first_index;
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& node = spec.nodes[i];
    if (!first_index.emplace(node.id, i).second) {
      out.push_back({ViolationKind::duplicate_id, node.id, "duplicate id: " + node.id});
    }
  }

  // parent lookup uses the first node with a given id
  std::vector<std::ptrdiff_t> parent(spec.nodes.size(), -1);
  for (std::size_t i = 0; i < spec.nodes.size(); ++i) {
    const auto& node = spec.nodes[i];
    if (!node.parent_id) {
      continue;
    }
    auto it = first_index.find(*node.parent_id);
    if (it == first_index.end()) {
      out.push_back({ViolationKind::dangling_parent, node.id,
                     "dangling parent: " + node.id + " -> " + *node.parent_id});
      continue;
    }
    parent[i] = static_cast<std::ptrdiff_t>(it->second);
  }

  // 0 = unvisited, 1 = on current walk, 2 = finished
  std::vector<int> state(spec.nodes.size(), 0);
  for (std::size_t start = 0; start < spec.nodes.size(); ++start) {
    std::vector<std::size_t> walk;
    std::ptrdiff_t cur = static_cast<std::ptrdiff_t>(start);
    while (cur >= 0 && state[cur] == 0) {
      state[cur] = 1;
      walk.push_back(static_cast<std::size_t>(cur));
      cur = parent[cur];
    }
    if (cur >= 0 && state[cur] == 1) {
      std::string members;
      bool in_cycle = false;
      for (std::size_t idx : walk) {
        if (static_cast<std::ptrdiff_t>(idx) == cur) {
          in_cycle = true;
        }
        if (in_cycle) {
          members += members.empty() ? "" : " -> ";
          members += spec.nodes[idx].id;
        }
      }
      out.push_back({ViolationKind::cycle, spec.nodes[cur].id, "cycle detected: " + members});
    }
    for (std::size_t idx : walk) {
      state[idx] = 2;
    }
  }

  std::set<std::pair<std::string, std::string>> seen_keys;
  for (const auto& m : spec.mappings) {
    const std::string subject = m.dataset + "/" + m.source_id;
    if (!seen_keys.emplace(m.dataset, m.source_id).second) {
      out.push_back({ViolationKind::duplicate_mapping, subject, "duplicate mapping: " + subject});
    }
    if (!first_index.contains(m.target_id)) {
      out.push_back({ViolationKind::mapping_to_unknown_node, subject,
                     "mapping to unknown node: " + subject + " -> " + m.target_id});
    }
  }
  return out;
}

namespace {

ErrorCode code_for(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::duplicate_id: return ErrorCode::duplicate_id;
    case ViolationKind::dangling_parent: return ErrorCode::dangling_parent;
    case ViolationKind::cycle: return ErrorCode::cycle_detected;
    case ViolationKind::mapping_to_unknown_node: return ErrorCode::unknown_mapping_target;
    case ViolationKind::duplicate_mapping: return ErrorCode::duplicate_mapping;
  }
  return ErrorCode::invalid_argument;
}

}  // namespace

Taxonomy Taxonomy::build(TaxonomySpec spec) {
  const auto violations = validate(spec);
  if (!violations.empty()) {
    const auto& first = violations.front();
    throw Error(code_for(first.kind), first.message);
  }

  Taxonomy t;
  t.spec_ = std::move(spec);
  const auto& nodes = t.spec_.nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    t.index_.emplace(nodes[i].id, i);
  }
  t.ancestors_.resize(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto& chain = t.ancestors_[i];
    const auto* parent = &nodes[i].parent_id;
    while (*parent) {
      chain.push_back(**parent);
      parent = &nodes[t.index_.find(**parent)->second].parent_id;
    }
  }
  for (const auto& m : t.spec_.mappings) {
    t.mapping_index_.emplace(std::make_pair(m.dataset, m.source_id), m.target_id);
  }
  return t;
}

std::size_t Taxonomy::index_of(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw Error(ErrorCode::unknown_category, "unknown category: " + std::string(id));
  }
  return it->second;
}

bool Taxonomy::contains(std::string_view id) const { return index_.find(id) != index_.end(); }

const CategoryNode& Taxonomy::node(std::string_view id) const { return spec_.nodes[index_of(id)]; }

const std::vector<std::string>& Taxonomy::ancestors(std::string_view id) const {
  return ancestors_[index_of(id)];
}

bool Taxonomy::is_ancestor(std::string_view ancestor, std::string_view id) const {
  for (const auto& a : ancestors(id)) {
    if (a == ancestor) {
      return true;
    }
  }
  return false;
}

bool Taxonomy::is_self_or_descendant(std::string_view id, std::string_view root) const {
  if (id == root) {
    return true;
  }
  return contains(id) && is_ancestor(root, id);
}

std::vector<std::string> Taxonomy::roots() const {
  std::vector<std::string> out;
  for (const auto& n : spec_.nodes) {
    if (!n.parent_id) {
      out.push_back(n.id);
    }
  }
  return out;
}

std::vector<std::string> Taxonomy::children(std::string_view id) const {
  index_of(id);
  std::vector<std::string> out;
  for (const auto& n : spec_.nodes) {
    if (n.parent_id && *n.parent_id == id) {
      out.push_back(n.id);
    }
  }
  return out;
}

std::optional<std::string> Taxonomy::map_source(std::string_view dataset,
                                                std::string_view source_id,
                                                MappingMode mode) const {
  auto it = mapping_index_.find(std::make_pair(std::string(dataset), std::string(source_id)));
  if (it != mapping_index_.end()) {
    return it->second;
  }
  if (contains(source_id)) {
    return std::string(source_id);
  }
  if (mode == MappingMode::lenient) {
    return std::nullopt;
  }
  throw Error(ErrorCode::unmapped_category, "unmapped category: dataset=" + std::string(dataset) +
                                                " source_id=" + std::string(source_id));
}

TaxonomySpec read_taxonomy_spec(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return taxonomy_spec_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  TaxonomySpec spec = read_taxonomy_spec(path);
  try {
    return Taxonomy::build(std::move(spec));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_taxonomy(const Taxonomy& taxonomy, const std::filesystem::path& path) {
  write_text_file(path, dump_json(taxonomy_to_json(taxonomy.spec())));
}

}  // namespace genodkit
