// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/dataset.hpp"

#include <algorithm>
#include <unordered_map>

#include "genodkit/error.hpp"
#include "genodkit/serialization.hpp"

namespace genodkit {

namespace {

void warn(const DatasetLoadOptions& options, std::string message) {
  if (options.warnings != nullptr) {
    options.warnings->push_back(std::move(message));
  }
}

std::string box_text(const BBox& b) {
  return "[" + format_number(b.x) + ", " + format_number(b.y) + ", " + format_number(b.w) + ", " +
         format_number(b.h) + "]";
}

std::map<std::string, const ImageRecord*, std::less<>> index_images(const Dataset& d) {
  std::map<std::string, const ImageRecord*, std::less<>> index;
  for (const auto& im : d.images) {
    if (im.width <= 0 || im.height <= 0) {
      throw Error(ErrorCode::invalid_argument,
                  "image " + im.id + " has non-positive dimensions");
    }
    if (!index.emplace(im.id, &im).second) {
      throw Error(ErrorCode::duplicate_id, "duplicate image id: " + im.id);
    }
  }
  return index;
}

void check_federated(const Dataset& d,
                     const std::map<std::string, const ImageRecord*, std::less<>>& images,
                     const Taxonomy& taxonomy) {
  if (!d.federated) {
    return;
  }
  for (const auto& [category, entry] : *d.federated) {
    if (!taxonomy.contains(category)) {
      throw Error(ErrorCode::unknown_category, "unknown category in federated sets: " + category);
    }
    for (const auto* set : {&entry.positive, &entry.negative}) {
      for (const auto& id : *set) {
        if (!images.contains(id)) {
          throw Error(ErrorCode::unknown_image,
                      "unknown image " + id + " in federated sets of " + category);
        }
      }
    }
    for (const auto& id : entry.positive) {
      if (entry.negative.contains(id)) {
        throw Error(ErrorCode::federated_conflict,
                    "image " + id + " is both positive and negative for " + category);
      }
    }
  }
}

}  // namespace

Dataset resolve_dataset(Dataset raw, const Taxonomy& taxonomy, const DatasetLoadOptions& options) {
  const auto images = index_images(raw);
  std::vector<Annotation> kept;
  kept.reserve(raw.annotations.size());
  for (auto& a : raw.annotations) {
    const auto it = images.find(a.image_id);
    if (it == images.end()) {
      throw Error(ErrorCode::unknown_image, "unknown image: " + a.image_id);
    }
    const ImageRecord& im = *it->second;
    if (!is_valid(a.bbox)) {
      throw Error(ErrorCode::degenerate_box,
                  "degenerate box " + box_text(a.bbox) + " on image " + a.image_id);
    }
    auto category = taxonomy.map_source(im.source, a.category_id, options.mapping);
    if (!category) {
      warn(options, "dropped annotation on image " + a.image_id + ": unmapped category " +
                        im.source + "/" + a.category_id);
      continue;
    }
    auto clamped = clamp_to_image(a.bbox, im.width, im.height);
    if (!clamped) {
      throw Error(ErrorCode::degenerate_box,
                  "degenerate box " + box_text(a.bbox) + " lies outside image " + a.image_id);
    }
    if (!(*clamped == a.bbox)) {
      warn(options, "clamped box " + box_text(a.bbox) + " to " + box_text(*clamped) +
                        " on image " + a.image_id);
    }
    kept.push_back({std::move(a.image_id), std::move(*category), *clamped});
  }
  raw.annotations = std::move(kept);
  if (raw.taxonomy_version.empty()) {
    raw.taxonomy_version = taxonomy.version();
  }
  check_federated(raw, images, taxonomy);
  return raw;
}

void validate_dataset(const Dataset& d, const Taxonomy& taxonomy) {
  const auto images = index_images(d);
  for (const auto& a : d.annotations) {
    const auto it = images.find(a.image_id);
    if (it == images.end()) {
      throw Error(ErrorCode::unknown_image, "unknown image: " + a.image_id);
    }
    if (!taxonomy.contains(a.category_id)) {
      throw Error(ErrorCode::unknown_category, "unknown category: " + a.category_id);
    }
    if (!is_valid(a.bbox)) {
      throw Error(ErrorCode::degenerate_box,
                  "degenerate box " + box_text(a.bbox) + " on image " + a.image_id);
    }
  }
  check_federated(d, images, taxonomy);
}

Dataset load_dataset(const std::filesystem::path& path, const Taxonomy& taxonomy,
                     const DatasetLoadOptions& options) {
  const Json doc = read_json_file(path);
  try {
    return dataset_from_json(doc, taxonomy, options);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  write_text_file(path, dump_json(dataset_to_json(dataset)));
}

std::string namespaced_image_id(std::string_view source, std::string_view id) {
  std::string prefix = std::string(source) + ":";
  if (id.starts_with(prefix)) {
    return std::string(id);
  }
  return prefix + std::string(id);
}

Dataset merge_datasets(std::span<const Dataset> datasets, const Taxonomy& taxonomy) {
  Dataset out;
  out.name = "merged";
  out.taxonomy_version = taxonomy.version();

  struct Placed {
    std::string origin;  // source dataset name that produced the id
    int width;
    int height;
  };
  std::unordered_map<std::string, Placed> placed;
  std::set<std::string> categories_seen;
  bool any_federated = false;

  // Per input: namespaced ids of its images, for the federated union below.
  std::vector<std::vector<std::string>> input_ids(datasets.size());

  for (std::size_t di = 0; di < datasets.size(); ++di) {
    const Dataset& d = datasets[di];
    any_federated = any_federated || d.federated.has_value();
    std::map<std::string, std::string, std::less<>> rename;
    for (const auto& im : d.images) {
      const std::string& source = im.source.empty() ? d.name : im.source;
      std::string id = namespaced_image_id(source, im.id);
      auto [it, inserted] = placed.emplace(id, Placed{d.name, im.width, im.height});
      if (!inserted) {
        if (it->second.origin != d.name) {
          throw Error(ErrorCode::id_collision, "image id collision after namespacing: " + id +
                                                   " (from " + it->second.origin + " and " +
                                                   d.name + ")");
        }
        if (it->second.width != im.width || it->second.height != im.height) {
          throw Error(ErrorCode::dimension_conflict, "conflicting dimensions for image " + id);
        }
      } else {
        out.images.push_back({id, im.width, im.height, source});
      }
      rename[im.id] = id;
      input_ids[di].push_back(id);
    }
    std::map<std::string, std::string, std::less<>> source_of;
    for (const auto& im : d.images) {
      source_of[im.id] = im.source.empty() ? d.name : im.source;
    }
    for (const auto& a : d.annotations) {
      const auto it = rename.find(a.image_id);
      if (it == rename.end()) {
        throw Error(ErrorCode::unknown_image, "unknown image: " + a.image_id);
      }
      auto category = taxonomy.map_source(source_of[a.image_id], a.category_id);
      categories_seen.insert(*category);
      out.annotations.push_back({it->second, std::move(*category), a.bbox});
    }
    if (d.federated) {
      for (const auto& [category, entry] : *d.federated) {
        categories_seen.insert(category);
      }
    }
  }

  if (any_federated) {
    FederatedSets fed;
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      const Dataset& d = datasets[di];
      std::map<std::string, std::string, std::less<>> rename;
      for (std::size_t i = 0; i < d.images.size(); ++i) {
        rename[d.images[i].id] = input_ids[di][i];
      }
      if (d.federated) {
        for (const auto& [category, entry] : *d.federated) {
          auto& target = fed[category];
          for (const auto& id : entry.positive) target.positive.insert(rename.at(id));
          for (const auto& id : entry.negative) target.negative.insert(rename.at(id));
        }
        continue;
      }
      // Exhaustively annotated input: every image is positive where it holds
      // the category and negative otherwise.
      std::set<std::string> ids(input_ids[di].begin(), input_ids[di].end());
      std::map<std::string, std::set<std::string>, std::less<>> cats_of;
      for (const auto& a : out.annotations) {
        if (ids.contains(a.image_id)) {
          cats_of[a.image_id].insert(a.category_id);
        }
      }
      for (const auto& category : categories_seen) {
        auto& target = fed[category];
        for (const auto& id : input_ids[di]) {
          const auto it = cats_of.find(id);
          if (it != cats_of.end() && it->second.contains(category)) {
            target.positive.insert(id);
          } else {
            target.negative.insert(id);
          }
        }
      }
    }
    for (const auto& [category, entry] : fed) {
      for (const auto& id : entry.positive) {
        if (entry.negative.contains(id)) {
          throw Error(ErrorCode::federated_conflict,
                      "image " + id + " is both positive and negative for " + category);
        }
      }
    }
    out.federated = std::move(fed);
  }
  return out;
}

std::map<std::string, std::size_t, std::less<>> category_counts(const Dataset& dataset) {
  std::map<std::string, std::size_t, std::less<>> counts;
  for (const auto& a : dataset.annotations) {
    ++counts[a.category_id];
  }
  return counts;
}

std::vector<CategoryCount> histogram(const Dataset& dataset) {
  std::vector<CategoryCount> rows;
  for (const auto& [category, count] : category_counts(dataset)) {
    rows.push_back({category, count});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const CategoryCount& a, const CategoryCount& b) {
    return a.count > b.count;
  });
  return rows;
}

}  // namespace genodkit
