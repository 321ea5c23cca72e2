// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "genodkit/dataset.hpp"
#include "genodkit/detection.hpp"
#include "genodkit/taxonomy.hpp"

namespace genodkit::testing {

inline CategoryNode node(std::string id, std::optional<std::string> parent = std::nullopt) {
  return {id, id, std::move(parent)};
}

// animal > bird > blue_jay, animal > dog, furniture > sofa, lamp;
// dsB maps couch -> sofa.
inline Taxonomy household_taxonomy() {
  TaxonomySpec spec;
  spec.version = "test-1";
  spec.nodes = {node("animal"),           node("bird", "animal"), node("blue_jay", "bird"),
                node("dog", "animal"),    node("furniture"),      node("sofa", "furniture"),
                node("lamp", "furniture"), node("dress"),          node("shoe")};
  spec.mappings = {{"dsB", "couch", "sofa"}};
  return Taxonomy::build(std::move(spec));
}

inline Detection det(std::string image, std::string category, BBox box, double score) {
  Detection d;
  d.image_id = std::move(image);
  d.category_id = std::move(category);
  d.bbox = box;
  d.score = score;
  return d;
}

inline Annotation ann(std::string image, std::string category, BBox box) {
  return {std::move(image), std::move(category), box};
}

inline ImageRecord image(std::string id, int w = 640, int h = 480, std::string source = "") {
  return {std::move(id), w, h, std::move(source)};
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("genodkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace genodkit::testing
