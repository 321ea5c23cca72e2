// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "genodkit/rng.hpp"

namespace genodkit {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 480;

std::string category_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cat%04zu", i);
  return buf;
}

std::string image_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img%06zu", i);
  return buf;
}

BBox random_box(Rng& rng) {
  const double w = rng.uniform_real(20.0, 200.0);
  const double h = rng.uniform_real(20.0, 200.0);
  return {rng.uniform_real(0.0, kWidth - w), rng.uniform_real(0.0, kHeight - h), w, h};
}

}  // namespace

EvalFixture make_eval_fixture(std::size_t images, std::size_t categories, std::size_t detections,
                              std::uint64_t seed) {
  EvalFixture f;
  categories = std::max<std::size_t>(categories, 1);
  images = std::max<std::size_t>(images, 1);

  TaxonomySpec spec;
  spec.version = "synthetic-1";
  const std::size_t roots = std::max<std::size_t>(1, categories / 10);
  for (std::size_t i = 0; i < categories; ++i) {
    CategoryNode n{category_name(i), category_name(i), std::nullopt};
    if (i >= roots) n.parent_id = category_name(i % roots);
    spec.nodes.push_back(std::move(n));
  }
  f.taxonomy = Taxonomy::build(std::move(spec));

  // Zipf-like category popularity gives the long tail.
  std::vector<double> cumulative(categories);
  double total = 0.0;
  for (std::size_t i = 0; i < categories; ++i) {
    total += 1.0 / std::pow(static_cast<double>(i + 1), 0.9);
    cumulative[i] = total;
  }
  Rng rng(derive_seed(seed, "eval-fixture"));
  auto pick_category = [&] {
    const double u = rng.uniform01() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return category_name(std::min<std::size_t>(it - cumulative.begin(), categories - 1));
  };

  f.ground_truth.name = "synthetic";
  f.ground_truth.taxonomy_version = f.taxonomy.version();
  for (std::size_t i = 0; i < images; ++i) {
    const std::string id = image_name(i);
    f.ground_truth.images.push_back({id, kWidth, kHeight, "synthetic"});
    f.detections.images.insert(id);
    const std::size_t objects = 1 + rng.uniform_index(7);
    for (std::size_t k = 0; k < objects; ++k) {
      f.ground_truth.annotations.push_back({id, pick_category(), random_box(rng)});
    }
  }

  const auto& gts = f.ground_truth.annotations;
  f.detections.detections.reserve(detections);
  for (std::size_t i = 0; i < detections; ++i) {
    Detection d;
    if (rng.bernoulli(0.5)) {
      const Annotation& g = gts[rng.uniform_index(gts.size())];
      d.image_id = g.image_id;
      d.category_id = g.category_id;
      const double jitter = 0.1 * std::min(g.bbox.w, g.bbox.h);
      d.bbox = {g.bbox.x + rng.uniform_real(-jitter, jitter),
                g.bbox.y + rng.uniform_real(-jitter, jitter), g.bbox.w, g.bbox.h};
      d.score = rng.uniform_real(0.3, 1.0);
    } else {
      d.image_id = image_name(rng.uniform_index(images));
      d.category_id = pick_category();
      d.bbox = random_box(rng);
      d.score = rng.uniform_real(0.0, 0.7);
    }
    f.detections.detections.push_back(std::move(d));
  }
  return f;
}

}  // namespace genodkit
