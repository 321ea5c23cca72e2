// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>

#include "genodkit/dataset.hpp"
#include "genodkit/detection.hpp"
#include "genodkit/taxonomy.hpp"

namespace genodkit {

struct EvalFixture {
  Taxonomy taxonomy;
  Dataset ground_truth;
  DetectionSet detections;
};

/// Long-tailed synthetic benchmark: `categories` categories in a two-level
/// forest, ground truth spread over `images` images and `detections`
/// detections mixing jittered true boxes with clutter.
EvalFixture make_eval_fixture(std::size_t images, std::size_t categories, std::size_t detections,
                              std::uint64_t seed);

}  // namespace genodkit
