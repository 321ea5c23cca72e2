// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "genodkit/error.hpp"
#include "genodkit/rng.hpp"
#include "genodkit/sampling.hpp"

using namespace genodkit;
using namespace genodkit::testing;

namespace {

// One annotation of `category` per image, `count` images.
void add_images(Dataset& d, const std::string& category, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    const std::string id = category + "-" + std::to_string(i);
    d.images.push_back(image(id));
    d.annotations.push_back(ann(id, category, {0, 0, 5, 5}));
  }
}

Dataset long_tail(std::uint64_t seed, std::size_t images) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < images; ++i) {
    const std::string id = "im" + std::to_string(i);
    d.images.push_back(image(id));
    const std::size_t objects = rng.uniform_index(4);
    for (std::size_t k = 0; k < objects; ++k) {
      // geometric-ish popularity
      std::size_t c = 0;
      while (c < 15 && rng.bernoulli(0.55)) ++c;
      d.annotations.push_back(ann(id, "c" + std::to_string(c), {0, 0, 5, 5}));
    }
  }
  return d;
}

}  // namespace

TEST(RepeatFactor, Examples) {
  EXPECT_EQ(repeat_factor(2000, 2000), 1u);
  EXPECT_EQ(repeat_factor(2000, 1000), 2u);
  EXPECT_EQ(repeat_factor(2000, 1999), 2u);
  EXPECT_EQ(repeat_factor(2000, 5000), 1u);
  EXPECT_THROW(repeat_factor(2000, 0), Error);
}

TEST(PlanUpsample, FloorCaseKeepsEverything) {
  Dataset d;
  add_images(d, "sofa", 2000);
  const SamplingPlan plan = plan_upsample(d, 2000);
  for (const auto& [id, r] : plan.repeats) EXPECT_EQ(r, 1u);
  EXPECT_EQ(plan.n_min, 2000u);
}

TEST(PlanUpsample, HalfCountDoubles) {
  Dataset d;
  add_images(d, "lamp", 1000);
  const Dataset out = apply_plan(plan_upsample(d, 2000), d);
  EXPECT_GE(category_counts(out).at("lamp"), 2000u);
  EXPECT_EQ(category_counts(out).at("lamp"), 2000u);
}

TEST(PlanUpsample, ImageTakesMaxFactor) {
  Dataset d;
  add_images(d, "a", 9);  // factor ceil(9/9) = 1
  add_images(d, "b", 3);  // factor ceil(9/3) = 3
  d.images.push_back(image("mixed"));
  d.annotations.push_back(ann("mixed", "a", {0, 0, 5, 5}));
  d.annotations.push_back(ann("mixed", "b", {0, 0, 5, 5}));
  // counts now a=10, b=4 -> factors ceil(9/10)=1, ceil(9/4)=3
  const SamplingPlan plan = plan_upsample(d, 9);
  EXPECT_EQ(plan.repeats.at("mixed"), 3u);
  EXPECT_EQ(plan.repeats.at("a-0"), 1u);
  EXPECT_EQ(plan.repeats.at("b-0"), 3u);
}

TEST(PlanUpsample, EmptyImagesGetOne) {
  Dataset d;
  add_images(d, "a", 1);
  d.images.push_back(image("empty"));
  EXPECT_EQ(plan_upsample(d, 10).repeats.at("empty"), 1u);
}

TEST(PlanUpsample, RejectsBadInput) {
  Dataset d;
  add_images(d, "a", 1);
  EXPECT_THROW(plan_upsample(d, 0), Error);
  EXPECT_THROW(plan_upsample(Dataset{}, 5), Error);
}

TEST(PlanUpsample, FloorAndMonotoneOnRandomFixtures) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Dataset d = long_tail(seed, 200);
    if (d.annotations.empty()) continue;
    const auto before = category_counts(d);
    const SamplingPlan plan = plan_upsample(d, 20);
    EXPECT_EQ(plan_upsample(d, 20), plan);  // no randomness
    const auto after = category_counts(apply_plan(plan, d));
    for (const auto& [c, n] : before) {
      EXPECT_GE(after.at(c), 20u) << c;
      EXPECT_GE(after.at(c), n) << c;
    }
  }
}

TEST(PlanUpsample, OutputHistogramIsRepeatWeighted) {
  const Dataset d = long_tail(5, 100);
  const SamplingPlan plan = plan_upsample(d, 30);
  std::map<std::string, std::size_t, std::less<>> expected;
  for (const auto& a : d.annotations) expected[a.category_id] += plan.repeats.at(a.image_id);
  EXPECT_EQ(category_counts(apply_plan(plan, d)), expected);
}

// Flattening holds when every image carries one category and the head
// category is at least twice the floor; multi-category images can break it
// (see the counterexample test below).
TEST(PlanUpsample, FlatteningOnSingleCategoryImages) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n_min = 5 + rng.uniform_index(30);
    Dataset d;
    add_images(d, "head", 2 * n_min + rng.uniform_index(100));
    const std::size_t tail = 1 + rng.uniform_index(6);
    for (std::size_t c = 0; c < tail; ++c) {
      add_images(d, "t" + std::to_string(c), 1 + rng.uniform_index(3 * n_min));
    }
    const auto before = category_counts(d);
    const auto after = category_counts(apply_plan(plan_upsample(d, n_min), d));
    auto ratio = [](const auto& counts) {
      std::size_t lo = SIZE_MAX;
      std::size_t hi = 0;
      for (const auto& [c, n] : counts) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
      }
      return static_cast<double>(lo) / static_cast<double>(hi);
    };
    EXPECT_GE(ratio(after), ratio(before));
  }
}

TEST(PlanUpsample, FlatteningCounterexampleWithSharedImages) {
  // Rare category A shares images with the head category B, so B is dragged
  // up by A's factor while D, the global minimum after sampling, is not.
  Dataset d;
  for (int i = 0; i < 11; ++i) {
    const std::string id = "ab" + std::to_string(i);
    d.images.push_back(image(id));
    d.annotations.push_back(ann(id, "A", {0, 0, 5, 5}));
    for (int k = 0; k < 3; ++k) d.annotations.push_back(ann(id, "B", {0, 0, 5, 5}));
  }
  add_images(d, "D", 20);
  const auto before = category_counts(d);  // A=11, B=33, D=20
  const auto after = category_counts(apply_plan(plan_upsample(d, 20), d));  // A=22, B=66, D=20
  EXPECT_EQ(after.at("B"), 66u);
  EXPECT_LT(20.0 / 66.0, 11.0 / 33.0);
  EXPECT_EQ(after.at("D"), before.at("D"));
}

TEST(PlanDownsample, FullTargetIsNoOp) {
  const Dataset d = long_tail(1, 10);
  const SamplingPlan plan = plan_downsample(d, 10, 99);
  for (const auto& [id, r] : plan.repeats) EXPECT_EQ(r, 1u);
  EXPECT_EQ(apply_plan(plan, d), d);
}

TEST(PlanDownsample, SingleImageReproducible) {
  const Dataset d = long_tail(1, 10);
  const SamplingPlan a = plan_downsample(d, 1, 1234);
  const SamplingPlan b = plan_downsample(d, 1, 1234);
  EXPECT_EQ(a, b);
  std::size_t kept = 0;
  for (const auto& [id, r] : a.repeats) kept += r;
  EXPECT_EQ(kept, 1u);
}

TEST(PlanDownsample, ExactSizeAndSeedSensitivity) {
  const Dataset d = long_tail(2, 200);
  std::set<std::vector<std::string>> distinct;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Dataset out = apply_plan(plan_downsample(d, 37, seed), d);
    EXPECT_EQ(out.images.size(), 37u);
    std::vector<std::string> ids;
    for (const auto& im : out.images) ids.push_back(im.id);
    distinct.insert(ids);
  }
  EXPECT_GT(distinct.size(), 1u);
}

TEST(PlanDownsample, IndependentOfImageOrder) {
  Dataset d = long_tail(3, 50);
  const SamplingPlan a = plan_downsample(d, 10, 5);
  std::reverse(d.images.begin(), d.images.end());
  EXPECT_EQ(plan_downsample(d, 10, 5), a);
}

TEST(PlanDownsample, TargetOutOfRange) {
  const Dataset d = long_tail(1, 10);
  try {
    plan_downsample(d, 0, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::out_of_range);
    EXPECT_NE(std::string(e.what()).find("target out of range"), std::string::npos);
  }
  EXPECT_THROW(plan_downsample(d, 11, 1), Error);
}

TEST(ApplyPlan, ZeroDropsImageAndAnnotations) {
  Dataset d;
  add_images(d, "a", 3);
  SamplingPlan plan;
  plan.repeats["a-1"] = 0;
  const Dataset out = apply_plan(plan, d);
  EXPECT_EQ(out.images.size(), 2u);
  EXPECT_EQ(out.annotations.size(), 2u);
  for (const auto& a : out.annotations) EXPECT_NE(a.image_id, "a-1");
}

TEST(ApplyPlan, CopiesGetSuffixedIds) {
  Dataset d;
  add_images(d, "a", 1);
  SamplingPlan plan;
  plan.repeats["a-0"] = 3;
  const Dataset out = apply_plan(plan, d);
  std::vector<std::string> ids;
  for (const auto& im : out.images) ids.push_back(im.id);
  EXPECT_EQ(ids, (std::vector<std::string>{"a-0", "a-0#1", "a-0#2"}));
  EXPECT_EQ(out.annotations.size(), 3u);
}

TEST(ApplyPlan, IdentityPlanKeepsHistogram) {
  const Dataset d = long_tail(4, 30);
  SamplingPlan plan;
  for (const auto& im : d.images) plan.repeats[im.id] = 1;
  EXPECT_EQ(histogram(apply_plan(plan, d)), histogram(d));
}

TEST(ApplyPlan, UnknownImageRejected) {
  Dataset d;
  add_images(d, "a", 1);
  SamplingPlan plan;
  plan.repeats["ghost"] = 2;
  try {
    apply_plan(plan, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::unknown_image);
  }
}

TEST(ApplyPlan, FederatedSetsFollowCopies) {
  Dataset d;
  add_images(d, "a", 2);
  FederatedSets fed;
  fed["a"].positive = {"a-0"};
  fed["a"].negative = {"a-1"};
  d.federated = fed;
  SamplingPlan plan;
  plan.repeats["a-0"] = 2;
  plan.repeats["a-1"] = 0;
  const Dataset out = apply_plan(plan, d);
  EXPECT_EQ(out.federated->at("a").positive, (std::set<std::string, std::less<>>{"a-0", "a-0#1"}));
  EXPECT_TRUE(out.federated->at("a").negative.empty());
}

TEST(DistributionReport, RanksByCountBefore) {
  Dataset d;
  add_images(d, "big", 5);
  add_images(d, "small", 2);
  const Dataset out = apply_plan(plan_upsample(d, 4), d);
  const auto rows = distribution_report(d, out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].rank, 1u);
  EXPECT_EQ(rows[0].category, "big");
  EXPECT_EQ(rows[0].count_after, 5u);
  EXPECT_EQ(rows[1].category, "small");
  EXPECT_EQ(rows[1].count_before, 2u);
  EXPECT_EQ(rows[1].count_after, 4u);
}
