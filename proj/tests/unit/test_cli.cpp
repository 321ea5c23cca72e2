// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "genodkit/cli.hpp"
#include "genodkit/dataset.hpp"
#include "genodkit/ledger.hpp"
#include "genodkit/serialization.hpp"

using namespace genodkit;
using namespace genodkit::testing;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    taxonomy_ = (dir_ / "taxonomy.json").string();
    save_taxonomy(household_taxonomy(), taxonomy_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  TempDir dir_;
  std::string taxonomy_;
};

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"eval", "run", "--gt"}).code, kExitUsage);
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
}

TEST_F(CliTest, TaxonomyValidate) {
  const CliRun ok = cli({"taxonomy", "validate", taxonomy_});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_NE(ok.out.find("ok: 9 nodes"), std::string::npos);

  write_text_file(path("cyclic.json"),
                  R"({"nodes":[{"id":"a","name":"a","parent_id":"b"},{"id":"b","name":"b","parent_id":"a"}],"mappings":[]})");
  const CliRun bad = cli({"taxonomy", "validate", path("cyclic.json")});
  EXPECT_EQ(bad.code, kExitValidation);
  EXPECT_NE(bad.err.find("cycle"), std::string::npos);

  EXPECT_EQ(cli({"taxonomy", "validate", path("missing.json")}).code, kExitValidation);
}

TEST_F(CliTest, EvalRun) {
  Dataset gt;
  gt.name = "gt";
  gt.images = {image("a"), image("b")};
  gt.annotations = {ann("a", "sofa", {0, 0, 10, 10}), ann("b", "sofa", {0, 0, 10, 10})};
  save_dataset(gt, path("gt.json"));
  DetectionSet dets;
  dets.detections = {det("a", "sofa", {0, 0, 10, 10}, 0.9)};
  save_detections(dets, path("dets.json"));

  const CliRun r = cli({"--taxonomy", taxonomy_, "eval", "run", "--gt", path("gt.json"), "--dets",
                     path("dets.json"), "--out", path("report.json"), "--csv", path("report.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json report = read_json_file(path("report.json"));
  EXPECT_DOUBLE_EQ(report.at("aggregate").at("AP50").get<double>(), 0.5);
  EXPECT_EQ(read_text_file(path("report.csv")), "category,n_gt,AP50,weight\nsofa,2,0.5,2\n");

  EXPECT_EQ(cli({"--taxonomy", taxonomy_, "eval", "run", "--gt", path("gt.json"), "--dets",
                 path("dets.json"), "--mode", "voc"})
                .code,
            kExitUsage);
  EXPECT_EQ(cli({"eval", "run", "--gt", path("gt.json"), "--dets", path("dets.json")}).code,
            kExitUsage);
}

TEST_F(CliTest, PostPropagate) {
  DetectionSet dets;
  dets.detections = {det("b", "blue_jay", {0, 0, 10, 10}, 0.9)};
  save_detections(dets, path("in.json"));
  const CliRun r = cli({"--taxonomy", taxonomy_, "post", "propagate", "--dets", path("in.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(detections_from_json(parse_json(r.out)).detections.size(), 3u);
}

TEST_F(CliTest, PipelineReport) {
  Ledger l;
  l.append({"a/t0", TaskKind::BoxDrawing, 1.2, 0.26 * 10 * 60});
  l.record_image({"a", 1, 10});
  save_ledger(l, path("ledger.csv"));
  const CliRun r = cli({"pipeline", "report", "--ledger", path("ledger.csv"), "--baseline-cost-bbox",
                     "0.65", "--baseline-time-bbox", "0.67"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("81.5%"), std::string::npos);
  EXPECT_NE(r.out.find("61.2%"), std::string::npos);
}

TEST_F(CliTest, FedRegisterAndDiff) {
  const std::string reg = path("registry.json");
  ASSERT_EQ(cli({"--registry", reg, "fed", "register", "--head-id", "fashion", "--version", "1",
                 "--categories", "dress,shoe"})
                .code,
            kExitOk);
  const CliRun overlap = cli({"--registry", reg, "fed", "register", "--head-id", "other", "--version",
                           "1", "--categories", "shoe"});
  EXPECT_EQ(overlap.code, kExitValidation);
  EXPECT_NE(overlap.err.find("category overlap: shoe (owned by fashion)"), std::string::npos);

  DetectionSet before;
  before.detections = {det("a", "dress", {0, 0, 10, 10}, 0.9)};
  DetectionSet after = before;
  after.detections[0].score = 0.4;
  save_detections(before, path("before.json"));
  save_detections(after, path("after.json"));
  ASSERT_EQ(cli({"--registry", reg, "fed", "register", "--head-id", "hf", "--version", "1",
                 "--categories", "sofa"})
                .code,
            kExitOk);
  const CliRun diff = cli({"--registry", reg, "fed", "diff", "--before", path("before.json"), "--after",
                        path("after.json"), "--head", "hf"});
  EXPECT_EQ(diff.code, kExitValidation);
  EXPECT_NE(diff.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, SampleUpsampleIsDeterministic) {
  Dataset d;
  d.name = "d";
  d.images = {image("a"), image("b")};
  d.annotations = {ann("a", "sofa", {0, 0, 10, 10}), ann("b", "lamp", {0, 0, 10, 10}),
                   ann("b", "lamp", {20, 0, 10, 10})};
  save_dataset(d, path("d.json"));
  const auto args = std::vector<std::string>{"--taxonomy", taxonomy_, "sample", "upsample",
                                             "--dataset", path("d.json"), "--n-min", "4"};
  const CliRun a = cli(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(cli(args).out, a.out);
  const Json plan = parse_json(a.out);
  EXPECT_EQ(plan.at("repeats").size(), 2u);
}
