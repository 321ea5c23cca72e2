// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

// JSON document formats shared by the CLI, the service and crowd adapters.
// Object keys are emitted in sorted order, so equal values serialize to equal
// bytes.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "genodkit/annotation_pipeline.hpp"
#include "genodkit/dataset.hpp"
#include "genodkit/detection.hpp"
#include "genodkit/evaluation.hpp"
#include "genodkit/federation.hpp"
#include "genodkit/sampling.hpp"
#include "genodkit/taxonomy.hpp"

namespace genodkit {

using Json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Throws Error(io_error) or Error(parse_error), both naming the path.
Json read_json_file(const std::filesystem::path& path);
Json parse_json(std::string_view text);

/// Two-space indented with a trailing newline.
std::string dump_json(const Json& doc);

// {version?, nodes: [{id, name, parent_id?}], mappings: [{dataset, source_id, target_id}]}
Json taxonomy_to_json(const TaxonomySpec& spec);
TaxonomySpec taxonomy_spec_from_json(const Json& doc);

// {header: {dataset_name, taxonomy_version, bbox_format?}, images, annotations, federated?}
Json dataset_to_json(const Dataset& dataset);
Dataset dataset_from_json(const Json& doc, const Taxonomy& taxonomy,
                          const DatasetLoadOptions& options = {});

// [{image_id, category, bbox: [x,y,w,h], score, head_id?, provenance}] or
// {images: [...], detections: [...]} when images without detections are declared.
Json detection_to_json(const Detection& detection);
Detection detection_from_json(const Json& doc);
Json detections_to_json(const DetectionSet& detections);
DetectionSet detections_from_json(const Json& doc);
DetectionSet load_detections(const std::filesystem::path& path);
void save_detections(const DetectionSet& detections, const std::filesystem::path& path);

// [{head_id, version, categories: [ids], default?}]
Json heads_to_json(const HeadRegistry& registry);
std::vector<HeadSpec> heads_from_json(const Json& doc);
HeadRegistry load_registry(const std::filesystem::path& path);

// {n_min | target_images, seed, repeats: [{image_id, count}]}
Json plan_to_json(const SamplingPlan& plan);
SamplingPlan plan_from_json(const Json& doc);

std::string distribution_csv(const std::vector<DistributionRow>& rows);

Json eval_report_to_json(const EvalReport& report);
/// category,n_gt,AP50,weight
std::string eval_report_csv(const EvalReport& report);

// {status: PASS|FAIL, changed_categories, foreign_differences: [{image_id, category, field}]}
Json diff_report_to_json(const DiffReport& report);

// Task exchange records.
Json task_to_json(const MicroTask& task);
MicroTask task_from_json(const Json& doc);
Json response_to_json(const JudgeResponse& response);
JudgeResponse response_from_json(const Json& doc);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace genodkit
