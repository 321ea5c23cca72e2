// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "genodkit/cache.hpp"
#include "genodkit/detection.hpp"
#include "genodkit/evaluation.hpp"
#include "genodkit/federation.hpp"
#include "genodkit/postprocess.hpp"
#include "genodkit/taxonomy.hpp"

namespace genodkit {

struct ServiceConfig {
  std::string listen = "127.0.0.1:8080";
  std::size_t cache_capacity = 1024;
  double dedup_iou = 1.0;
  ScoreThresholds thresholds;
  double default_thresh = 0.0;
  ApMode ap_mode = ApMode::exact;
  std::string taxonomy_path;
  std::string registry_path;
};

struct Response {
  int status = 200;
  std::string body;
  bool cache_hit = false;
  std::string content_type = "application/json";
};

// Request handling independent of the HTTP transport. Thread-safe.
//
//   POST /propagate        detections -> propagated detections (cached)
//   POST /evaluate         {gt, detections, config?} -> EvalReport (cached)
//   POST /federate/merge   {registry?, outputs} -> merged detections plus a
//                          non-regression diff against the previous merge of
//                          the same image set
//   GET  /healthz
class Service {
 public:
  Service(ServiceConfig config, Taxonomy taxonomy, HeadRegistry registry = {});

  Response handle(std::string_view method, std::string_view path, std::string_view body);

  const ResultCache& cache() const noexcept { return cache_; }
  const ServiceConfig& config() const noexcept { return config_; }

 private:
  Response handle_propagate(std::string_view body);
  Response handle_evaluate(std::string_view body);
  Response handle_federate_merge(std::string_view body);

  struct MergeRecord {
    HeadRegistry registry;
    DetectionSet merged;
  };

  ServiceConfig config_;
  Taxonomy taxonomy_;
  std::string taxonomy_digest_;
  RegistryStore registry_;
  ResultCache cache_;
  std::mutex merge_mutex_;
  std::map<std::string, MergeRecord> previous_merges_;
};

/// Blocks serving HTTP on config.listen ("host:port"). Returns nonzero if the
/// socket cannot be bound.
int serve(Service& service, const std::string& listen);

}  // namespace genodkit
