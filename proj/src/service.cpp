// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/service.hpp"

// Bodies are JSON whatever the client claims; don't cap curl's default
// form content type at httplib's 8 KiB.
#define CPPHTTPLIB_FORM_URL_ENCODED_PAYLOAD_MAX_LENGTH (std::size_t{1} << 30)
#include "httplib.h"

#include "genodkit/error.hpp"
#include "genodkit/serialization.hpp"

namespace genodkit {

namespace {

Response json_response(int status, const Json& doc) { return {status, dump_json(doc), false}; }

Response error_response(int status, std::string_view code, std::string_view message) {
  return json_response(status, {{"error", {{"code", code}, {"message", message}}}});
}

EvalConfig eval_config_from_json(const Json& j, ApMode default_mode) {
  EvalConfig config;
  config.mode = default_mode;
  if (j.is_null()) return config;
  if (j.contains("mode")) config.mode = parse_ap_mode(j.at("mode").get<std::string>());
  if (j.contains("iou_thresholds")) {
    config.iou_thresholds = j.at("iou_thresholds").get<std::vector<double>>();
  }
  if (j.contains("primary_iou")) config.primary_iou = j.at("primary_iou").get<double>();
  if (j.contains("federated")) {
    const auto f = j.at("federated").get<std::string>();
    if (f == "auto") config.federated = FederatedMode::automatic;
    else if (f == "on") config.federated = FederatedMode::on;
    else if (f == "off") config.federated = FederatedMode::off;
    else throw Error(ErrorCode::parse_error, "unknown federated mode: " + f);
  }
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::string>();
    if (w == "instance_count") config.weights = WeightSource::instance_count;
    else if (w == "uniform") config.weights = WeightSource::uniform;
    else throw Error(ErrorCode::parse_error, "unknown weight source: " + w);
  }
  return config;
}

}  // namespace

Service::Service(ServiceConfig config, Taxonomy taxonomy, HeadRegistry registry)
    : config_(std::move(config)),
      taxonomy_(std::move(taxonomy)),
      taxonomy_digest_(sha256_hex(taxonomy_to_json(taxonomy_.spec()).dump())),
      registry_(std::move(registry)),
      cache_(config_.cache_capacity) {}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    if (path == "/healthz" && method == "GET") {
      return json_response(200, {{"status", "ok"}});
    }
    if (method == "POST") {
      if (path == "/propagate") return handle_propagate(body);
      if (path == "/evaluate") return handle_evaluate(body);
      if (path == "/federate/merge") return handle_federate_merge(body);
    }
    return error_response(404, "not_found",
                          "unknown endpoint: " + std::string(method) + " " + std::string(path));
  } catch (const Error& e) {
    const int status = e.code() == ErrorCode::parse_error ? 400 : 422;
    return error_response(status, error_code_name(e.code()), e.what());
  } catch (const Json::exception& e) {
    return error_response(400, "parse_error", e.what());
  }
}

Response Service::handle_propagate(std::string_view body) {
  const Json doc = parse_json(body);
  double dedup_iou = config_.dedup_iou;
  if (doc.is_object() && doc.contains("dedup_iou")) {
    dedup_iou = doc.at("dedup_iou").get<double>();
  }
  const DetectionSet input = detections_from_json(doc);
  const Json key_config = {
      {"endpoint", "propagate"}, {"dedup_iou", dedup_iou}, {"taxonomy", taxonomy_digest_}};
  const CacheKey key = make_cache_key(detections_to_json(input).dump(), key_config.dump());
  Response r;
  r.body = cache_.get_or_compute(
      key,
      [&] { return dump_json(detections_to_json(propagate_labels(input, taxonomy_, dedup_iou))); },
      &r.cache_hit);
  return r;
}

Response Service::handle_evaluate(std::string_view body) {
  const Json doc = parse_json(body);
  if (!doc.is_object() || !doc.contains("gt") || !doc.contains("detections")) {
    throw Error(ErrorCode::parse_error, "evaluate body needs gt and detections");
  }
  const Json config_doc = doc.value("config", Json());
  const EvalConfig config = eval_config_from_json(config_doc, config_.ap_mode);
  const Json content = {{"gt", doc.at("gt")}, {"detections", doc.at("detections")}};
  const Json key_config = {{"endpoint", "evaluate"},
                           {"config", config_doc},
                           {"mode", ap_mode_name(config_.ap_mode)},
                           {"taxonomy", taxonomy_digest_}};
  const CacheKey key = make_cache_key(content.dump(), key_config.dump());
  Response r;
  r.body = cache_.get_or_compute(
      key,
      [&] {
        const Dataset gt = dataset_from_json(doc.at("gt"), taxonomy_);
        const DetectionSet dets = detections_from_json(doc.at("detections"));
        return dump_json(eval_report_to_json(evaluate(gt, dets, config, &taxonomy_)));
      },
      &r.cache_hit);
  return r;
}

Response Service::handle_federate_merge(std::string_view body) {
  const Json doc = parse_json(body);
  if (!doc.is_object() || !doc.contains("outputs") || !doc.at("outputs").is_object()) {
    throw Error(ErrorCode::parse_error, "merge body needs an outputs object");
  }
  std::lock_guard lock(merge_mutex_);
  if (doc.contains("registry")) {
    for (auto& head : heads_from_json(doc.at("registry"))) {
      const auto current = registry_.snapshot();
      const HeadSpec* existing = current->find(head.head_id);
      if (existing != nullptr && existing->version == head.version &&
          existing->categories == head.categories) {
        continue;
      }
      registry_.register_head(std::move(head));
    }
  }
  const auto registry = registry_.snapshot();

  std::map<std::string, DetectionSet, std::less<>> outputs;
  for (const auto& [head_id, detections] : doc.at("outputs").items()) {
    outputs.emplace(head_id, detections_from_json(detections));
  }
  const DetectionSet merged = merge_head_outputs(*registry, outputs);

  std::set<std::string> image_ids(merged.images.begin(), merged.images.end());
  for (const auto& d : merged.detections) image_ids.insert(d.image_id);
  const std::string content_key = sha256_hex(Json(image_ids).dump());

  Json response = {{"merged", detections_to_json(merged)}, {"diff", nullptr}};
  const auto previous = previous_merges_.find(content_key);
  if (previous != previous_merges_.end()) {
    // Everything owned, before or after, by a head whose version moved.
    HeadSpec changed;
    changed.head_id = "changed";
    std::vector<std::string> changed_heads;
    const auto& old_heads = previous->second.registry.heads();
    for (const auto& [id, head] : registry->heads()) {
      const auto it = old_heads.find(id);
      if (it == old_heads.end() || it->second.version != head.version) {
        changed_heads.push_back(id);
        changed.categories.insert(head.categories.begin(), head.categories.end());
        if (it != old_heads.end()) {
          changed.categories.insert(it->second.categories.begin(), it->second.categories.end());
        }
      }
    }
    for (const auto& [id, head] : old_heads) {
      if (registry->find(id) == nullptr) {
        changed_heads.push_back(id);
        changed.categories.insert(head.categories.begin(), head.categories.end());
      }
    }
    Json diff = diff_report_to_json(non_regression_diff(previous->second.merged, merged, changed));
    diff["changed_heads"] = changed_heads;
    response["diff"] = std::move(diff);
  }
  previous_merges_[content_key] = {*registry, merged};
  return json_response(200, response);
}

int serve(Service& service, const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::invalid_argument, "listen address must be host:port: " + listen);
  }
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::invalid_argument, "bad port in listen address: " + listen);
  }

  httplib::Server server;
  auto route = [&service](const httplib::Request& req, httplib::Response& res) {
    const Response r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_header("X-Cache", r.cache_hit ? "HIT" : "MISS");
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/.*)", route);
  server.Post(R"(/.*)", route);
  return server.listen(host, port) ? 0 : 1;
}

}  // namespace genodkit
