// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/serialization.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "genodkit/error.hpp"

namespace genodkit {

namespace {

template <typename F>
auto schema_guard(std::string_view what, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::parse_error, "malformed " + std::string(what) + ": " + e.what());
  }
}

Json bbox_to_json(const BBox& b) { return Json::array({b.x, b.y, b.w, b.h}); }

BBox bbox_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCode::parse_error, "bbox must be an array [x, y, w, h]");
  }
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

template <typename Set>
Json string_array(const Set& values) {
  Json out = Json::array();
  for (const auto& v : values) {
    out.push_back(v);
  }
  return out;
}

const char* origin_name(Origin o) { return o == Origin::model ? "model" : "propagated"; }

Origin parse_origin(const std::string& s) {
  if (s == "model") return Origin::model;
  if (s == "propagated") return Origin::propagated;
  throw Error(ErrorCode::parse_error, "unknown provenance origin: " + s);
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::io_error, path.string() + ": cannot open file");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io_error, path.string() + ": cannot open file for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw Error(ErrorCode::io_error, path.string() + ": write failed");
  }
}

Json parse_json(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::parse_error, std::string("parse failure: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_json(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------- taxonomy

Json taxonomy_to_json(const TaxonomySpec& spec) {
  Json nodes = Json::array();
  for (const auto& n : spec.nodes) {
    Json j = {{"id", n.id}, {"name", n.display_name}};
    if (n.parent_id) {
      j["parent_id"] = *n.parent_id;
    }
    nodes.push_back(std::move(j));
  }
  Json mappings = Json::array();
  for (const auto& m : spec.mappings) {
    mappings.push_back({{"dataset", m.dataset}, {"source_id", m.source_id}, {"target_id", m.target_id}});
  }
  Json doc = {{"nodes", std::move(nodes)}, {"mappings", std::move(mappings)}};
  if (!spec.version.empty()) {
    doc["version"] = spec.version;
  }
  return doc;
}

TaxonomySpec taxonomy_spec_from_json(const Json& doc) {
  return schema_guard("taxonomy", [&] {
    TaxonomySpec spec;
    spec.version = doc.value("version", std::string());
    for (const auto& j : doc.at("nodes")) {
      CategoryNode n;
      n.id = j.at("id").get<std::string>();
      n.display_name = j.value("name", n.id);
      if (j.contains("parent_id") && !j.at("parent_id").is_null()) {
        n.parent_id = j.at("parent_id").get<std::string>();
      }
      spec.nodes.push_back(std::move(n));
    }
    if (doc.contains("mappings")) {
      for (const auto& j : doc.at("mappings")) {
        spec.mappings.push_back({j.at("dataset").get<std::string>(),
                                 j.at("source_id").get<std::string>(),
                                 j.at("target_id").get<std::string>()});
      }
    }
    return spec;
  });
}

// ----------------------------------------------------------------- dataset

Json dataset_to_json(const Dataset& d) {
  Json images = Json::array();
  for (const auto& im : d.images) {
    Json j = {{"id", im.id}, {"width", im.width}, {"height", im.height}};
    if (!im.source.empty() && im.source != d.name) {
      j["source"] = im.source;
    }
    images.push_back(std::move(j));
  }
  Json annotations = Json::array();
  for (const auto& a : d.annotations) {
    annotations.push_back(
        {{"image_id", a.image_id}, {"category", a.category_id}, {"bbox", bbox_to_json(a.bbox)}});
  }
  Json doc = {{"header", {{"dataset_name", d.name}, {"taxonomy_version", d.taxonomy_version}}},
              {"images", std::move(images)},
              {"annotations", std::move(annotations)}};
  if (d.federated) {
    Json fed = Json::array();
    for (const auto& [category, entry] : *d.federated) {
      fed.push_back({{"category", category},
                     {"positive", string_array(entry.positive)},
                     {"negative", string_array(entry.negative)}});
    }
    doc["federated"] = std::move(fed);
  }
  return doc;
}

Dataset dataset_from_json(const Json& doc, const Taxonomy& taxonomy,
                          const DatasetLoadOptions& options) {
  Dataset raw = schema_guard("dataset", [&] {
    Dataset d;
    const Json& header = doc.at("header");
    d.name = header.at("dataset_name").get<std::string>();
    d.taxonomy_version = header.value("taxonomy_version", std::string());
    const std::string format = header.value("bbox_format", std::string("xywh"));
    if (format != "xywh" && format != "xyxy") {
      throw Error(ErrorCode::parse_error, "unknown bbox_format: " + format);
    }
    for (const auto& j : doc.at("images")) {
      d.images.push_back({j.at("id").get<std::string>(), j.at("width").get<int>(),
                          j.at("height").get<int>(), j.value("source", d.name)});
    }
    for (const auto& j : doc.at("annotations")) {
      BBox box = bbox_from_json(j.at("bbox"));
      if (format == "xyxy") {
        box = box_from_corners(box.x, box.y, box.w, box.h);
      }
      d.annotations.push_back(
          {j.at("image_id").get<std::string>(), j.at("category").get<std::string>(), box});
    }
    if (doc.contains("federated") && !doc.at("federated").is_null()) {
      FederatedSets fed;
      for (const auto& j : doc.at("federated")) {
        auto& entry = fed[j.at("category").get<std::string>()];
        for (const auto& id : j.value("positive", Json::array())) {
          entry.positive.insert(id.get<std::string>());
        }
        for (const auto& id : j.value("negative", Json::array())) {
          entry.negative.insert(id.get<std::string>());
        }
      }
      d.federated = std::move(fed);
    }
    return d;
  });
  return resolve_dataset(std::move(raw), taxonomy, options);
}

// -------------------------------------------------------------- detections

Json detection_to_json(const Detection& d) {
  Json prov = {{"origin", origin_name(d.provenance.origin)}};
  if (d.provenance.from_category) {
    prov["from_category"] = *d.provenance.from_category;
  }
  Json j = {{"image_id", d.image_id},
            {"category", d.category_id},
            {"bbox", bbox_to_json(d.bbox)},
            {"score", d.score},
            {"provenance", std::move(prov)}};
  if (d.head_id) {
    j["head_id"] = *d.head_id;
  }
  return j;
}

Detection detection_from_json(const Json& j) {
  return schema_guard("detection", [&] {
    Detection d;
    d.image_id = j.at("image_id").get<std::string>();
    d.category_id = j.at("category").get<std::string>();
    d.bbox = bbox_from_json(j.at("bbox"));
    d.score = j.at("score").get<double>();
    if (j.contains("head_id") && !j.at("head_id").is_null()) {
      d.head_id = j.at("head_id").get<std::string>();
    }
    if (j.contains("provenance")) {
      const Json& p = j.at("provenance");
      d.provenance.origin = parse_origin(p.at("origin").get<std::string>());
      if (p.contains("from_category") && !p.at("from_category").is_null()) {
        d.provenance.from_category = p.at("from_category").get<std::string>();
      }
    }
    validate_detection(d);
    return d;
  });
}

Json detections_to_json(const DetectionSet& ds) {
  Json arr = Json::array();
  for (const auto& d : ds.detections) {
    arr.push_back(detection_to_json(d));
  }
  if (ds.images.empty()) {
    return arr;
  }
  return {{"images", string_array(ds.images)}, {"detections", std::move(arr)}};
}

DetectionSet detections_from_json(const Json& doc) {
  return schema_guard("detections", [&] {
    DetectionSet ds;
    const Json* arr = &doc;
    if (doc.is_object()) {
      arr = &doc.at("detections");
      for (const auto& id : doc.value("images", Json::array())) {
        ds.images.insert(id.get<std::string>());
      }
    }
    if (!arr->is_array()) {
      throw Error(ErrorCode::parse_error, "detections must be an array");
    }
    ds.detections.reserve(arr->size());
    for (const auto& j : *arr) {
      ds.detections.push_back(detection_from_json(j));
    }
    return ds;
  });
}

DetectionSet load_detections(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return detections_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_detections(const DetectionSet& detections, const std::filesystem::path& path) {
  write_text_file(path, dump_json(detections_to_json(detections)));
}

// ---------------------------------------------------------------- registry

Json heads_to_json(const HeadRegistry& registry) {
  Json arr = Json::array();
  for (const auto& [id, head] : registry.heads()) {
    Json j = {{"head_id", head.head_id},
              {"version", head.version},
              {"categories", string_array(head.categories)}};
    if (head.is_default) {
      j["default"] = true;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

std::vector<HeadSpec> heads_from_json(const Json& doc) {
  return schema_guard("registry", [&] {
    std::vector<HeadSpec> heads;
    for (const auto& j : doc) {
      HeadSpec h;
      h.head_id = j.at("head_id").get<std::string>();
      h.version = j.at("version").get<std::uint64_t>();
      for (const auto& c : j.at("categories")) {
        h.categories.insert(c.get<std::string>());
      }
      h.is_default = j.value("default", false);
      heads.push_back(std::move(h));
    }
    return heads;
  });
}

HeadRegistry load_registry(const std::filesystem::path& path) {
  const Json doc = read_json_file(path);
  try {
    return registry_from_heads(heads_from_json(doc));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// ------------------------------------------------------------------ sampling

Json plan_to_json(const SamplingPlan& plan) {
  Json repeats = Json::array();
  for (const auto& [id, count] : plan.repeats) {
    repeats.push_back({{"image_id", id}, {"count", count}});
  }
  Json doc = {{"seed", plan.seed}, {"repeats", std::move(repeats)}};
  if (plan.n_min) {
    doc["n_min"] = *plan.n_min;
  }
  if (plan.target_images) {
    doc["target_images"] = *plan.target_images;
  }
  return doc;
}

SamplingPlan plan_from_json(const Json& doc) {
  return schema_guard("sampling plan", [&] {
    SamplingPlan plan;
    plan.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("n_min")) {
      plan.n_min = doc.at("n_min").get<std::size_t>();
    }
    if (doc.contains("target_images")) {
      plan.target_images = doc.at("target_images").get<std::size_t>();
    }
    for (const auto& j : doc.at("repeats")) {
      const auto count = j.at("count").get<long long>();
      if (count < 0) {
        throw Error(ErrorCode::parse_error, "negative repeat count");
      }
      plan.repeats[j.at("image_id").get<std::string>()] = static_cast<std::size_t>(count);
    }
    return plan;
  });
}

std::string distribution_csv(const std::vector<DistributionRow>& rows) {
  std::string out = "rank,category,count_before,count_after\n";
  for (const auto& r : rows) {
    out += std::to_string(r.rank) + "," + r.category + "," + std::to_string(r.count_before) + "," +
           std::to_string(r.count_after) + "\n";
  }
  return out;
}

// -------------------------------------------------------------- evaluation

namespace {

const char* weight_source_name(WeightSource w) {
  switch (w) {
    case WeightSource::instance_count: return "instance_count";
    case WeightSource::uniform: return "uniform";
    case WeightSource::custom: return "custom";
  }
  return "instance_count";
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json eval_report_to_json(const EvalReport& r) {
  Json cats = Json::array();
  for (const auto& c : r.categories) {
    cats.push_back({{"category", c.category},
                    {"n_gt", c.n_gt},
                    {"n_det", c.n_det},
                    {"AP50", optional_number(c.ap50)},
                    {"AP", optional_number(c.ap)},
                    {"weight", c.weight}});
  }
  return {{"config",
           {{"iou_thresholds", r.config.iou_thresholds},
            {"primary_iou", r.config.primary_iou},
            {"mode", ap_mode_name(r.config.mode)},
            {"federated", r.federated},
            {"weights", weight_source_name(r.config.weights)}}},
          {"categories", std::move(cats)},
          {"excluded", r.excluded},
          {"aggregate",
           {{"AP50", r.ap50},
            {"wAP50", r.wap50},
            {"AP", r.ap},
            {"num_categories", r.categories.size() - r.excluded.size()}}}};
}

std::string eval_report_csv(const EvalReport& r) {
  std::string out = "category,n_gt,AP50,weight\n";
  for (const auto& c : r.categories) {
    out += c.category + "," + std::to_string(c.n_gt) + "," +
           (c.ap50 ? format_number(*c.ap50) : std::string()) + "," + format_number(c.weight) + "\n";
  }
  return out;
}

Json diff_report_to_json(const DiffReport& r) {
  Json foreign = Json::array();
  for (const auto& f : r.foreign_differences) {
    foreign.push_back({{"image_id", f.image_id}, {"category", f.category}, {"field", f.field}});
  }
  return {{"status", r.pass ? "PASS" : "FAIL"},
          {"changed_categories", r.changed_categories},
          {"foreign_differences", std::move(foreign)}};
}

// ----------------------------------------------------------- task exchange

namespace {

Json marker_to_json(const Marker& m) {
  Json j = {{"id", m.id},
            {"category", m.category},
            {"x", m.point.x},
            {"y", m.point.y},
            {"extent", m.extent},
            {"dropped", m.dropped},
            {"box_attempts", m.box_attempts},
            {"box_verified", m.box_verified}};
  j["verified"] = m.verified ? Json(*m.verified) : Json(nullptr);
  if (m.box) {
    j["box"] = bbox_to_json(*m.box);
  }
  return j;
}

Marker marker_from_json(const Json& j) {
  Marker m;
  m.id = j.at("id").get<std::size_t>();
  m.category = j.at("category").get<std::string>();
  m.point = {j.at("x").get<double>(), j.at("y").get<double>()};
  m.extent = j.value("extent", 0.0);
  m.dropped = j.value("dropped", false);
  m.box_attempts = j.value("box_attempts", std::size_t{0});
  m.box_verified = j.value("box_verified", false);
  if (j.contains("verified") && !j.at("verified").is_null()) {
    m.verified = j.at("verified").get<bool>();
  }
  if (j.contains("box")) {
    m.box = bbox_from_json(j.at("box"));
  }
  return m;
}

}  // namespace

Json task_to_json(const MicroTask& task) {
  Json payload = std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DiscoveryPayload>) {
          return {{"known_categories", p.known_categories}};
        } else if constexpr (std::is_same_v<T, MarkerPayload>) {
          return {{"marker", marker_to_json(p.marker)}};
        } else if constexpr (std::is_same_v<T, CategoryPayload>) {
          Json markers = Json::array();
          for (const auto& m : p.markers) markers.push_back(marker_to_json(m));
          return {{"category", p.category}, {"markers", std::move(markers)}};
        } else {
          return {{"marker", marker_to_json(p.marker)}, {"box", bbox_to_json(p.box)}};
        }
      },
      task.payload);
  return {{"task_id", task.task_id},
          {"image_id", task.image_id},
          {"kind", task_kind_name(task.kind)},
          {"payload", std::move(payload)},
          {"attempt", task.attempt}};
}

MicroTask task_from_json(const Json& j) {
  return schema_guard("task", [&] {
    MicroTask t;
    t.task_id = j.at("task_id").get<std::string>();
    t.image_id = j.at("image_id").get<std::string>();
    t.kind = parse_task_kind(j.at("kind").get<std::string>());
    t.attempt = j.value("attempt", std::size_t{1});
    const Json& p = j.at("payload");
    switch (t.kind) {
      case TaskKind::CategoryDiscovery:
        t.payload = DiscoveryPayload{p.at("known_categories").get<std::vector<std::string>>()};
        break;
      case TaskKind::MarkerVerification:
      case TaskKind::MarkerCorrectnessVerification:
      case TaskKind::BoxDrawing:
        t.payload = MarkerPayload{marker_from_json(p.at("marker"))};
        break;
      case TaskKind::InstanceMarking:
      case TaskKind::CoverageVerification:
      case TaskKind::NegativeSetSelection: {
        CategoryPayload cp;
        cp.category = p.at("category").get<std::string>();
        for (const auto& m : p.value("markers", Json::array())) {
          cp.markers.push_back(marker_from_json(m));
        }
        t.payload = std::move(cp);
        break;
      }
      case TaskKind::BoxVerification:
        t.payload = BoxPayload{marker_from_json(p.at("marker")), bbox_from_json(p.at("box"))};
        break;
    }
    return t;
  });
}

Json response_to_json(const JudgeResponse& r) {
  Json verdict = std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SkipVerdict>) {
          return {{"type", "skip"}};
        } else if constexpr (std::is_same_v<T, MarkVerdict>) {
          return {{"type", "mark"},
                  {"category", v.category},
                  {"x", v.point.x},
                  {"y", v.point.y},
                  {"extent", v.extent}};
        } else if constexpr (std::is_same_v<T, MarksVerdict>) {
          Json marks = Json::array();
          for (const auto& m : v.marks) {
            marks.push_back({{"x", m.point.x}, {"y", m.point.y}, {"extent", m.extent}});
          }
          return {{"type", "marks"}, {"marks", std::move(marks)}};
        } else if constexpr (std::is_same_v<T, VoteVerdict>) {
          return {{"type", "vote"}, {"yes", v.yes}};
        } else {
          return {{"type", "box"}, {"bbox", bbox_to_json(v.box)}};
        }
      },
      r.verdict);
  return {{"task_id", r.task_id},
          {"judge_id", r.judge_id},
          {"verdict", std::move(verdict)},
          {"latency_s", r.latency_s},
          {"cost", r.cost}};
}

JudgeResponse response_from_json(const Json& j) {
  return schema_guard("response", [&] {
    JudgeResponse r;
    r.task_id = j.at("task_id").get<std::string>();
    r.judge_id = j.at("judge_id").get<std::string>();
    r.latency_s = j.at("latency_s").get<double>();
    r.cost = j.at("cost").get<double>();
    if (r.latency_s < 0.0 || r.cost < 0.0) {
      throw Error(ErrorCode::parse_error, "latency and cost must be non-negative");
    }
    const Json& v = j.at("verdict");
    const std::string type = v.at("type").get<std::string>();
    if (type == "skip") {
      r.verdict = SkipVerdict{};
    } else if (type == "mark") {
      r.verdict = MarkVerdict{v.at("category").get<std::string>(),
                              {v.at("x").get<double>(), v.at("y").get<double>()},
                              v.at("extent").get<double>()};
    } else if (type == "marks") {
      MarksVerdict mv;
      for (const auto& m : v.at("marks")) {
        mv.marks.push_back(
            {{m.at("x").get<double>(), m.at("y").get<double>()}, m.at("extent").get<double>()});
      }
      r.verdict = std::move(mv);
    } else if (type == "vote") {
      r.verdict = VoteVerdict{v.at("yes").get<bool>()};
    } else if (type == "box") {
      r.verdict = BoxVerdict{bbox_from_json(v.at("bbox"))};
    } else {
      throw Error(ErrorCode::parse_error, "unknown verdict type: " + type);
    }
    return r;
  });
}

}  // namespace genodkit
