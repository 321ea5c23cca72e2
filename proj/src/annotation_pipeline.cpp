// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/annotation_pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "genodkit/error.hpp"

namespace genodkit {

const char* job_phase_name(JobPhase phase) noexcept {
  switch (phase) {
    case JobPhase::Discovery: return "Discovery";
    case JobPhase::MarkerVerify: return "MarkerVerify";
    case JobPhase::Marking: return "Marking";
    case JobPhase::BoxDraw: return "BoxDraw";
    case JobPhase::Done: return "Done";
  }
  return "Done";
}

std::array<KindCost, kTaskKindCount> PipelineConfig::default_costs() {
  std::array<KindCost, kTaskKindCount> c{};
  c[static_cast<std::size_t>(TaskKind::CategoryDiscovery)] = {0.02, 12.0};
  c[static_cast<std::size_t>(TaskKind::MarkerVerification)] = {0.005, 3.0};
  c[static_cast<std::size_t>(TaskKind::InstanceMarking)] = {0.03, 15.0};
  c[static_cast<std::size_t>(TaskKind::CoverageVerification)] = {0.005, 4.0};
  c[static_cast<std::size_t>(TaskKind::MarkerCorrectnessVerification)] = {0.005, 3.0};
  c[static_cast<std::size_t>(TaskKind::BoxDrawing)] = {0.03, 10.0};
  c[static_cast<std::size_t>(TaskKind::BoxVerification)] = {0.005, 3.0};
  c[static_cast<std::size_t>(TaskKind::NegativeSetSelection)] = {0.005, 3.0};
  return c;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::invalid_argument, m); };
  if (overlap_k < 1 || overlap_k % 2 == 0) fail("overlap_k must be odd and at least 1");
  if (skip_limit < 1) fail("skip_limit must be at least 1");
  if (max_discovery_tasks < 1) fail("max_discovery_tasks must be at least 1");
  if (max_marking_rounds < 1) fail("max_marking_rounds must be at least 1");
  if (max_box_attempts < 1) fail("max_box_attempts must be at least 1");
  if (!(min_dimension >= 0.0)) fail("min_dimension must be non-negative");
  if (!(box_accept_iou > 0.0 && box_accept_iou <= 1.0)) fail("box_accept_iou must be in (0, 1]");
  for (const auto& c : costs) {
    if (!(c.cost >= 0.0) || !(c.latency_s >= 0.0)) fail("task costs must be non-negative");
  }
}

ImageJob make_job(std::string image_id, int width, int height, const PipelineConfig& config) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::invalid_argument, "image " + image_id + " has non-positive dimensions");
  }
  ImageJob job;
  job.image_id = std::move(image_id);
  job.width = width;
  job.height = height;
  job.min_dimension = config.min_dimension;
  return job;
}

std::size_t responses_required(TaskKind kind, const PipelineConfig& config) noexcept {
  return is_verification(kind) ? config.overlap_k : 1;
}

namespace {

bool live(const Marker& m) { return !m.dropped; }

std::vector<Marker> markers_of(const ImageJob& job, const std::string& category) {
  std::vector<Marker> out;
  for (const auto& m : job.markers) {
    if (m.category == category && live(m)) out.push_back(m);
  }
  return out;
}

// Work still owed to a verified category during the Marking phase.
enum class MarkingStep { mark, coverage, correctness, none };

MarkingStep marking_step(const ImageJob& job, const DiscoveredCategory& c,
                         const PipelineConfig& config, const Marker** pending) {
  if (c.marking_rounds == 0 ||
      (c.coverage_ok == false && c.marking_rounds < config.max_marking_rounds)) {
    return MarkingStep::mark;
  }
  if (!c.coverage_ok.has_value()) return MarkingStep::coverage;
  for (const auto& m : job.markers) {
    if (m.category == c.category && live(m) && !m.verified.has_value()) {
      *pending = &m;
      return MarkingStep::correctness;
    }
  }
  return MarkingStep::none;
}

const Marker* pending_box_marker(const ImageJob& job) {
  for (const auto& m : job.markers) {
    if (live(m) && m.verified == true && !m.box_verified) return &m;
  }
  return nullptr;
}

// Moves the job forward through phases with no outstanding work.
void advance(ImageJob& job, const PipelineConfig& config) {
  for (;;) {
    switch (job.phase) {
      case JobPhase::Discovery:
        if (job.consecutive_skips >= config.skip_limit) {
          job.phase = JobPhase::MarkerVerify;
          continue;
        }
        if (job.discovery_tasks >= config.max_discovery_tasks) {
          job.events.push_back({"", "discovery stopped after " +
                                        std::to_string(job.discovery_tasks) + " tasks"});
          job.phase = JobPhase::MarkerVerify;
          continue;
        }
        return;
      case JobPhase::MarkerVerify:
        for (const auto& c : job.categories) {
          if (!c.verified.has_value()) return;
        }
        job.phase = JobPhase::Marking;
        continue;
      case JobPhase::Marking: {
        bool pending = false;
        for (auto& c : job.categories) {
          if (c.verified != true || c.marking_done) continue;
          const Marker* m = nullptr;
          if (marking_step(job, c, config, &m) == MarkingStep::none) {
            c.marking_done = true;
          } else {
            pending = true;
          }
        }
        if (pending) return;
        job.phase = JobPhase::BoxDraw;
        continue;
      }
      case JobPhase::BoxDraw:
        if (pending_box_marker(job) != nullptr) return;
        job.phase = JobPhase::Done;
        continue;
      case JobPhase::Done:
        return;
    }
  }
}

std::string task_id_for(const ImageJob& job) {
  return job.image_id + "/t" + std::to_string(job.tasks_completed);
}

MicroTask make_task(const ImageJob& job, TaskKind kind, TaskPayload payload,
                    std::size_t attempt = 1) {
  return {task_id_for(job), job.image_id, kind, std::move(payload), attempt};
}

Error mismatch(const MicroTask& task, const std::string& what) {
  return Error(ErrorCode::task_mismatch, "task " + task.task_id + ": " + what);
}

template <typename V>
const V& verdict_as(const MicroTask& task, const JudgeResponse& r) {
  const V* v = std::get_if<V>(&r.verdict);
  if (v == nullptr) {
    throw mismatch(task, std::string("verdict does not fit ") + task_kind_name(task.kind));
  }
  return *v;
}

bool inside(const ImageJob& job, const Point& p) {
  return p.x >= 0.0 && p.y >= 0.0 && p.x <= job.width && p.y <= job.height;
}

DiscoveredCategory* find_category(ImageJob& job, const std::string& category) {
  for (auto& c : job.categories) {
    if (c.category == category) return &c;
  }
  return nullptr;
}

Marker& marker_by_id(ImageJob& job, std::size_t id) {
  for (auto& m : job.markers) {
    if (m.id == id) return m;
  }
  throw Error(ErrorCode::task_mismatch, "unknown marker " + std::to_string(id));
}

std::size_t add_marker(ImageJob& job, const std::string& category, Point point, double extent) {
  Marker m;
  m.id = job.markers.size();
  m.category = category;
  m.point = point;
  m.extent = extent;
  job.markers.push_back(std::move(m));
  return job.markers.back().id;
}

void drop_marker(ImageJob& job, Marker& m, const std::string& task_id, const std::string& why) {
  m.dropped = true;
  job.events.push_back({task_id, "marker " + std::to_string(m.id) + " (" + m.category +
                                     ") dropped: " + why});
}

}  // namespace

std::optional<MicroTask> next_task(const ImageJob& job, const PipelineConfig& config) {
  switch (job.phase) {
    case JobPhase::Discovery: {
      DiscoveryPayload p;
      for (const auto& c : job.categories) p.known_categories.push_back(c.category);
      return make_task(job, TaskKind::CategoryDiscovery, std::move(p));
    }
    case JobPhase::MarkerVerify:
      for (const auto& c : job.categories) {
        if (!c.verified.has_value()) {
          for (const auto& m : job.markers) {
            if (m.id == c.marker_id) {
              return make_task(job, TaskKind::MarkerVerification, MarkerPayload{m});
            }
          }
        }
      }
      return std::nullopt;
    case JobPhase::Marking:
      for (const auto& c : job.categories) {
        if (c.verified != true || c.marking_done) continue;
        const Marker* m = nullptr;
        switch (marking_step(job, c, config, &m)) {
          case MarkingStep::mark:
            return make_task(job, TaskKind::InstanceMarking,
                             CategoryPayload{c.category, markers_of(job, c.category)},
                             c.marking_rounds + 1);
          case MarkingStep::coverage:
            return make_task(job, TaskKind::CoverageVerification,
                             CategoryPayload{c.category, markers_of(job, c.category)},
                             c.marking_rounds);
          case MarkingStep::correctness:
            return make_task(job, TaskKind::MarkerCorrectnessVerification, MarkerPayload{*m});
          case MarkingStep::none:
            break;
        }
      }
      return std::nullopt;
    case JobPhase::BoxDraw: {
      const Marker* m = pending_box_marker(job);
      if (m == nullptr) return std::nullopt;
      if (!m->box) {
        return make_task(job, TaskKind::BoxDrawing, MarkerPayload{*m}, m->box_attempts + 1);
      }
      return make_task(job, TaskKind::BoxVerification, BoxPayload{*m, *m->box}, m->box_attempts);
    }
    case JobPhase::Done:
      return std::nullopt;
  }
  return std::nullopt;
}

bool majority_yes(const std::vector<JudgeResponse>& responses) {
  std::size_t yes = 0;
  for (const auto& r : responses) {
    const auto* v = std::get_if<VoteVerdict>(&r.verdict);
    if (v != nullptr && v->yes) ++yes;
  }
  return 2 * yes > responses.size();
}

ImageJob submit(const ImageJob& job, const MicroTask& task,
                const std::vector<JudgeResponse>& responses, const PipelineConfig& config,
                Ledger* ledger) {
  const auto expected = next_task(job, config);
  if (!expected) {
    throw mismatch(task, "job " + job.image_id + " has no pending task");
  }
  if (!(*expected == task)) {
    throw mismatch(task, "not the pending task of job " + job.image_id + " (expected " +
                             expected->task_id + ")");
  }
  const std::size_t required = responses_required(task.kind, config);
  if (responses.size() != required) {
    throw Error(ErrorCode::response_count,
                "task " + task.task_id + ": " + task_kind_name(task.kind) + " needs " +
                    std::to_string(required) + " responses, got " +
                    std::to_string(responses.size()));
  }
  for (const auto& r : responses) {
    if (r.task_id != task.task_id) {
      throw mismatch(task, "response for task " + r.task_id);
    }
    if (!(r.cost >= 0.0) || !(r.latency_s >= 0.0)) {
      throw mismatch(task, "negative cost or latency from judge " + r.judge_id);
    }
  }
  if (is_verification(task.kind)) {
    for (const auto& r : responses) verdict_as<VoteVerdict>(task, r);
  }

  ImageJob out = job;
  switch (task.kind) {
    case TaskKind::CategoryDiscovery: {
      ++out.discovery_tasks;
      const JudgeResponse& r = responses.front();
      if (std::holds_alternative<SkipVerdict>(r.verdict)) {
        ++out.consecutive_skips;
        break;
      }
      const auto& mark = verdict_as<MarkVerdict>(task, r);
      if (mark.category.empty()) throw mismatch(task, "mark without a category");
      out.consecutive_skips = 0;
      if (find_category(out, mark.category) == nullptr && inside(out, mark.point) &&
          mark.extent >= out.min_dimension) {
        DiscoveredCategory c;
        c.category = mark.category;
        c.marker_id = add_marker(out, mark.category, mark.point, mark.extent);
        out.categories.push_back(std::move(c));
      }
      break;
    }
    case TaskKind::MarkerVerification: {
      const auto& m = std::get<MarkerPayload>(task.payload).marker;
      DiscoveredCategory* c = find_category(out, m.category);
      Marker& marker = marker_by_id(out, m.id);
      const bool yes = majority_yes(responses);
      c->verified = yes;
      marker.verified = yes;
      if (!yes) drop_marker(out, marker, task.task_id, "rejected at marker verification");
      break;
    }
    case TaskKind::InstanceMarking: {
      const auto& p = std::get<CategoryPayload>(task.payload);
      DiscoveredCategory* c = find_category(out, p.category);
      const JudgeResponse& r = responses.front();
      if (!std::holds_alternative<SkipVerdict>(r.verdict)) {
        for (const auto& mark : verdict_as<MarksVerdict>(task, r).marks) {
          if (inside(out, mark.point) && mark.extent >= out.min_dimension) {
            add_marker(out, p.category, mark.point, mark.extent);
          }
        }
      }
      ++c->marking_rounds;
      c->coverage_ok.reset();
      break;
    }
    case TaskKind::CoverageVerification: {
      DiscoveredCategory* c = find_category(out, std::get<CategoryPayload>(task.payload).category);
      c->coverage_ok = majority_yes(responses);
      if (!*c->coverage_ok && c->marking_rounds >= config.max_marking_rounds) {
        out.events.push_back({task.task_id, "coverage of " + c->category + " not confirmed after " +
                                                std::to_string(c->marking_rounds) + " rounds"});
      }
      break;
    }
    case TaskKind::MarkerCorrectnessVerification: {
      Marker& marker = marker_by_id(out, std::get<MarkerPayload>(task.payload).marker.id);
      marker.verified = majority_yes(responses);
      if (!*marker.verified) drop_marker(out, marker, task.task_id, "rejected as incorrect");
      break;
    }
    case TaskKind::BoxDrawing: {
      Marker& marker = marker_by_id(out, std::get<MarkerPayload>(task.payload).marker.id);
      ++marker.box_attempts;
      const JudgeResponse& r = responses.front();
      std::optional<BBox> box;
      if (!std::holds_alternative<SkipVerdict>(r.verdict)) {
        const BBox& drawn = verdict_as<BoxVerdict>(task, r).box;
        if (is_valid(drawn)) box = clamp_to_image(drawn, out.width, out.height);
      }
      if (box) {
        marker.box = box;
      } else if (marker.box_attempts >= config.max_box_attempts) {
        drop_marker(out, marker, task.task_id,
                    "no acceptable box after " + std::to_string(marker.box_attempts) + " attempts");
      }
      break;
    }
    case TaskKind::BoxVerification: {
      Marker& marker = marker_by_id(out, std::get<BoxPayload>(task.payload).marker.id);
      if (majority_yes(responses)) {
        marker.box_verified = true;
      } else {
        marker.box.reset();
        if (marker.box_attempts >= config.max_box_attempts) {
          drop_marker(out, marker, task.task_id,
                      "box rejected " + std::to_string(marker.box_attempts) + " times");
        }
      }
      break;
    }
    case TaskKind::NegativeSetSelection:
      throw mismatch(task, "negative set selection is not part of an image job");
  }

  if (ledger != nullptr) {
    for (const auto& r : responses) ledger->append({task.task_id, task.kind, r.cost, r.latency_s});
  }
  ++out.tasks_completed;
  advance(out, config);
  return out;
}

std::vector<FinalBox> final_boxes(const ImageJob& job) {
  std::vector<FinalBox> out;
  for (const auto& m : job.markers) {
    if (live(m) && m.verified == true && m.box_verified && m.box) {
      out.push_back({m.id, m.category, *m.box});
    }
  }
  return out;
}

ImageJob run_job(ImageJob job, JudgePool& judges, const PipelineConfig& config, Ledger* ledger,
                 std::size_t max_tasks) {
  config.validate();
  advance(job, config);
  std::size_t steps = 0;
  while (auto task = next_task(job, config)) {
    if (++steps > max_tasks) {
      throw std::logic_error("job " + job.image_id + " exceeded " + std::to_string(max_tasks) +
                             " tasks");
    }
    std::vector<JudgeResponse> responses;
    const std::size_t n = responses_required(task->kind, config);
    for (std::size_t a = 0; a < n; ++a) responses.push_back(judges.respond(*task, &job, a));
    job = submit(job, *task, responses, config, ledger);
  }
  if (ledger != nullptr) {
    const auto boxes = final_boxes(job);
    std::set<std::string> categories;
    for (const auto& b : boxes) categories.insert(b.category);
    ledger->record_image({job.image_id, categories.size(), boxes.size()});
  }
  return job;
}

MicroTask negative_selection_task(const std::string& category, const std::string& image_id) {
  return {"neg/" + category + "/" + image_id, image_id, TaskKind::NegativeSetSelection,
          CategoryPayload{category, {}}, 1};
}

std::set<std::string, std::less<>> collect_negatives(const std::string& category,
                                                     const std::vector<std::string>& candidates,
                                                     std::size_t overlap_k, JudgePool& judges,
                                                     Ledger* ledger,
                                                     const PipelineConfig& config) {
  if (overlap_k < 1 || overlap_k % 2 == 0) {
    throw Error(ErrorCode::invalid_argument, "overlap_k must be odd and at least 1");
  }
  (void)config;
  std::set<std::string, std::less<>> negatives;
  for (const auto& image_id : candidates) {
    const MicroTask task = negative_selection_task(category, image_id);
    bool any_present = false;
    for (std::size_t a = 0; a < overlap_k; ++a) {
      const JudgeResponse r = judges.respond(task, nullptr, a);
      if (r.task_id != task.task_id) throw mismatch(task, "response for task " + r.task_id);
      // a "yes" vote means the category is present
      if (verdict_as<VoteVerdict>(task, r).yes) any_present = true;
      if (ledger != nullptr) ledger->append({task.task_id, task.kind, r.cost, r.latency_s});
    }
    if (!any_present) negatives.insert(image_id);
  }
  return negatives;
}

}  // namespace genodkit
