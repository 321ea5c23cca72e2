// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "genodkit/geometry.hpp"
#include "genodkit/ledger.hpp"

namespace genodkit {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Marker {
  std::size_t id = 0;
  std::string category;
  Point point;
  double extent = 0.0;            // smaller object dimension implied by the marker
  std::optional<bool> verified;   // correctness vote outcome
  bool dropped = false;
  std::size_t box_attempts = 0;
  std::optional<BBox> box;        // drawn box awaiting or passing verification
  bool box_verified = false;

  friend bool operator==(const Marker&, const Marker&) = default;
};

struct DiscoveryPayload {
  std::vector<std::string> known_categories;
  friend bool operator==(const DiscoveryPayload&, const DiscoveryPayload&) = default;
};

/// MarkerVerification, MarkerCorrectnessVerification, BoxDrawing.
struct MarkerPayload {
  Marker marker;
  friend bool operator==(const MarkerPayload&, const MarkerPayload&) = default;
};

/// InstanceMarking, CoverageVerification, NegativeSetSelection.
struct CategoryPayload {
  std::string category;
  std::vector<Marker> markers;
  friend bool operator==(const CategoryPayload&, const CategoryPayload&) = default;
};

/// BoxVerification.
struct BoxPayload {
  Marker marker;
  BBox box;
  friend bool operator==(const BoxPayload&, const BoxPayload&) = default;
};

using TaskPayload = std::variant<DiscoveryPayload, MarkerPayload, CategoryPayload, BoxPayload>;

struct MicroTask {
  std::string task_id;
  std::string image_id;
  TaskKind kind = TaskKind::CategoryDiscovery;
  TaskPayload payload;
  std::size_t attempt = 1;

  friend bool operator==(const MicroTask&, const MicroTask&) = default;
};

struct SkipVerdict {
  friend bool operator==(const SkipVerdict&, const SkipVerdict&) = default;
};

struct MarkVerdict {
  std::string category;
  Point point;
  double extent = 0.0;
  friend bool operator==(const MarkVerdict&, const MarkVerdict&) = default;
};

struct InstanceMark {
  Point point;
  double extent = 0.0;
  friend bool operator==(const InstanceMark&, const InstanceMark&) = default;
};

struct MarksVerdict {
  std::vector<InstanceMark> marks;
  friend bool operator==(const MarksVerdict&, const MarksVerdict&) = default;
};

struct VoteVerdict {
  bool yes = false;
  friend bool operator==(const VoteVerdict&, const VoteVerdict&) = default;
};

struct BoxVerdict {
  BBox box;
  friend bool operator==(const BoxVerdict&, const BoxVerdict&) = default;
};

using Verdict = std::variant<SkipVerdict, MarkVerdict, MarksVerdict, VoteVerdict, BoxVerdict>;

struct JudgeResponse {
  std::string task_id;
  std::string judge_id;
  Verdict verdict;
  double latency_s = 0.0;
  double cost = 0.0;

  friend bool operator==(const JudgeResponse&, const JudgeResponse&) = default;
};

enum class JobPhase { Discovery, MarkerVerify, Marking, BoxDraw, Done };

const char* job_phase_name(JobPhase phase) noexcept;

struct DiscoveredCategory {
  std::string category;
  std::size_t marker_id = 0;
  std::optional<bool> verified;     // MarkerVerification outcome
  std::size_t marking_rounds = 0;
  std::optional<bool> coverage_ok;  // outcome of the latest coverage check
  bool marking_done = false;

  friend bool operator==(const DiscoveredCategory&, const DiscoveredCategory&) = default;
};

struct JobEvent {
  std::string task_id;
  std::string message;
  friend bool operator==(const JobEvent&, const JobEvent&) = default;
};

struct ImageJob {
  std::string image_id;
  int width = 0;
  int height = 0;
  double min_dimension = 55.0;
  JobPhase phase = JobPhase::Discovery;
  std::size_t consecutive_skips = 0;
  std::size_t discovery_tasks = 0;
  std::size_t tasks_completed = 0;
  std::vector<DiscoveredCategory> categories;
  std::vector<Marker> markers;
  std::vector<JobEvent> events;

  friend bool operator==(const ImageJob&, const ImageJob&) = default;
};

struct KindCost {
  double cost = 0.0;
  double latency_s = 0.0;
};

struct PipelineConfig {
  std::size_t overlap_k = 3;
  std::size_t skip_limit = 3;
  std::size_t max_discovery_tasks = 64;
  std::size_t max_marking_rounds = 3;
  std::size_t max_box_attempts = 3;
  double min_dimension = 55.0;
  double box_accept_iou = 0.7;  // used by simulated verifiers
  std::array<KindCost, kTaskKindCount> costs = default_costs();

  const KindCost& cost_of(TaskKind kind) const { return costs[static_cast<std::size_t>(kind)]; }

  /// Throws Error(invalid_argument) for configurations that could not terminate
  /// or cannot break vote ties.
  void validate() const;

  static std::array<KindCost, kTaskKindCount> default_costs();
};

ImageJob make_job(std::string image_id, int width, int height, const PipelineConfig& config);

/// The next micro-task for the job, or nullopt once the job is done. A pure
/// function of the job state.
std::optional<MicroTask> next_task(const ImageJob& job, const PipelineConfig& config);

/// Number of judge responses a task of this kind requires.
std::size_t responses_required(TaskKind kind, const PipelineConfig& config) noexcept;

/// Applies the responses for the job's pending task and returns the advanced
/// job. Costs and latencies are appended to `ledger` when given. Throws
/// Error(task_mismatch) if the task is not the pending one or a verdict does
/// not fit the kind, and Error(response_count) for a wrong number of responses.
ImageJob submit(const ImageJob& job, const MicroTask& task,
                const std::vector<JudgeResponse>& responses, const PipelineConfig& config,
                Ledger* ledger = nullptr);

/// Strict majority of yes votes.
bool majority_yes(const std::vector<JudgeResponse>& responses);

/// Final boxes: verified boxes whose markers survived verification.
struct FinalBox {
  std::size_t marker_id = 0;
  std::string category;
  BBox box;
};

std::vector<FinalBox> final_boxes(const ImageJob& job);

// Source of judge answers: a crowd-platform adapter or the simulator.
class JudgePool {
 public:
  virtual ~JudgePool() = default;

  /// Answer of the `assignment`-th judge. `job` is null for tasks that are not
  /// part of an image job (negative set selection).
  virtual JudgeResponse respond(const MicroTask& task, const ImageJob* job,
                                std::size_t assignment) = 0;
};

/// Drives a job to completion. Throws std::logic_error if `max_tasks` is hit,
/// which a valid configuration never reaches.
ImageJob run_job(ImageJob job, JudgePool& judges, const PipelineConfig& config, Ledger* ledger,
                 std::size_t max_tasks = 100000);

MicroTask negative_selection_task(const std::string& category, const std::string& image_id);

/// Images every one of the overlap_k judges reports free of the category.
/// overlap_k must be odd.
std::set<std::string, std::less<>> collect_negatives(const std::string& category,
                                                     const std::vector<std::string>& candidates,
                                                     std::size_t overlap_k, JudgePool& judges,
                                                     Ledger* ledger = nullptr,
                                                     const PipelineConfig& config = {});

}  // namespace genodkit
