// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace genodkit {

enum class TaskKind {
  CategoryDiscovery,
  MarkerVerification,
  InstanceMarking,
  CoverageVerification,
  MarkerCorrectnessVerification,
  BoxDrawing,
  BoxVerification,
  NegativeSetSelection,
};

inline constexpr std::size_t kTaskKindCount = 8;

const char* task_kind_name(TaskKind kind) noexcept;
TaskKind parse_task_kind(std::string_view name);

/// Verification kinds are answered by overlap_k judges and resolved by vote.
bool is_verification(TaskKind kind) noexcept;

struct LedgerEntry {
  std::string task_id;
  TaskKind kind = TaskKind::CategoryDiscovery;
  double cost = 0.0;
  double latency_s = 0.0;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

struct ImageOutcome {
  std::string image_id;
  std::size_t categories = 0;
  std::size_t bboxes = 0;

  friend bool operator==(const ImageOutcome&, const ImageOutcome&) = default;
};

struct LedgerTotals {
  std::size_t images = 0;
  std::size_t categories = 0;
  std::size_t bboxes = 0;
  double cost = 0.0;
  double latency_s = 0.0;

  friend bool operator==(const LedgerTotals&, const LedgerTotals&) = default;
};

// Cost and latency accounting for annotation micro-tasks. Totals are kept as
// running sums in entry order, so recompute() reproduces them bit for bit.
class Ledger {
 public:
  void append(LedgerEntry entry);
  void record_image(ImageOutcome outcome);

  const std::vector<LedgerEntry>& entries() const noexcept { return entries_; }
  const std::vector<ImageOutcome>& images() const noexcept { return images_; }
  const LedgerTotals& totals() const noexcept { return totals_; }

  LedgerTotals recompute() const;

  friend bool operator==(const Ledger&, const Ledger&) = default;

 private:
  std::vector<LedgerEntry> entries_;
  std::vector<ImageOutcome> images_;
  LedgerTotals totals_;
};

/// CSV export: task rows, a "# images" section and a "# aggregate" block.
std::string ledger_to_csv(const Ledger& ledger);

/// Parses ledger_to_csv output. Throws Error(ledger_mismatch) when the
/// aggregate block disagrees with the recomputed totals.
Ledger ledger_from_csv(std::string_view csv);

Ledger load_ledger(const std::filesystem::path& path);
void save_ledger(const Ledger& ledger, const std::filesystem::path& path);

struct AccountingBaseline {
  double cost_per_bbox = 0.0;
  double time_per_bbox_min = 0.0;
};

// Table-1 style economics. Time columns are judge-minutes.
struct AccountingReport {
  std::size_t images = 0;
  std::size_t bboxes = 0;
  double total_cost = 0.0;
  double total_time_min = 0.0;
  std::optional<double> categories_per_img;
  std::optional<double> bboxes_per_img;
  std::optional<double> cost_per_img;
  std::optional<double> cost_per_bbox;
  std::optional<double> time_per_img_min;
  std::optional<double> time_per_bbox_min;
  std::optional<AccountingBaseline> baseline;
  std::optional<double> cost_reduction_pct;
  std::optional<double> latency_reduction_pct;
};

/// Per-image fields are absent without images, per-box fields without boxes.
AccountingReport accounting_report(const Ledger& ledger,
                                   std::optional<AccountingBaseline> baseline = std::nullopt);

std::string format_accounting_report(const AccountingReport& report);

}  // namespace genodkit
