// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/ledger.hpp"

#include <array>
#include <charconv>
#include <cstdio>

#include "genodkit/error.hpp"
#include "genodkit/metrics.hpp"
#include "genodkit/serialization.hpp"

namespace genodkit {

namespace {

constexpr std::array<const char*, kTaskKindCount> kKindNames = {
    "CategoryDiscovery", "MarkerVerification", "InstanceMarking",
    "CoverageVerification", "MarkerCorrectnessVerification", "BoxDrawing",
    "BoxVerification", "NegativeSetSelection",
};

}  // namespace

const char* task_kind_name(TaskKind kind) noexcept {
  return kKindNames[static_cast<std::size_t>(kind)];
}

TaskKind parse_task_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (name == kKindNames[i]) return static_cast<TaskKind>(i);
  }
  throw Error(ErrorCode::parse_error, "unknown task kind: " + std::string(name));
}

bool is_verification(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::MarkerVerification:
    case TaskKind::CoverageVerification:
    case TaskKind::MarkerCorrectnessVerification:
    case TaskKind::BoxVerification:
    case TaskKind::NegativeSetSelection:
      return true;
    default:
      return false;
  }
}

void Ledger::append(LedgerEntry entry) {
  if (!(entry.cost >= 0.0) || !(entry.latency_s >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "ledger entry " + entry.task_id +
                                                 " has negative cost or latency");
  }
  totals_.cost += entry.cost;
  totals_.latency_s += entry.latency_s;
  entries_.push_back(std::move(entry));
}

void Ledger::record_image(ImageOutcome outcome) {
  ++totals_.images;
  totals_.categories += outcome.categories;
  totals_.bboxes += outcome.bboxes;
  images_.push_back(std::move(outcome));
}

LedgerTotals Ledger::recompute() const {
  LedgerTotals t;
  for (const auto& e : entries_) {
    t.cost += e.cost;
    t.latency_s += e.latency_s;
  }
  for (const auto& im : images_) {
    ++t.images;
    t.categories += im.categories;
    t.bboxes += im.bboxes;
  }
  return t;
}

namespace {

void check_field(const std::string& value) {
  if (value.find_first_of(",\n\r#") != std::string::npos) {
    throw Error(ErrorCode::invalid_argument, "ledger field contains a reserved character: " + value);
  }
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_value(std::string_view text, std::size_t line_no) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::parse_error, "ledger line " + std::to_string(line_no) +
                                            ": bad number '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

std::string ledger_to_csv(const Ledger& ledger) {
  std::string out = "task_id,kind,cost,latency_s\n";
  for (const auto& e : ledger.entries()) {
    check_field(e.task_id);
    out += e.task_id + "," + task_kind_name(e.kind) + "," + format_number(e.cost) + "," +
           format_number(e.latency_s) + "\n";
  }
  out += "# images\nimage_id,categories,bboxes\n";
  for (const auto& im : ledger.images()) {
    check_field(im.image_id);
    out += im.image_id + "," + std::to_string(im.categories) + "," + std::to_string(im.bboxes) +
           "\n";
  }
  const LedgerTotals& t = ledger.totals();
  const AccountingReport r = accounting_report(ledger);
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  out += "# aggregate\nkey,value\n";
  out += "images," + std::to_string(t.images) + "\n";
  out += "categories," + std::to_string(t.categories) + "\n";
  out += "bboxes," + std::to_string(t.bboxes) + "\n";
  out += "total_cost," + format_number(t.cost) + "\n";
  out += "total_latency_s," + format_number(t.latency_s) + "\n";
  out += "categories_per_img," + opt(r.categories_per_img) + "\n";
  out += "bboxes_per_img," + opt(r.bboxes_per_img) + "\n";
  out += "cost_per_img," + opt(r.cost_per_img) + "\n";
  out += "cost_per_bbox," + opt(r.cost_per_bbox) + "\n";
  out += "time_per_img_min," + opt(r.time_per_img_min) + "\n";
  out += "time_per_bbox_min," + opt(r.time_per_bbox_min) + "\n";
  return out;
}

Ledger ledger_from_csv(std::string_view csv) {
  enum class Section { header, tasks, images_header, images, aggregate_header, aggregate };
  Section section = Section::header;
  Ledger ledger;
  std::map<std::string, std::string, std::less<>> aggregate;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    auto end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto bad = [&](const std::string& what) {
      return Error(ErrorCode::parse_error, "ledger line " + std::to_string(line_no) + ": " + what);
    };
    if (line == "# images") {
      section = Section::images_header;
      continue;
    }
    if (line == "# aggregate") {
      section = Section::aggregate_header;
      continue;
    }
    const auto fields = split(line);
    switch (section) {
      case Section::header:
        if (line != "task_id,kind,cost,latency_s") throw bad("expected task header");
        section = Section::tasks;
        break;
      case Section::tasks:
        if (fields.size() != 4) throw bad("expected 4 fields");
        ledger.append({std::string(fields[0]), parse_task_kind(fields[1]),
                       parse_value<double>(fields[2], line_no),
                       parse_value<double>(fields[3], line_no)});
        break;
      case Section::images_header:
        if (line != "image_id,categories,bboxes") throw bad("expected image header");
        section = Section::images;
        break;
      case Section::images:
        if (fields.size() != 3) throw bad("expected 3 fields");
        ledger.record_image({std::string(fields[0]),
                             parse_value<std::size_t>(fields[1], line_no),
                             parse_value<std::size_t>(fields[2], line_no)});
        break;
      case Section::aggregate_header:
        if (line != "key,value") throw bad("expected aggregate header");
        section = Section::aggregate;
        break;
      case Section::aggregate:
        if (fields.size() != 2) throw bad("expected 2 fields");
        aggregate[std::string(fields[0])] = std::string(fields[1]);
        break;
    }
  }
  if (section == Section::header) {
    throw Error(ErrorCode::parse_error, "ledger is empty");
  }

  // The aggregate block is optional; when present it must agree.
  const LedgerTotals t = ledger.recompute();
  auto expect = [&](const char* key, const std::string& actual) {
    const auto it = aggregate.find(key);
    if (it != aggregate.end() && it->second != actual) {
      throw Error(ErrorCode::ledger_mismatch, std::string("ledger aggregate mismatch: ") + key +
                                                  " is " + it->second + ", entries give " +
                                                  actual);
    }
  };
  expect("images", std::to_string(t.images));
  expect("categories", std::to_string(t.categories));
  expect("bboxes", std::to_string(t.bboxes));
  expect("total_cost", format_number(t.cost));
  expect("total_latency_s", format_number(t.latency_s));
  return ledger;
}

Ledger load_ledger(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return ledger_from_csv(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_ledger(const Ledger& ledger, const std::filesystem::path& path) {
  write_text_file(path, ledger_to_csv(ledger));
}

AccountingReport accounting_report(const Ledger& ledger,
                                   std::optional<AccountingBaseline> baseline) {
  const LedgerTotals& t = ledger.totals();
  AccountingReport r;
  r.images = t.images;
  r.bboxes = t.bboxes;
  r.total_cost = t.cost;
  r.total_time_min = t.latency_s / 60.0;
  if (t.images > 0) {
    const double n = static_cast<double>(t.images);
    r.categories_per_img = static_cast<double>(t.categories) / n;
    r.bboxes_per_img = static_cast<double>(t.bboxes) / n;
    r.cost_per_img = t.cost / n;
    r.time_per_img_min = r.total_time_min / n;
  }
  if (t.bboxes > 0) {
    const double n = static_cast<double>(t.bboxes);
    r.cost_per_bbox = t.cost / n;
    r.time_per_bbox_min = r.total_time_min / n;
  }
  if (baseline) {
    r.baseline = baseline;
    if (r.cost_per_bbox && baseline->cost_per_bbox > 0.0) {
      r.cost_reduction_pct = relative_reduction(baseline->cost_per_bbox, *r.cost_per_bbox);
    }
    if (r.time_per_bbox_min && baseline->time_per_bbox_min > 0.0) {
      r.latency_reduction_pct =
          relative_reduction(baseline->time_per_bbox_min, *r.time_per_bbox_min);
    }
  }
  return r;
}

std::string format_accounting_report(const AccountingReport& r) {
  char buf[128];
  std::string out;
  auto row = [&](const char* label, const std::optional<double>& v, const char* fmt) {
    if (v) {
      std::snprintf(buf, sizeof(buf), fmt, *v);
      out += std::string(label) + buf + "\n";
    } else {
      out += std::string(label) + "n/a\n";
    }
  };
  out += "images            " + std::to_string(r.images) + "\n";
  out += "bboxes            " + std::to_string(r.bboxes) + "\n";
  row("categories/img    ", r.categories_per_img, "%.2f");
  row("bboxes/img        ", r.bboxes_per_img, "%.2f");
  row("$/img             ", r.cost_per_img, "%.2f");
  row("$/bbox            ", r.cost_per_bbox, "%.2f");
  row("time/img (min)    ", r.time_per_img_min, "%.2f");
  row("time/bbox (min)   ", r.time_per_bbox_min, "%.2f");
  if (r.baseline) {
    std::snprintf(buf, sizeof(buf), "baseline $/bbox   %.2f\nbaseline time/bbox (min) %.2f\n",
                  r.baseline->cost_per_bbox, r.baseline->time_per_bbox_min);
    out += buf;
    row("cost reduction    ", r.cost_reduction_pct, "%.1f%%");
    row("latency reduction ", r.latency_reduction_pct, "%.1f%%");
  }
  return out;
}

}  // namespace genodkit
