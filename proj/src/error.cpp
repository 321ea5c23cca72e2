// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/error.hpp"

namespace genodkit {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::duplicate_id: return "duplicate_id";
    case ErrorCode::dangling_parent: return "dangling_parent";
    case ErrorCode::cycle_detected: return "cycle_detected";
    case ErrorCode::unknown_mapping_target: return "unknown_mapping_target";
    case ErrorCode::duplicate_mapping: return "duplicate_mapping";
    case ErrorCode::unknown_category: return "unknown_category";
    case ErrorCode::unmapped_category: return "unmapped_category";
    case ErrorCode::degenerate_box: return "degenerate_box";
    case ErrorCode::unknown_image: return "unknown_image";
    case ErrorCode::id_collision: return "id_collision";
    case ErrorCode::dimension_conflict: return "dimension_conflict";
    case ErrorCode::federated_conflict: return "federated_conflict";
    case ErrorCode::mixed_categories: return "mixed_categories";
    case ErrorCode::empty_ground_truth: return "empty_ground_truth";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::category_overlap: return "category_overlap";
    case ErrorCode::version_not_increased: return "version_not_increased";
    case ErrorCode::ownership_violation: return "ownership_violation";
    case ErrorCode::unknown_head: return "unknown_head";
    case ErrorCode::task_mismatch: return "task_mismatch";
    case ErrorCode::response_count: return "response_count";
    case ErrorCode::ledger_mismatch: return "ledger_mismatch";
  }
  return "unknown";
}

}  // namespace genodkit
