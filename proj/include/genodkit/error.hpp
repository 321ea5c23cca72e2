// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace genodkit {

// Machine-readable failure categories. The service maps parse_error to 400
// and every other code to 422.
enum class ErrorCode {
  parse_error,
  invalid_argument,
  io_error,
  duplicate_id,
  dangling_parent,
  cycle_detected,
  unknown_mapping_target,
  duplicate_mapping,
  unknown_category,
  unmapped_category,
  degenerate_box,
  unknown_image,
  id_collision,
  dimension_conflict,
  federated_conflict,
  mixed_categories,
  empty_ground_truth,
  out_of_range,
  category_overlap,
  version_not_increased,
  ownership_violation,
  unknown_head,
  task_mismatch,
  response_count,
  ledger_mismatch,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace genodkit
