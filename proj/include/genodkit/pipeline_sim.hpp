// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "genodkit/annotation_pipeline.hpp"
#include "genodkit/dataset.hpp"

namespace genodkit {

/// Error model of simulated crowd judges.
struct JudgeModel {
  double miss_rate = 0.0;        // chance to overlook a category or an instance
  double false_mark_rate = 0.0;  // chance to add a marker where nothing is
  double box_noise_px = 0.0;     // max per-axis shift of drawn boxes
  double vote_flip_rate = 0.0;   // chance a verification vote is inverted
  std::uint64_t seed = 0;

  void validate() const;
};

// Judges answering from an oracle dataset. Each answer draws from a generator
// seeded by (seed, task id, assignment), so answers do not depend on the
// order in which jobs are run.
class SimulatedJudges : public JudgePool {
 public:
  SimulatedJudges(const Dataset& oracle, JudgeModel model, PipelineConfig config);

  JudgeResponse respond(const MicroTask& task, const ImageJob* job,
                        std::size_t assignment) override;

 private:
  struct ImageTruth {
    const ImageRecord* image = nullptr;
    std::vector<const Annotation*> objects;
  };

  const ImageTruth& truth(const std::string& image_id) const;
  bool salient(const Annotation& a) const;

  JudgeModel model_;
  PipelineConfig config_;
  std::map<std::string, ImageTruth, std::less<>> truth_;
  std::vector<std::string> all_categories_;
};

struct SimulationResult {
  Dataset dataset;
  Ledger ledger;
  std::vector<ImageJob> jobs;
};

/// Runs a job per oracle image against simulated judges. Deterministic for a
/// fixed seed. The recovered dataset carries only verified boxes.
SimulationResult simulate(const Dataset& oracle, const JudgeModel& judges,
                          const PipelineConfig& config);

struct AgreementStats {
  std::size_t reference = 0;  // salient reference objects
  std::size_t recovered = 0;
  std::size_t matched = 0;
  double precision = 1.0;
  double recall = 1.0;
};

/// One-to-one same-category matching at IoU >= iou_thresh against reference
/// objects whose smaller side is at least min_dimension.
AgreementStats compare_annotations(const Dataset& recovered, const Dataset& reference,
                                   double iou_thresh, double min_dimension);

}  // namespace genodkit
