// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/pipeline_sim.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "genodkit/error.hpp"
#include "genodkit/rng.hpp"

namespace genodkit {

void JudgeModel::validate() const {
  for (double r : {miss_rate, false_mark_rate, vote_flip_rate}) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw Error(ErrorCode::invalid_argument, "judge error rates must be in [0, 1]");
    }
  }
  if (!(box_noise_px >= 0.0) || !std::isfinite(box_noise_px)) {
    throw Error(ErrorCode::invalid_argument, "box noise must be a non-negative number");
  }
}

SimulatedJudges::SimulatedJudges(const Dataset& oracle, JudgeModel model, PipelineConfig config)
    : model_(model), config_(std::move(config)) {
  model_.validate();
  for (const auto& im : oracle.images) truth_[im.id].image = &im;
  std::set<std::string> categories;
  for (const auto& a : oracle.annotations) {
    const auto it = truth_.find(a.image_id);
    if (it == truth_.end()) throw Error(ErrorCode::unknown_image, "unknown image: " + a.image_id);
    it->second.objects.push_back(&a);
    categories.insert(a.category_id);
  }
  all_categories_.assign(categories.begin(), categories.end());
}

const SimulatedJudges::ImageTruth& SimulatedJudges::truth(const std::string& image_id) const {
  const auto it = truth_.find(image_id);
  if (it == truth_.end()) throw Error(ErrorCode::unknown_image, "unknown image: " + image_id);
  return it->second;
}

bool SimulatedJudges::salient(const Annotation& a) const {
  return std::min(a.bbox.w, a.bbox.h) >= config_.min_dimension;
}

namespace {

bool contains(const BBox& b, const Point& p) {
  return p.x >= b.x && p.x <= b.right() && p.y >= b.y && p.y <= b.bottom();
}

Point center(const BBox& b) { return {b.x + b.w / 2.0, b.y + b.h / 2.0}; }

double distance2(const Point& a, const Point& b) {
  return (a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y);
}

// Markers in id order each claim the nearest-centered unclaimed object of
// their category that contains the marker point.
std::map<std::size_t, const Annotation*> assign(const std::vector<const Annotation*>& objects,
                                                const std::vector<Marker>& markers) {
  std::map<std::size_t, const Annotation*> out;
  std::set<const Annotation*> claimed;
  std::vector<const Marker*> order;
  for (const auto& m : markers) {
    if (!m.dropped) order.push_back(&m);
  }
  std::sort(order.begin(), order.end(),
            [](const Marker* a, const Marker* b) { return a->id < b->id; });
  for (const Marker* m : order) {
    const Annotation* best = nullptr;
    double best_d = 0.0;
    for (const Annotation* o : objects) {
      if (o->category_id != m->category || claimed.contains(o) || !contains(o->bbox, m->point)) {
        continue;
      }
      const double d = distance2(center(o->bbox), m->point);
      if (best == nullptr || d < best_d) {
        best = o;
        best_d = d;
      }
    }
    if (best != nullptr) {
      claimed.insert(best);
      out[m->id] = best;
    }
  }
  return out;
}

}  // namespace

JudgeResponse SimulatedJudges::respond(const MicroTask& task, const ImageJob* job,
                                       std::size_t assignment) {
  Rng rng(derive_seed(model_.seed, task.task_id + "/" + std::to_string(assignment)));
  const KindCost& price = config_.cost_of(task.kind);
  JudgeResponse r{task.task_id, "sim-" + std::to_string(assignment), SkipVerdict{},
                  price.latency_s, price.cost};
  const ImageTruth& t = truth(task.image_id);

  std::vector<const Annotation*> visible;
  for (const Annotation* a : t.objects) {
    if (salient(*a)) visible.push_back(a);
  }
  auto vote = [&](bool truthful) {
    r.verdict = VoteVerdict{rng.bernoulli(model_.vote_flip_rate) ? !truthful : truthful};
  };
  auto random_point = [&] {
    return Point{rng.uniform_real(0.0, t.image->width), rng.uniform_real(0.0, t.image->height)};
  };
  const std::vector<Marker> no_markers;
  const std::vector<Marker>& job_markers = job != nullptr ? job->markers : no_markers;

  switch (task.kind) {
    case TaskKind::CategoryDiscovery: {
      const auto& known = std::get<DiscoveryPayload>(task.payload).known_categories;
      auto is_known = [&](const std::string& c) {
        return std::find(known.begin(), known.end(), c) != known.end();
      };
      std::set<std::string> present;
      for (const Annotation* a : t.objects) present.insert(a->category_id);
      std::vector<const Annotation*> candidates;
      std::set<std::string> offered;
      for (const Annotation* a : visible) {
        if (!is_known(a->category_id) && offered.insert(a->category_id).second) {
          if (!rng.bernoulli(model_.miss_rate)) candidates.push_back(a);
        }
      }
      if (!candidates.empty()) {
        const Annotation* a = candidates[rng.uniform_index(candidates.size())];
        r.verdict = MarkVerdict{a->category_id, center(a->bbox), std::min(a->bbox.w, a->bbox.h)};
        break;
      }
      if (rng.bernoulli(model_.false_mark_rate)) {
        std::vector<const std::string*> absent;
        for (const auto& c : all_categories_) {
          if (!present.contains(c) && !is_known(c)) absent.push_back(&c);
        }
        if (!absent.empty()) {
          r.verdict = MarkVerdict{*absent[rng.uniform_index(absent.size())], random_point(),
                                  config_.min_dimension};
        }
      }
      break;
    }
    case TaskKind::MarkerVerification: {
      const Marker& m = std::get<MarkerPayload>(task.payload).marker;
      bool ok = false;
      for (const Annotation* a : visible) {
        ok = ok || (a->category_id == m.category && contains(a->bbox, m.point));
      }
      vote(ok);
      break;
    }
    case TaskKind::InstanceMarking: {
      const auto& p = std::get<CategoryPayload>(task.payload);
      const auto claimed = assign(visible, p.markers);
      std::set<const Annotation*> taken;
      for (const auto& [id, a] : claimed) taken.insert(a);
      MarksVerdict marks;
      for (const Annotation* a : visible) {
        if (a->category_id != p.category || taken.contains(a)) continue;
        if (!rng.bernoulli(model_.miss_rate)) {
          marks.marks.push_back({center(a->bbox), std::min(a->bbox.w, a->bbox.h)});
        }
      }
      if (rng.bernoulli(model_.false_mark_rate)) {
        marks.marks.push_back({random_point(), config_.min_dimension});
      }
      r.verdict = std::move(marks);
      break;
    }
    case TaskKind::CoverageVerification: {
      const auto& p = std::get<CategoryPayload>(task.payload);
      const auto claimed = assign(visible, p.markers);
      std::size_t wanted = 0;
      for (const Annotation* a : visible) wanted += a->category_id == p.category ? 1 : 0;
      vote(claimed.size() == wanted);
      break;
    }
    case TaskKind::MarkerCorrectnessVerification: {
      const Marker& m = std::get<MarkerPayload>(task.payload).marker;
      vote(assign(visible, job_markers).contains(m.id));
      break;
    }
    case TaskKind::BoxDrawing: {
      const Marker& m = std::get<MarkerPayload>(task.payload).marker;
      const auto claimed = assign(visible, job_markers);
      const auto it = claimed.find(m.id);
      BBox box = it != claimed.end()
                     ? it->second->bbox
                     : BBox{m.point.x - m.extent / 2.0, m.point.y - m.extent / 2.0, m.extent,
                            m.extent};
      const double dx = rng.uniform_real(-model_.box_noise_px, model_.box_noise_px);
      const double dy = rng.uniform_real(-model_.box_noise_px, model_.box_noise_px);
      if (model_.box_noise_px > 0.0) {
        box.x += dx;
        box.y += dy;
      }
      r.verdict = BoxVerdict{box};
      break;
    }
    case TaskKind::BoxVerification: {
      const auto& p = std::get<BoxPayload>(task.payload);
      const auto claimed = assign(visible, job_markers);
      const auto it = claimed.find(p.marker.id);
      vote(it != claimed.end() && is_valid(p.box) &&
           iou_unchecked(p.box, it->second->bbox) >= config_.box_accept_iou);
      break;
    }
    case TaskKind::NegativeSetSelection: {
      const auto& category = std::get<CategoryPayload>(task.payload).category;
      bool present = false;
      for (const Annotation* a : t.objects) present = present || a->category_id == category;
      vote(present);
      break;
    }
  }
  return r;
}

SimulationResult simulate(const Dataset& oracle, const JudgeModel& judges,
                          const PipelineConfig& config) {
  config.validate();
  judges.validate();
  SimulatedJudges pool(oracle, judges, config);
  SimulationResult result;
  result.dataset.name = oracle.name;
  result.dataset.taxonomy_version = oracle.taxonomy_version;
  result.dataset.images = oracle.images;
  for (const auto& im : oracle.images) {
    ImageJob job = run_job(make_job(im.id, im.width, im.height, config), pool, config,
                           &result.ledger);
    for (const auto& b : final_boxes(job)) {
      result.dataset.annotations.push_back({im.id, b.category, b.box});
    }
    result.jobs.push_back(std::move(job));
  }
  return result;
}

AgreementStats compare_annotations(const Dataset& recovered, const Dataset& reference,
                                   double iou_thresh, double min_dimension) {
  using Key = std::pair<std::string, std::string>;
  std::map<Key, std::vector<BBox>> ref;
  std::map<Key, std::vector<BBox>> rec;
  AgreementStats s;
  for (const auto& a : reference.annotations) {
    if (std::min(a.bbox.w, a.bbox.h) >= min_dimension) {
      ref[{a.image_id, a.category_id}].push_back(a.bbox);
      ++s.reference;
    }
  }
  for (const auto& a : recovered.annotations) {
    rec[{a.image_id, a.category_id}].push_back(a.bbox);
    ++s.recovered;
  }
  for (const auto& [key, boxes] : rec) {
    const auto it = ref.find(key);
    if (it == ref.end()) continue;
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      for (std::size_t j = 0; j < it->second.size(); ++j) {
        const double v = iou_unchecked(boxes[i], it->second[j]);
        if (v >= iou_thresh) pairs.emplace_back(-v, i, j);
      }
    }
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> used_rec(boxes.size());
    std::vector<bool> used_ref(it->second.size());
    for (const auto& [neg, i, j] : pairs) {
      if (used_rec[i] || used_ref[j]) continue;
      used_rec[i] = used_ref[j] = true;
      ++s.matched;
    }
  }
  s.precision = s.recovered == 0 ? 1.0 : static_cast<double>(s.matched) / s.recovered;
  s.recall = s.reference == 0 ? 1.0 : static_cast<double>(s.matched) / s.reference;
  return s;
}

}  // namespace genodkit
