// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "genodkit/error.hpp"

namespace genodkit {

std::vector<double> EvalConfig::default_iou_thresholds() {
  std::vector<double> out;
  for (int i = 0; i < 10; ++i) {
    out.push_back((50 + 5 * i) / 100.0);
  }
  return out;
}

const char* ap_mode_name(ApMode mode) noexcept {
  return mode == ApMode::exact ? "exact" : "coco101";
}

ApMode parse_ap_mode(std::string_view name) {
  if (name == "exact") return ApMode::exact;
  if (name == "coco101") return ApMode::coco101;
  throw Error(ErrorCode::invalid_argument, "unknown AP mode: " + std::string(name));
}

namespace {

struct Candidate {
  std::size_t gt;  // local ground-truth index
  double iou;
};

// One category's detections in processing order with their IoU candidates,
// computed once and reused for every threshold.
struct Prepared {
  std::vector<std::size_t> order;  // local detection index, processing order
  std::vector<bool> ignored;       // per processing position
  std::vector<std::vector<Candidate>> candidates;
  std::vector<bool> gt_evaluable;
  std::size_t n_gt = 0;
};

Prepared prepare(const std::vector<const Detection*>& dets,
                 const std::vector<const Annotation*>& gts, const FederatedEntry* federated) {
  Prepared p;
  p.gt_evaluable.resize(gts.size());
  std::unordered_map<std::string_view, std::vector<std::size_t>> gts_by_image;
  for (std::size_t g = 0; g < gts.size(); ++g) {
    const bool evaluable = federated == nullptr || federated->covers(gts[g]->image_id);
    p.gt_evaluable[g] = evaluable;
    if (evaluable) {
      ++p.n_gt;
      gts_by_image[gts[g]->image_id].push_back(g);
    }
  }

  p.order.resize(dets.size());
  std::iota(p.order.begin(), p.order.end(), std::size_t{0});
  std::sort(p.order.begin(), p.order.end(), [&](std::size_t a, std::size_t b) {
    const Detection& da = *dets[a];
    const Detection& db = *dets[b];
    if (da.score != db.score) return da.score > db.score;
    if (da.image_id != db.image_id) return da.image_id < db.image_id;
    if (!(da.bbox == db.bbox)) return da.bbox < db.bbox;
    return a < b;
  });

  p.ignored.resize(dets.size());
  p.candidates.resize(dets.size());
  for (std::size_t pos = 0; pos < p.order.size(); ++pos) {
    const Detection& d = *dets[p.order[pos]];
    if (federated != nullptr && !federated->covers(d.image_id)) {
      p.ignored[pos] = true;
      continue;
    }
    const auto it = gts_by_image.find(d.image_id);
    if (it == gts_by_image.end()) {
      continue;
    }
    auto& cands = p.candidates[pos];
    for (std::size_t g : it->second) {
      const double v = iou_unchecked(d.bbox, gts[g]->bbox);
      if (v > 0.0) {
        cands.push_back({g, v});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.iou != b.iou) return a.iou > b.iou;
      return a.gt < b.gt;
    });
  }
  return p;
}

MatchResult run_matching(const Prepared& p, const std::vector<const Detection*>& dets,
                         double iou_thresh) {
  MatchResult m;
  m.n_gt = p.n_gt;
  m.gt_matched.assign(p.gt_evaluable.size(), false);
  m.detections.reserve(p.order.size());
  for (std::size_t pos = 0; pos < p.order.size(); ++pos) {
    MatchedDetection md;
    md.input_index = p.order[pos];
    md.score = dets[md.input_index]->score;
    if (p.ignored[pos]) {
      md.label = MatchLabel::ignored;
    } else {
      md.label = MatchLabel::fp;
      for (const Candidate& c : p.candidates[pos]) {
        if (c.iou < iou_thresh) break;
        if (!m.gt_matched[c.gt]) {
          m.gt_matched[c.gt] = true;
          md.label = MatchLabel::tp;
          md.gt_index = c.gt;
          break;
        }
      }
    }
    m.detections.push_back(md);
  }
  return m;
}

void check_thresh(double iou_thresh) {
  if (!(iou_thresh > 0.0 && iou_thresh <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "IoU threshold must be in (0, 1]");
  }
}

}  // namespace

MatchResult match_detections(std::span<const Detection> detections,
                             std::span<const Annotation> ground_truths,
                             const FederatedEntry* federated, double iou_thresh) {
  check_thresh(iou_thresh);
  std::optional<std::string_view> category;
  auto same = [&](std::string_view c) {
    if (!category) {
      category = c;
    } else if (*category != c) {
      throw Error(ErrorCode::mixed_categories,
                  "mixed categories in input: " + std::string(*category) + " and " +
                      std::string(c));
    }
  };
  std::vector<const Detection*> dets;
  for (const auto& d : detections) {
    same(d.category_id);
    dets.push_back(&d);
  }
  std::vector<const Annotation*> gts;
  for (const auto& g : ground_truths) {
    same(g.category_id);
    gts.push_back(&g);
  }
  return run_matching(prepare(dets, gts, federated), dets, iou_thresh);
}

std::optional<double> average_precision(const MatchResult& match, ApMode mode) {
  if (match.n_gt == 0) {
    return std::nullopt;
  }
  // Operating points after each non-ignored detection.
  std::vector<std::size_t> tp_at;
  std::vector<double> precision;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (const auto& d : match.detections) {
    if (d.label == MatchLabel::ignored) continue;
    ++seen;
    if (d.label == MatchLabel::tp) ++tp;
    tp_at.push_back(tp);
    precision.push_back(static_cast<double>(tp) / static_cast<double>(seen));
  }
  // envelope[i] = max precision over operating points i..end
  std::vector<double> envelope(precision.size());
  double best = 0.0;
  for (std::size_t i = precision.size(); i-- > 0;) {
    best = std::max(best, precision[i]);
    envelope[i] = best;
  }
  const double n_gt = static_cast<double>(match.n_gt);

  if (mode == ApMode::exact) {
    double area = 0.0;
    std::size_t prev_tp = 0;
    for (std::size_t i = 0; i < tp_at.size(); ++i) {
      if (tp_at[i] > prev_tp) {
        area += envelope[i];
        prev_tp = tp_at[i];
      }
    }
    return area / n_gt;
  }

  double sum = 0.0;
  std::size_t i = 0;
  for (std::size_t k = 0; k <= 100; ++k) {
    // first operating point with recall >= k/100, compared exactly in integers
    while (i < tp_at.size() && tp_at[i] * 100 < k * match.n_gt) ++i;
    if (i == tp_at.size()) break;
    sum += envelope[i];
  }
  return sum / 101.0;
}

double weighted_ap(std::span<const double> ap, std::span<const double> weights) {
  if (ap.size() != weights.size()) {
    throw Error(ErrorCode::invalid_argument, "AP and weight lists differ in length");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < ap.size(); ++i) {
    if (weights[i] < 0.0) {
      throw Error(ErrorCode::invalid_argument, "negative category weight");
    }
    num += weights[i] * ap[i];
    den += weights[i];
  }
  if (den <= 0.0) {
    throw Error(ErrorCode::invalid_argument, "category weights sum to zero");
  }
  return num / den;
}

EvalReport evaluate(const Dataset& ground_truth, const DetectionSet& detections,
                    const EvalConfig& config, const Taxonomy* taxonomy) {
  check_thresh(config.primary_iou);
  for (double t : config.iou_thresholds) check_thresh(t);
  if (config.iou_thresholds.empty()) {
    throw Error(ErrorCode::invalid_argument, "no IoU thresholds configured");
  }

  bool federated = false;
  switch (config.federated) {
    case FederatedMode::automatic: federated = ground_truth.federated.has_value(); break;
    case FederatedMode::on:
      if (!ground_truth.federated) {
        throw Error(ErrorCode::invalid_argument,
                    "federated evaluation requested but ground truth has no federated sets");
      }
      federated = true;
      break;
    case FederatedMode::off: break;
  }

  std::set<std::string_view> images;
  for (const auto& im : ground_truth.images) images.insert(im.id);

  std::map<std::string, std::pair<std::vector<const Detection*>, std::vector<const Annotation*>>,
           std::less<>>
      buckets;
  for (const auto& g : ground_truth.annotations) {
    buckets[g.category_id].second.push_back(&g);
  }
  for (const auto& d : detections.detections) {
    if (!images.contains(d.image_id)) {
      throw Error(ErrorCode::unknown_image,
                  "detection on image absent from ground truth: " + d.image_id);
    }
    buckets[d.category_id].first.push_back(&d);
  }
  if (taxonomy != nullptr) {
    for (const auto& [category, bucket] : buckets) {
      if (!taxonomy->contains(category)) {
        throw Error(ErrorCode::unknown_category, "unknown category: " + category);
      }
    }
  }

  std::vector<const std::string*> names;
  for (const auto& [category, bucket] : buckets) names.push_back(&category);

  EvalReport report;
  report.config = config;
  report.federated = federated;
  report.categories.resize(names.size());
  const FederatedEntry nothing_evaluable;

  auto work = [&](std::size_t ci) {
    const std::string& category = *names[ci];
    const auto& [dets, gts] = buckets.find(category)->second;
    const FederatedEntry* entry = nullptr;
    if (federated) {
      const auto it = ground_truth.federated->find(category);
      entry = it == ground_truth.federated->end() ? &nothing_evaluable : &it->second;
    }
    const Prepared p = prepare(dets, gts, entry);
    CategoryResult r;
    r.category = category;
    r.n_gt = p.n_gt;
    r.n_det = static_cast<std::size_t>(std::count(p.ignored.begin(), p.ignored.end(), false));
    if (p.n_gt > 0) {
      r.ap50 = average_precision(run_matching(p, dets, config.primary_iou), config.mode);
      double sum = 0.0;
      for (double t : config.iou_thresholds) {
        if (t == config.primary_iou) {
          sum += *r.ap50;
        } else {
          sum += *average_precision(run_matching(p, dets, t), config.mode);
        }
      }
      r.ap = sum / static_cast<double>(config.iou_thresholds.size());
    }
    report.categories[ci] = std::move(r);
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(config.workers, names.size()));
  if (workers <= 1) {
    for (std::size_t ci = 0; ci < names.size(); ++ci) work(ci);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t ci = next++; ci < names.size(); ci = next++) work(ci);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<double> ap50s;
  std::vector<double> weights;
  double ap_sum = 0.0;
  for (auto& r : report.categories) {
    if (!r.ap50) {
      report.excluded.push_back(r.category);
      continue;
    }
    switch (config.weights) {
      case WeightSource::instance_count: r.weight = static_cast<double>(r.n_gt); break;
      case WeightSource::uniform: r.weight = 1.0; break;
      case WeightSource::custom: {
        const auto it = config.custom_weights.find(r.category);
        if (it == config.custom_weights.end()) {
          throw Error(ErrorCode::invalid_argument, "no custom weight for category " + r.category);
        }
        r.weight = it->second;
        break;
      }
    }
    ap50s.push_back(*r.ap50);
    weights.push_back(r.weight);
    ap_sum += *r.ap;
  }
  if (ap50s.empty()) {
    throw Error(ErrorCode::empty_ground_truth, "empty ground truth: no evaluable category");
  }
  const double n = static_cast<double>(ap50s.size());
  report.ap50 = std::accumulate(ap50s.begin(), ap50s.end(), 0.0) / n;
  report.wap50 = weighted_ap(ap50s, weights);
  report.ap = ap_sum / n;
  return report;
}

}  // namespace genodkit
