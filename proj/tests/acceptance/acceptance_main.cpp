// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ap_oracle.hpp"
#include "genodkit/cli.hpp"
#include "genodkit/dataset.hpp"
#include "genodkit/error.hpp"
#include "genodkit/evaluation.hpp"
#include "genodkit/federation.hpp"
#include "genodkit/ledger.hpp"
#include "genodkit/metrics.hpp"
#include "genodkit/pipeline_sim.hpp"
#include "genodkit/postprocess.hpp"
#include "genodkit/rng.hpp"
#include "genodkit/sampling.hpp"
#include "genodkit/serialization.hpp"
#include "genodkit/service.hpp"
#include "genodkit/synthetic.hpp"

using namespace genodkit;

namespace {

// Pinned tolerances.
constexpr double kWapTol = 1e-9;
constexpr double kOracleTol = 1e-6;
constexpr double kFixtureTol = 1e-5;
constexpr double kReductionTolPp = 0.1;
constexpr double kGainTolPp = 0.01;
constexpr std::size_t kDeskNMin = 20;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Taxonomy forest(std::size_t roots, std::size_t leaves_per_root) {
  TaxonomySpec spec;
  spec.version = "acc-1";
  for (std::size_t r = 0; r < roots; ++r) {
    const std::string root = "r" + std::to_string(r);
    spec.nodes.push_back({root, root, std::nullopt});
    const std::string mid = root + "m";
    spec.nodes.push_back({mid, mid, root});
    for (std::size_t l = 0; l < leaves_per_root; ++l) {
      const std::string leaf = mid + "l" + std::to_string(l);
      spec.nodes.push_back({leaf, leaf, mid});
    }
  }
  return Taxonomy::build(std::move(spec));
}

Detection make_det(std::string image, std::string category, BBox box, double score) {
  Detection d;
  d.image_id = std::move(image);
  d.category_id = std::move(category);
  d.bbox = box;
  d.score = score;
  return d;
}

BBox random_box(Rng& rng, double max_xy, double min_side, double max_side) {
  return {std::floor(rng.uniform_real(0, max_xy)), std::floor(rng.uniform_real(0, max_xy)),
          std::floor(rng.uniform_real(min_side, max_side)), std::floor(rng.uniform_real(min_side, max_side))};
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto t0 = Clock::now();
  const std::vector<double> ap{0.5, 0.9};
  const double weighted = weighted_ap(ap, std::vector<double>{10, 30});
  const double equal = weighted_ap(ap, std::vector<double>{1, 1});
  const bool ok = std::abs(weighted - 0.8) <= kWapTol && std::abs(equal - 0.7) <= kWapTol;
  const double s = seconds_since(t0);
  return {ok && s < 1.0, fmt("wAP50=%.12f mean=%.12f (%.3fs)", weighted, equal, s)};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  std::size_t instances = 0;
  std::size_t comparisons = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; instances < 600; ++seed) {
    Rng rng(derive_seed(seed, "acceptance/oracle"));
    const std::size_t n_images = 1 + rng.uniform_index(20);
    const std::size_t n_categories = 1 + rng.uniform_index(5);
    const std::size_t n_dets = rng.uniform_index(51);
    const bool federated = seed % 2 == 1;
    std::vector<Annotation> gts;
    const std::size_t n_gt = rng.uniform_index(40);
    for (std::size_t g = 0; g < n_gt; ++g) {
      gts.push_back({"i" + std::to_string(rng.uniform_index(n_images)),
                     "c" + std::to_string(rng.uniform_index(n_categories)), random_box(rng, 50, 5, 30)});
    }
    std::vector<Detection> dets;
    for (std::size_t k = 0; k < n_dets; ++k) {
      Detection d;
      if (!gts.empty() && rng.bernoulli(0.5)) {
        const Annotation& g = gts[rng.uniform_index(gts.size())];
        BBox b = g.bbox;
        b.x += static_cast<double>(rng.uniform_int(-4, 4));
        b.w += static_cast<double>(rng.uniform_int(-2, 2));
        d = make_det(g.image_id, g.category_id, b, 0.0);
      } else {
        d = make_det("i" + std::to_string(rng.uniform_index(n_images)),
                     "c" + std::to_string(rng.uniform_index(n_categories)), random_box(rng, 50, 5, 30), 0.0);
      }
      d.score = static_cast<double>(rng.uniform_index(21)) / 20.0;
      dets.push_back(d);
    }
    ++instances;
    for (std::size_t c = 0; c < n_categories; ++c) {
      const std::string cat = "c" + std::to_string(c);
      std::vector<Detection> cdets;
      std::vector<Annotation> cgts;
      std::vector<oracle::Det> odets;
      std::vector<oracle::Gt> ogts;
      for (const auto& d : dets) {
        if (d.category_id != cat) continue;
        cdets.push_back(d);
        odets.push_back({d.image_id, {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}, d.score});
      }
      for (const auto& g : gts) {
        if (g.category_id != cat) continue;
        cgts.push_back(g);
        ogts.push_back({g.image_id, {g.bbox.x, g.bbox.y, g.bbox.w, g.bbox.h}});
      }
      FederatedEntry entry;
      std::set<std::string> evaluable;
      if (federated) {
        for (std::size_t i = 0; i < n_images; ++i) {
          const std::string id = "i" + std::to_string(i);
          const bool has = std::any_of(cgts.begin(), cgts.end(), [&](const Annotation& g) { return g.image_id == id; });
          if (rng.bernoulli(0.3)) continue;
          (has ? entry.positive : entry.negative).insert(id);
          evaluable.insert(id);
        }
      }
      for (double thr : {0.5, 0.75}) {
        const oracle::Labels labels = oracle::match(odets, ogts, thr, federated, evaluable);
        const MatchResult m = match_detections(cdets, cgts, federated ? &entry : nullptr, thr);
        const auto exact = average_precision(m, ApMode::exact);
        const auto coco = average_precision(m, ApMode::coco101);
        if (labels.n_gt == 0) {
          if (exact || coco) return {false, "AP defined without ground truth at seed " + std::to_string(seed)};
          continue;
        }
        ++comparisons;
        worst = std::max({worst, std::abs(*exact - oracle::exact_ap(labels)),
                          std::abs(*coco - oracle::coco101_ap(labels))});
      }
    }
  }
  const double s = seconds_since(t0);
  return {worst <= kOracleTol && s < 30.0,
          std::to_string(instances) + " instances, " + std::to_string(comparisons) +
              " category comparisons, " + fmt("max |diff|=%.3g (%.2fs)", worst, s)};
}

Outcome criterion3() {
  MatchResult m;
  m.n_gt = 2;
  const MatchLabel seq[] = {MatchLabel::tp, MatchLabel::fp, MatchLabel::tp};
  for (std::size_t i = 0; i < 3; ++i) m.detections.push_back({i, 0.9 - 0.1 * static_cast<double>(i), seq[i], {}});
  const double exact = *average_precision(m, ApMode::exact);
  const double coco = *average_precision(m, ApMode::coco101);
  const bool ok = std::abs(exact - 0.83333) <= kFixtureTol && std::abs(coco - 0.83498) <= kFixtureTol;
  return {ok, fmt("exact=%.6f coco101=%.6f", exact, coco)};
}

Outcome criterion4() {
  std::size_t fixtures = 0;
  std::size_t injected_total = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(derive_seed(seed, "acceptance/federated"));
    Dataset gt;
    gt.name = "fed";
    const std::size_t n_images = 30;
    for (std::size_t i = 0; i < n_images; ++i) gt.images.push_back({"i" + std::to_string(i), 200, 200, ""});
    const std::vector<std::string> cats{"a", "b", "c"};
    FederatedSets fed;
    for (const auto& c : cats) {
      for (std::size_t i = 0; i < n_images; ++i) {
        const std::string id = "i" + std::to_string(i);
        const auto roll = rng.uniform_index(3);
        if (roll == 0) {
          fed[c].positive.insert(id);
          const std::size_t n = 1 + rng.uniform_index(3);
          for (std::size_t k = 0; k < n; ++k) gt.annotations.push_back({id, c, random_box(rng, 150, 10, 50)});
        } else if (roll == 1) {
          fed[c].negative.insert(id);
        } else if (rng.bernoulli(0.5)) {
          // annotated but not exhaustively: outside the evaluable sets
          gt.annotations.push_back({id, c, random_box(rng, 150, 10, 50)});
        }
      }
      if (fed[c].positive.empty()) {
        fed[c].positive.insert("i0");
        fed[c].negative.erase("i0");
        gt.annotations.push_back({"i0", c, random_box(rng, 150, 10, 50)});
      }
    }
    gt.federated = fed;
    DetectionSet dets;
    for (std::size_t k = 0; k < 200; ++k) {
      const auto& c = cats[rng.uniform_index(cats.size())];
      dets.detections.push_back(make_det("i" + std::to_string(rng.uniform_index(n_images)), c,
                                         random_box(rng, 150, 10, 50), rng.uniform01()));
    }
    const EvalReport before = evaluate(gt, dets, {});
    DetectionSet injected = dets;
    std::size_t count = 0;
    for (const auto& c : cats) {
      std::vector<std::string> outside;
      for (const auto& im : gt.images) {
        if (!fed[c].positive.contains(im.id) && !fed[c].negative.contains(im.id)) outside.push_back(im.id);
      }
      if (outside.empty()) continue;
      for (std::size_t k = 0; k < 100; ++k) {
        injected.detections.push_back(make_det(outside[rng.uniform_index(outside.size())], c,
                                               random_box(rng, 150, 10, 50), rng.uniform01()));
        ++count;
      }
    }
    if (count < 100) return {false, "fixture " + std::to_string(seed) + " had no room for injection"};
    injected_total += count;
    const EvalReport after = evaluate(gt, injected, {});
    for (std::size_t i = 0; i < before.categories.size(); ++i) {
      if (before.categories[i].ap50 != after.categories[i].ap50 || before.categories[i].ap != after.categories[i].ap) {
        return {false, "AP of " + before.categories[i].category + " moved at seed " + std::to_string(seed)};
      }
    }
    ++fixtures;
  }
  return {true, std::to_string(fixtures) + " fixtures, " + std::to_string(injected_total) +
                    " injected detections, AP deltas all exactly 0"};
}

Outcome criterion5() {
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(seed, "acceptance/longtail"));
    Dataset d;
    d.name = "lt";
    const std::size_t n_categories = 5 + rng.uniform_index(30);
    const std::size_t n_images = 50 + rng.uniform_index(150);
    for (std::size_t i = 0; i < n_images; ++i) {
      const std::string id = "im" + std::to_string(i);
      d.images.push_back({id, 640, 480, ""});
      const std::size_t objects = rng.uniform_index(5);
      for (std::size_t k = 0; k < objects; ++k) {
        // Zipf-like: category index skewed toward the head
        const double u = rng.uniform01();
        const auto c = static_cast<std::size_t>(std::floor(static_cast<double>(n_categories) * u * u * u));
        d.annotations.push_back({id, "c" + std::to_string(c), random_box(rng, 500, 10, 100)});
      }
    }
    const auto before = category_counts(d);
    const Dataset after = apply_plan(plan_upsample(d, kDeskNMin), d);
    const auto counts = category_counts(after);
    for (const auto& [c, n] : before) {
      const auto it = counts.find(c);
      const std::size_t m = it == counts.end() ? 0 : it->second;
      if (m < kDeskNMin) return {false, "category " + c + " at " + std::to_string(m) + " (seed " + std::to_string(seed) + ")"};
      if (m < n) return {false, "category " + c + " decreased (seed " + std::to_string(seed) + ")"};
    }
    ++checked;
  }
  return {true, std::to_string(checked) + " long-tailed fixtures at N_min=" + std::to_string(kDeskNMin)};
}

Outcome criterion6() {
  const Taxonomy t = forest(3, 3);
  Dataset gt;
  gt.name = "anc";
  DetectionSet leaf;
  Rng rng(6);
  for (std::size_t i = 0; i < 20; ++i) {
    const std::string id = "p" + std::to_string(i);
    gt.images.push_back({id, 640, 480, ""});
    const BBox box = random_box(rng, 400, 20, 200);
    const std::string r = "r" + std::to_string(i % 3);
    gt.annotations.push_back({id, r + "m", box});
    leaf.detections.push_back(make_det(id, r + "ml" + std::to_string(i % 3), box, 0.5 + 0.02 * static_cast<double>(i)));
  }
  auto ancestor_ap = [&](const DetectionSet& dets) {
    const EvalReport r = evaluate(gt, dets, {}, &t);
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& c : r.categories) {
      if (!c.ap50) continue;
      lo = std::min(lo, *c.ap50);
      hi = std::max(hi, *c.ap50);
    }
    return std::pair{lo, hi};
  };
  const auto before = ancestor_ap(leaf);
  const auto after = ancestor_ap(propagate_labels(leaf, t));
  bool idempotent = true;
  for (std::uint64_t seed = 0; seed < 100 && idempotent; ++seed) {
    Rng r2(derive_seed(seed, "acceptance/propagate"));
    DetectionSet s;
    const std::size_t n = r2.uniform_index(40);
    const auto nodes = t.nodes();
    for (std::size_t k = 0; k < n; ++k) {
      const BBox b{static_cast<double>(r2.uniform_index(5) * 4), static_cast<double>(r2.uniform_index(5) * 4), 10, 10};
      s.detections.push_back(make_det("im" + std::to_string(r2.uniform_index(4)), nodes[r2.uniform_index(nodes.size())].id,
                                      b, static_cast<double>(r2.uniform_index(5)) / 4.0));
    }
    const double dedup = seed % 2 == 0 ? 1.0 : 0.5;
    const DetectionSet once = propagate_labels(s, t, dedup);
    idempotent = propagate_labels(once, t, dedup) == once;
  }
  const bool ok = before.second == 0.0 && after.first == 1.0 && idempotent;
  return {ok, fmt("ancestor AP50 before max=%.3f, after min=%.3f", before.second, after.first) +
                  (idempotent ? ", idempotent on 100 sets" : ", idempotence violated")};
}

Outcome criterion7() {
  const Taxonomy t = forest(4, 4);
  std::vector<std::string> cats;
  for (const auto& n : t.nodes()) cats.push_back(n.id);
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    Rng rng(derive_seed(trial, "acceptance/federation"));
    // split categories over 2-4 specialized heads plus the default head
    const std::size_t n_heads = 2 + rng.uniform_index(3);
    HeadRegistry reg = register_default_head({}, "base", 1, t);
    std::vector<CategorySet> owned(n_heads);
    for (const auto& c : cats) {
      const std::size_t h = rng.uniform_index(n_heads + 1);
      if (h < n_heads) owned[h].insert(c);
    }
    std::vector<std::string> head_ids;
    for (std::size_t h = 0; h < n_heads; ++h) {
      if (owned[h].empty()) continue;
      head_ids.push_back("h" + std::to_string(h));
      reg = register_head(reg, {head_ids.back(), 1, owned[h], false});
    }
    auto outputs_for = [&](const HeadRegistry& r, Rng& g) {
      std::map<std::string, DetectionSet, std::less<>> out;
      for (const auto& [id, head] : r.heads()) {
        std::vector<std::string> mine(head.categories.begin(), head.categories.end());
        if (mine.empty()) continue;
        auto& s = out[id];
        const std::size_t n = g.uniform_index(15);
        for (std::size_t k = 0; k < n; ++k) {
          s.detections.push_back(make_det("im" + std::to_string(g.uniform_index(5)), mine[g.uniform_index(mine.size())],
                                          random_box(g, 300, 10, 80), g.uniform01()));
        }
      }
      return out;
    };
    Rng gen(derive_seed(trial, "acceptance/federation/outputs"));
    auto outputs = outputs_for(reg, gen);
    const DetectionSet before = merge_head_outputs(reg, outputs);
    // swap one head: new version, new outputs for it only
    const std::string swapped = head_ids[rng.uniform_index(head_ids.size())];
    const HeadSpec old = *reg.find(swapped);
    const HeadRegistry reg2 = register_head(reg, {swapped, 2, old.categories, false});
    Rng regen(derive_seed(trial, "acceptance/federation/swap"));
    auto fresh = outputs_for(reg2, regen);
    outputs[swapped] = fresh[swapped];
    const DetectionSet after = merge_head_outputs(reg2, outputs);
    const std::string b = dump_json(detections_to_json(without_categories(before, old.categories)));
    const std::string a = dump_json(detections_to_json(without_categories(after, old.categories)));
    if (a != b) return {false, "non-owned output changed in trial " + std::to_string(trial)};
    if (!non_regression_diff(before, after, *reg2.find(swapped)).pass) {
      return {false, "diff reported FAIL in trial " + std::to_string(trial)};
    }
    // the swapped head emitting a category owned elsewhere must be rejected
    std::string foreign;
    for (const auto& [c, owner] : reg2.category_index()) {
      if (owner != swapped) foreign = c;
    }
    auto bad = outputs;
    bad[swapped].detections.push_back(make_det("im0", foreign, {0, 0, 10, 10}, 0.5));
    try {
      merge_head_outputs(reg2, bad);
      return {false, "ownership violation accepted in trial " + std::to_string(trial)};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ownership_violation) return {false, std::string("wrong error: ") + e.what()};
    }
  }
  return {true, "100 head swaps byte-identical outside the swapped head; violations rejected"};
}

Outcome criterion8() {
  const auto t0 = Clock::now();
  Rng rng(8);
  Dataset oracle;
  oracle.name = "oracle";
  const std::vector<std::string> cats{"sofa", "lamp", "dog", "bird", "dress", "shoe"};
  for (std::size_t i = 0; i < 50; ++i) {
    const std::string id = "o" + std::to_string(i);
    oracle.images.push_back({id, 1000, 800, ""});
    const std::size_t n = 1 + rng.uniform_index(10);
    for (std::size_t k = 0; k < n; ++k) {
      // mostly salient objects, some below the floor
      const double side = rng.bernoulli(0.2) ? 30.0 : 60.0;
      BBox box = random_box(rng, 850, side, side + 90);
      box.y = std::floor(box.y * (800.0 - box.h) / 850.0);  // keep inside the 1000x800 frame
      oracle.annotations.push_back({id, cats[rng.uniform_index(cats.size())], box});
    }
  }
  const PipelineConfig config;
  const SimulationResult r = simulate(oracle, {}, config);
  const AgreementStats s = compare_annotations(r.dataset, oracle, 0.5, config.min_dimension);
  JudgeModel noisy;
  noisy.miss_rate = 0.2;
  noisy.false_mark_rate = 0.1;
  noisy.vote_flip_rate = 0.1;
  noisy.box_noise_px = 4;
  noisy.seed = 77;
  const std::string l1 = ledger_to_csv(simulate(oracle, noisy, config).ledger);
  const std::string l2 = ledger_to_csv(simulate(oracle, noisy, config).ledger);
  const double secs = seconds_since(t0);
  const bool ok = s.precision == 1.0 && s.recall == 1.0 && l1 == l2 && secs < 60.0;
  return {ok, fmt("precision=%.4f recall=%.4f", s.precision, s.recall) + ", " + std::to_string(s.reference) +
                  " salient objects, ledger " + (l1 == l2 ? "reproduced" : "differs") + fmt(" (%.2fs)", secs)};
}

Outcome criterion9() {
  const double cost = relative_reduction(0.65, 0.12);
  const double latency = relative_reduction(0.67, 0.26);
  const double defects = relative_reduction(38.27, 17.26);
  const double gain = relative_gain(81.3, 88.1);
  const bool ok = std::abs(cost - 81.5) <= kReductionTolPp && std::abs(latency - 61.2) <= kReductionTolPp &&
                  std::abs(defects - 54.9) <= kReductionTolPp && std::abs(gain - 8.36) <= kGainTolPp;
  return {ok, fmt("cost -%.2f%% latency -%.2f%% ", cost, latency) + fmt("defects -%.2f%% recall +%.3f%%", defects, gain)};
}

Outcome criterion10() {
  const auto dir = std::filesystem::temp_directory_path() / ("genodkit-acceptance-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(p, ec);
    }
  } cleanup{dir};

  const EvalFixture f = make_eval_fixture(10000, 900, 100000, 10);
  save_taxonomy(f.taxonomy, dir / "taxonomy.json");
  save_dataset(f.ground_truth, dir / "gt.json");
  save_detections(f.detections, dir / "dets.json");
  std::ostringstream out;
  std::ostringstream err;
  const auto t0 = Clock::now();
  const int code = run_cli({"--taxonomy", (dir / "taxonomy.json").string(), "eval", "run", "--gt",
                            (dir / "gt.json").string(), "--dets", (dir / "dets.json").string(), "--workers",
                            "4", "--out", (dir / "report.json").string()},
                           out, err);
  const double secs = seconds_since(t0);
  if (code != 0) return {false, "eval run failed: " + err.str()};

  ServiceConfig config;
  config.cache_capacity = 64;
  Service svc(config, f.taxonomy);
  DetectionSet sample;
  sample.detections.assign(f.detections.detections.begin(), f.detections.detections.begin() + 500);
  const std::string body = dump_json(detections_to_json(sample));
  const Response first = svc.handle("POST", "/propagate", body);
  const Response second = svc.handle("POST", "/propagate", body);
  const bool cached = first.status == 200 && !first.cache_hit && second.cache_hit && first.body == second.body;
  return {secs < 10.0 && cached, fmt("eval run 10k images / 900 categories / 100k detections in %.2fs", secs) +
                                     (cached ? ", repeated /propagate served from cache byte-identical"
                                             : ", cache check failed")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"weighted AP arithmetic", criterion1},
      {"AP oracle equivalence", criterion2},
      {"hand-derived AP fixture", criterion3},
      {"federated invariance", criterion4},
      {"class-aware sampling floor", criterion5},
      {"label propagation", criterion6},
      {"federation non-regression", criterion7},
      {"pipeline termination and fidelity", criterion8},
      {"reported reductions arithmetic", criterion9},
      {"performance floor and cache", criterion10},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
