// Copyright 2026 The genodkit Authors
// SPDX-License-Identifier: Apache-2.0

#include "genodkit/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <stdexcept>

#include "CLI11.hpp"

#include "genodkit/annotation_pipeline.hpp"
#include "genodkit/dataset.hpp"
#include "genodkit/error.hpp"
#include "genodkit/evaluation.hpp"
#include "genodkit/federation.hpp"
#include "genodkit/ledger.hpp"
#include "genodkit/pipeline_sim.hpp"
#include "genodkit/postprocess.hpp"
#include "genodkit/sampling.hpp"
#include "genodkit/serialization.hpp"
#include "genodkit/service.hpp"
#include "genodkit/synthetic.hpp"

namespace genodkit {

namespace {

struct Globals {
  std::string taxonomy;
  std::string registry;
  std::size_t cache_capacity = 1024;
  std::string listen = "127.0.0.1:8080";
  std::uint64_t seed = 0;
};

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_text_file(path, content);
  }
}

Taxonomy require_taxonomy(const Globals& g) {
  if (g.taxonomy.empty()) {
    throw CLI::RequiredError("--taxonomy");
  }
  return load_taxonomy(g.taxonomy);
}

FederatedMode parse_federated(const std::string& s) {
  if (s == "auto") return FederatedMode::automatic;
  if (s == "on") return FederatedMode::on;
  return FederatedMode::off;
}

// "key=value" pairs for thresholds and head outputs.
std::pair<std::string, std::string> split_pair(const std::string& text, const char* flag) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw CLI::ValidationError(flag, "expected key=value, got " + text);
  }
  return {text.substr(0, eq), text.substr(eq + 1)};
}

ScoreThresholds parse_thresholds(const std::vector<std::string>& items) {
  ScoreThresholds out;
  for (const auto& item : items) {
    auto [category, value] = split_pair(item, "--threshold");
    try {
      out[category] = std::stod(value);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--threshold", "not a number: " + value);
    }
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"genodkit: detection data, evaluation and annotation toolkit", "genodkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--taxonomy", g.taxonomy, "Taxonomy file")->envname("GENODKIT_TAXONOMY");
  app.add_option("--registry", g.registry, "Head registry file")->envname("GENODKIT_REGISTRY");
  app.add_option("--cache-capacity", g.cache_capacity, "Service cache entries (0 disables)")
      ->envname("GENODKIT_CACHE_CAPACITY");
  app.add_option("--listen", g.listen, "Service address host:port")->envname("GENODKIT_LISTEN");
  app.add_option("--seed", g.seed, "Seed for all randomized steps")->envname("GENODKIT_SEED");

  // ---- taxonomy
  auto* tax = app.add_subcommand("taxonomy", "Taxonomy tools")->require_subcommand(1);
  auto* tax_validate = tax->add_subcommand("validate", "Report taxonomy violations");
  std::string tax_file;
  tax_validate->add_option("file", tax_file, "Taxonomy file")->required();

  // ---- dataset
  auto* ds = app.add_subcommand("dataset", "Dataset tools")->require_subcommand(1);
  auto* ds_merge = ds->add_subcommand("merge", "Merge datasets under the taxonomy");
  std::vector<std::string> merge_inputs;
  std::string merge_out;
  bool lenient = false;
  ds_merge->add_option("inputs", merge_inputs, "Dataset files")->required();
  ds_merge->add_option("--out,-o", merge_out, "Output dataset file");
  ds_merge->add_flag("--lenient", lenient, "Drop unmapped categories instead of failing");
  auto* ds_stats = ds->add_subcommand("stats", "Per-category instance histogram");
  std::string stats_file;
  ds_stats->add_option("file", stats_file, "Dataset file")->required();
  ds_stats->add_flag("--lenient", lenient, "Drop unmapped categories instead of failing");

  // ---- sample
  auto* sample = app.add_subcommand("sample", "Dataset rebalancing")->require_subcommand(1);
  std::string sample_dataset;
  std::string sample_plan;
  std::string sample_out;
  std::string sample_report;
  std::size_t n_min = 2000;
  std::size_t target = 0;
  auto* up = sample->add_subcommand("upsample", "Class-aware upsampling plan");
  up->add_option("--dataset,-d", sample_dataset)->required();
  up->add_option("--n-min", n_min, "Per-category instance floor")->capture_default_str();
  up->add_option("--plan,-o", sample_plan, "Output plan file");
  up->add_option("--report", sample_report, "Distribution report CSV");
  auto* down = sample->add_subcommand("downsample", "Uniform image downsampling plan");
  down->add_option("--dataset,-d", sample_dataset)->required();
  down->add_option("--target", target, "Images to keep")->required();
  down->add_option("--plan,-o", sample_plan, "Output plan file");
  auto* apply = sample->add_subcommand("apply", "Apply a plan to a dataset");
  apply->add_option("--dataset,-d", sample_dataset)->required();
  apply->add_option("--plan,-p", sample_plan)->required();
  apply->add_option("--out,-o", sample_out, "Output dataset file");
  apply->add_option("--report", sample_report, "Distribution report CSV");

  // ---- eval
  auto* ev = app.add_subcommand("eval", "Detection evaluation")->require_subcommand(1);
  auto* ev_run = ev->add_subcommand("run", "Evaluate detections against ground truth");
  std::string gt_file;
  std::string dets_file;
  std::string mode = "exact";
  std::string federated = "auto";
  std::string weights = "instance_count";
  std::string report_out;
  std::string csv_out;
  std::size_t workers = 1;
  ev_run->add_option("--gt", gt_file, "Ground-truth dataset")->required();
  ev_run->add_option("--dets", dets_file, "Detections file")->required();
  ev_run->add_option("--mode", mode, "AP interpolation")
      ->check(CLI::IsMember({"exact", "coco101"}))
      ->capture_default_str();
  ev_run->add_option("--federated", federated)->check(CLI::IsMember({"auto", "on", "off"}));
  ev_run->add_option("--weights", weights)->check(CLI::IsMember({"instance_count", "uniform"}));
  ev_run->add_option("--out,-o", report_out, "Report file");
  ev_run->add_option("--csv", csv_out, "Flat per-category CSV");
  ev_run->add_option("--workers", workers)->check(CLI::Range(1, 256));

  // ---- post
  auto* post = app.add_subcommand("post", "Detection post-processing")->require_subcommand(1);
  std::string post_in;
  std::string post_out;
  double dedup_iou = 1.0;
  double nms_iou = 0.5;
  double default_thresh = 0.0;
  std::vector<std::string> thresholds;
  std::vector<std::string> steps;
  auto add_io = [&](CLI::App* c) {
    c->add_option("--dets", post_in, "Detections file")->required();
    c->add_option("--out,-o", post_out, "Output detections file");
  };
  auto* p_prop = post->add_subcommand("propagate", "Copy detections to taxonomy ancestors");
  add_io(p_prop);
  p_prop->add_option("--dedup-iou", dedup_iou)->capture_default_str();
  auto* p_nms = post->add_subcommand("nms", "Per-category non-maximum suppression");
  add_io(p_nms);
  p_nms->add_option("--iou", nms_iou)->capture_default_str();
  auto* p_filter = post->add_subcommand("filter", "Score thresholding");
  add_io(p_filter);
  p_filter->add_option("--default", default_thresh)->capture_default_str();
  p_filter->add_option("--threshold", thresholds, "category=min_score (repeatable)");
  auto* p_run = post->add_subcommand("run", "Configured post-processing chain");
  add_io(p_run);
  p_run->add_option("--steps", steps, "Ordered steps")
      ->delimiter(',')
      ->check(CLI::IsMember({"propagate", "nms", "filter"}));
  p_run->add_option("--dedup-iou", dedup_iou);
  p_run->add_option("--iou", nms_iou);
  p_run->add_option("--default", default_thresh);
  p_run->add_option("--threshold", thresholds);
  auto* p_trigger = post->add_subcommand("trigger", "Image-level segment triggering");
  std::string trigger_image;
  std::vector<std::string> segment;
  double min_score = 0.5;
  p_trigger->add_option("--dets", post_in, "Detections file")->required();
  p_trigger->add_option("--image", trigger_image)->required();
  p_trigger->add_option("--segment", segment, "Segment categories")->required()->delimiter(',');
  p_trigger->add_option("--min-score", min_score)->capture_default_str();

  // ---- fed
  auto* fed = app.add_subcommand("fed", "Detector head federation")->require_subcommand(1);
  auto* fed_register = fed->add_subcommand("register", "Add or replace a head");
  HeadSpec head;
  std::vector<std::string> head_categories;
  std::string fed_out;
  fed_register->add_option("--head-id", head.head_id)->required();
  fed_register->add_option("--version", head.version)->required();
  fed_register->add_option("--categories", head_categories)->delimiter(',');
  fed_register->add_flag("--default", head.is_default,
                         "Owns every taxonomy category no other head claims");
  fed_register->add_option("--out,-o", fed_out, "Registry file to write (defaults to --registry)");
  auto* fed_merge = fed->add_subcommand("merge", "Merge per-head outputs");
  std::vector<std::string> head_outputs;
  fed_merge->add_option("--output", head_outputs, "head_id=detections file (repeatable)")
      ->required();
  fed_merge->add_option("--out,-o", fed_out, "Merged detections file");
  auto* fed_diff = fed->add_subcommand("diff", "Non-regression diff after a head swap");
  std::string before_file;
  std::string after_file;
  std::string changed_head;
  fed_diff->add_option("--before", before_file)->required();
  fed_diff->add_option("--after", after_file)->required();
  fed_diff->add_option("--head", changed_head, "Changed head id")->required();
  fed_diff->add_option("--out,-o", fed_out, "Diff report file");

  // ---- pipeline
  auto* pipe = app.add_subcommand("pipeline", "Annotation pipeline")->require_subcommand(1);
  auto* pipe_sim = pipe->add_subcommand("simulate", "Run the pipeline against simulated judges");
  std::string oracle_file;
  std::string ledger_file;
  std::string recovered_out;
  JudgeModel judges;
  PipelineConfig pipeline;
  pipe_sim->add_option("--oracle", oracle_file, "Oracle dataset")->required();
  pipe_sim->add_option("--miss-rate", judges.miss_rate)->check(CLI::Range(0.0, 1.0));
  pipe_sim->add_option("--false-mark-rate", judges.false_mark_rate)->check(CLI::Range(0.0, 1.0));
  pipe_sim->add_option("--vote-flip-rate", judges.vote_flip_rate)->check(CLI::Range(0.0, 1.0));
  pipe_sim->add_option("--box-noise", judges.box_noise_px, "Max per-axis box shift (px)");
  pipe_sim->add_option("--overlap", pipeline.overlap_k, "Judges per verification task");
  pipe_sim->add_option("--min-dimension", pipeline.min_dimension)->capture_default_str();
  pipe_sim->add_option("--ledger", ledger_file, "Ledger CSV output");
  pipe_sim->add_option("--out,-o", recovered_out, "Recovered dataset file");
  auto* pipe_report = pipe->add_subcommand("report", "Cost and latency accounting");
  double base_cost = 0.0;
  double base_time = 0.0;
  pipe_report->add_option("--ledger", ledger_file)->required();
  auto* base_cost_opt = pipe_report->add_option("--baseline-cost-bbox", base_cost);
  auto* base_time_opt = pipe_report->add_option("--baseline-time-bbox", base_time,
                                                "Baseline minutes per box");

  // ---- serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP service with result cache");

  // ---- bench
  auto* bench = app.add_subcommand("bench", "Benchmarks")->require_subcommand(1);
  auto* bench_eval = bench->add_subcommand("eval", "Evaluation throughput on a synthetic fixture");
  std::size_t bench_images = 10000;
  std::size_t bench_categories = 900;
  std::size_t bench_dets = 100000;
  std::vector<std::size_t> bench_workers{1, 2, 4};
  std::string fixture_dir;
  bench_eval->add_option("--images", bench_images)->capture_default_str();
  bench_eval->add_option("--categories", bench_categories)->capture_default_str();
  bench_eval->add_option("--detections", bench_dets)->capture_default_str();
  bench_eval->add_option("--workers", bench_workers)->delimiter(',');
  bench_eval->add_option("--write-fixture", fixture_dir,
                         "Write taxonomy.json, gt.json and dets.json here instead of timing");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (tax_validate->parsed()) {
      const TaxonomySpec spec = read_taxonomy_spec(tax_file);
      const auto violations = validate(spec);
      for (const auto& v : violations) err << tax_file << ": " << v.message << "\n";
      if (!violations.empty()) return kExitValidation;
      const Taxonomy t = Taxonomy::build(spec);
      out << "ok: " << t.size() << " nodes, " << t.roots().size() << " roots, "
          << t.mappings().size() << " mappings\n";
      return kExitOk;
    }

    DatasetLoadOptions load_options;
    std::vector<std::string> warnings;
    load_options.warnings = &warnings;
    load_options.mapping = lenient ? MappingMode::lenient : MappingMode::strict;
    auto flush_warnings = [&] {
      for (const auto& w : warnings) err << "warning: " << w << "\n";
      warnings.clear();
    };

    if (ds_merge->parsed()) {
      const Taxonomy t = require_taxonomy(g);
      std::vector<Dataset> inputs;
      for (const auto& f : merge_inputs) inputs.push_back(load_dataset(f, t, load_options));
      flush_warnings();
      const Dataset merged = merge_datasets(inputs, t);
      emit(merge_out, dump_json(dataset_to_json(merged)), out);
      err << "merged " << inputs.size() << " datasets: " << merged.images.size() << " images, "
          << merged.annotations.size() << " annotations\n";
      return kExitOk;
    }
    if (ds_stats->parsed()) {
      const Taxonomy t = require_taxonomy(g);
      const Dataset d = load_dataset(stats_file, t, load_options);
      flush_warnings();
      out << "category,count\n";
      for (const auto& row : histogram(d)) out << row.category << "," << row.count << "\n";
      err << d.images.size() << " images, " << d.annotations.size() << " annotations\n";
      return kExitOk;
    }

    if (up->parsed() || down->parsed() || apply->parsed()) {
      const Taxonomy t = require_taxonomy(g);
      const Dataset d = load_dataset(sample_dataset, t, load_options);
      flush_warnings();
      if (apply->parsed()) {
        const SamplingPlan plan = plan_from_json(read_json_file(sample_plan));
        const Dataset result = apply_plan(plan, d);
        emit(sample_out, dump_json(dataset_to_json(result)), out);
        if (!sample_report.empty()) {
          write_text_file(sample_report, distribution_csv(distribution_report(d, result)));
        }
        return kExitOk;
      }
      const SamplingPlan plan =
          up->parsed() ? plan_upsample(d, n_min) : plan_downsample(d, target, g.seed);
      emit(sample_plan, dump_json(plan_to_json(plan)), out);
      if (!sample_report.empty()) {
        write_text_file(sample_report,
                        distribution_csv(distribution_report(d, apply_plan(plan, d))));
      }
      return kExitOk;
    }

    if (ev_run->parsed()) {
      const Taxonomy t = require_taxonomy(g);
      const Dataset gt = load_dataset(gt_file, t, load_options);
      flush_warnings();
      const DetectionSet dets = load_detections(dets_file);
      EvalConfig config;
      config.mode = parse_ap_mode(mode);
      config.federated = parse_federated(federated);
      config.weights = weights == "uniform" ? WeightSource::uniform : WeightSource::instance_count;
      config.workers = workers;
      const EvalReport report = evaluate(gt, dets, config, &t);
      emit(report_out, dump_json(eval_report_to_json(report)), out);
      if (!csv_out.empty()) write_text_file(csv_out, eval_report_csv(report));
      err << "AP50 " << fixed(report.ap50, 4) << "  wAP50 " << fixed(report.wap50, 4) << "  AP "
          << fixed(report.ap, 4) << "  (" << report.categories.size() - report.excluded.size()
          << " categories, mode " << ap_mode_name(config.mode) << ")\n";
      return kExitOk;
    }

    if (p_prop->parsed() || p_nms->parsed() || p_filter->parsed() || p_run->parsed()) {
      const DetectionSet input = load_detections(post_in);
      DetectionSet result;
      if (p_prop->parsed()) {
        result = propagate_labels(input, require_taxonomy(g), dedup_iou);
      } else if (p_nms->parsed()) {
        result = nms(input, nms_iou);
      } else if (p_filter->parsed()) {
        result = filter_scores(input, parse_thresholds(thresholds), default_thresh);
      } else {
        PostprocessConfig config;
        if (!steps.empty()) {
          config.steps.clear();
          for (const auto& s : steps) config.steps.push_back(parse_post_step(s));
        }
        config.dedup_iou = dedup_iou;
        config.nms_iou = nms_iou;
        config.thresholds = parse_thresholds(thresholds);
        config.default_thresh = default_thresh;
        const bool needs_taxonomy =
            std::find(config.steps.begin(), config.steps.end(), PostStep::propagate) !=
            config.steps.end();
        result = run_postprocess(input, needs_taxonomy ? require_taxonomy(g) : Taxonomy{}, config);
        Json doc = detections_to_json(result);
        Json pipeline_steps = Json::array();
        for (PostStep s : config.steps) pipeline_steps.push_back(post_step_name(s));
        if (doc.is_array()) doc = Json{{"detections", std::move(doc)}};
        doc["pipeline"] = std::move(pipeline_steps);
        emit(post_out, dump_json(doc), out);
        return kExitOk;
      }
      emit(post_out, dump_json(detections_to_json(result)), out);
      return kExitOk;
    }
    if (p_trigger->parsed()) {
      const DetectionSet input = load_detections(post_in);
      const std::set<std::string, std::less<>> seg(segment.begin(), segment.end());
      const bool fired = image_trigger(input, trigger_image, seg, require_taxonomy(g), min_score);
      out << (fired ? "true" : "false") << "\n";
      return kExitOk;
    }

    if (fed_register->parsed()) {
      if (g.registry.empty() && fed_out.empty()) throw CLI::RequiredError("--registry or --out");
      HeadRegistry registry;
      if (!g.registry.empty() && std::filesystem::exists(g.registry)) {
        registry = load_registry(g.registry);
      }
      if (head.is_default) {
        registry = register_default_head(registry, head.head_id, head.version, require_taxonomy(g));
      } else {
        head.categories.insert(head_categories.begin(), head_categories.end());
        registry = register_head(registry, head);
      }
      emit(fed_out.empty() ? g.registry : fed_out, dump_json(heads_to_json(registry)), out);
      err << registry.heads().size() << " heads, " << registry.category_index().size()
          << " categories\n";
      return kExitOk;
    }
    if (fed_merge->parsed()) {
      if (g.registry.empty()) throw CLI::RequiredError("--registry");
      const HeadRegistry registry = load_registry(g.registry);
      std::map<std::string, DetectionSet, std::less<>> outputs;
      for (const auto& item : head_outputs) {
        auto [head_id, path] = split_pair(item, "--output");
        outputs[head_id] = load_detections(path);
      }
      emit(fed_out, dump_json(detections_to_json(merge_head_outputs(registry, outputs))), out);
      return kExitOk;
    }
    if (fed_diff->parsed()) {
      if (g.registry.empty()) throw CLI::RequiredError("--registry");
      const HeadRegistry registry = load_registry(g.registry);
      const HeadSpec* changed = registry.find(changed_head);
      if (changed == nullptr) throw Error(ErrorCode::unknown_head, "unknown head: " + changed_head);
      const DiffReport report =
          non_regression_diff(load_detections(before_file), load_detections(after_file), *changed);
      emit(fed_out, dump_json(diff_report_to_json(report)), out);
      return report.pass ? kExitOk : kExitValidation;
    }

    if (pipe_sim->parsed()) {
      const Taxonomy t = require_taxonomy(g);
      const Dataset oracle = load_dataset(oracle_file, t, load_options);
      flush_warnings();
      judges.seed = g.seed;
      const SimulationResult result = simulate(oracle, judges, pipeline);
      if (!ledger_file.empty()) save_ledger(result.ledger, ledger_file);
      emit(recovered_out, dump_json(dataset_to_json(result.dataset)), out);
      const AgreementStats s =
          compare_annotations(result.dataset, oracle, 0.5, pipeline.min_dimension);
      err << "recovered " << s.recovered << " boxes, precision " << fixed(s.precision, 4)
          << ", recall " << fixed(s.recall, 4) << ", cost " << fixed(result.ledger.totals().cost, 2)
          << "\n";
      return kExitOk;
    }
    if (pipe_report->parsed()) {
      const Ledger ledger = load_ledger(ledger_file);
      std::optional<AccountingBaseline> baseline;
      if (base_cost_opt->count() > 0 || base_time_opt->count() > 0) {
        baseline = AccountingBaseline{base_cost, base_time};
      }
      out << format_accounting_report(accounting_report(ledger, baseline));
      return kExitOk;
    }

    if (serve_cmd->parsed()) {
      ServiceConfig config;
      config.listen = g.listen;
      config.cache_capacity = g.cache_capacity;
      config.taxonomy_path = g.taxonomy;
      config.registry_path = g.registry;
      Taxonomy t = require_taxonomy(g);
      HeadRegistry registry;
      if (!g.registry.empty()) registry = load_registry(g.registry);
      Service service(config, std::move(t), std::move(registry));
      err << "listening on " << config.listen << "\n";
      if (serve(service, config.listen) != 0) {
        err << "error: cannot listen on " << config.listen << "\n";
        return kExitValidation;
      }
      return kExitOk;
    }

    if (bench_eval->parsed()) {
      const EvalFixture f = make_eval_fixture(bench_images, bench_categories, bench_dets, g.seed);
      if (!fixture_dir.empty()) {
        const std::filesystem::path dir(fixture_dir);
        std::filesystem::create_directories(dir);
        save_taxonomy(f.taxonomy, dir / "taxonomy.json");
        save_dataset(f.ground_truth, dir / "gt.json");
        save_detections(f.detections, dir / "dets.json");
        out << "wrote fixture to " << dir.string() << "\n";
        return kExitOk;
      }
      out << "workers,seconds,detections_per_second,AP50\n";
      for (std::size_t w : bench_workers) {
        EvalConfig config;
        config.workers = std::max<std::size_t>(w, 1);
        const auto start = std::chrono::steady_clock::now();
        const EvalReport report = evaluate(f.ground_truth, f.detections, config, &f.taxonomy);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << config.workers << "," << fixed(seconds, 4) << ","
            << fixed(static_cast<double>(f.detections.detections.size()) / seconds, 0) << ","
            << fixed(report.ap50, 6) << "\n";
      }
      return kExitOk;
    }
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}

}  // namespace genodkit
