#include "groundattn/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <set>
#include <thread>

#include "groundattn/error.hpp"
#include "groundattn/evolve.hpp"
#include "groundattn/grounding.hpp"
#include "groundattn/overview.hpp"
#include "groundattn/png_io.hpp"
#include "json.hpp"

namespace groundattn {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// Runs body(i) for i in [0, n) on up to `jobs` threads. After the first
// failure no new indices are started; every lower index has already been
// claimed, so the rethrown error is the one with the smallest index.
template <typename F>
void for_each_index(std::size_t n, int jobs, F&& body) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  auto worker = [&] {
    while (!failed.load()) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::size_t threads = std::clamp<std::size_t>(jobs < 1 ? 1 : static_cast<std::size_t>(jobs), 1, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::set<int> resolution_set(const std::vector<int>& resolutions) {
  return std::set<int>(resolutions.begin(), resolutions.end());
}

std::string relative_name(const fs::path& manifest, const fs::path& root) {
  return fs::relative(manifest, root).generic_string();
}

void add_record(std::vector<EvalRecord>& records, const std::string& id, Task task,
                const std::optional<Overlap>& overlap) {
  if (overlap) records.push_back(make_record(id, task, *overlap));
}

std::optional<TaskMetrics> summarize_optional(const std::vector<EvalRecord>& records) {
  if (records.empty()) return std::nullopt;
  return summarize_task(records);
}

// Samples without ground truth contribute no records, so a task may be absent.
MetricsReport summarize_present(const std::vector<EvalRecord>& records) {
  return records.empty() ? MetricsReport{} : summarize(records);
}

struct Scores {
  std::optional<Overlap> rsres;
  std::optional<Overlap> rsrec;
};

Scores score(const BinaryMask& mask, const std::optional<BBox>& box, const GroundTruth& gt,
             const std::optional<BBox>& gt_box) {
  Scores s;
  if (gt.mask) s.rsres = mask_overlap(mask, *gt.mask);
  if (gt_box) s.rsrec = box_overlap(box, *gt_box);
  return s;
}

ordered_json metrics_json(const TaskMetrics& m) {
  ordered_json j;
  j["pr@0.3"] = m.pr30;
  j["pr@0.5"] = m.pr50;
  j["pr@0.7"] = m.pr70;
  j["miou"] = m.miou;
  j["oiou"] = m.oiou;
  j["n_samples"] = m.n_samples;
  return j;
}

ordered_json report_metrics_json(const MetricsReport& r) {
  ordered_json j = ordered_json::object();
  if (r.rsrec) j["rsrec"] = metrics_json(*r.rsrec);
  if (r.rsres) j["rsres"] = metrics_json(*r.rsres);
  return j;
}

ordered_json box_json(const std::optional<BBox>& box) {
  if (!box) return nullptr;
  return ordered_json::array({box->x1, box->y1, box->x2, box->y2});
}

ordered_json iou_json(const std::optional<Overlap>& o) {
  if (!o) return nullptr;
  return o->iou();
}

ordered_json config_json(const GroundingConfig& config) {
  const PipelineConfig& p = config.pipeline;
  ordered_json j;
  j["strategy"] = std::string(to_string(p.interaction.strategy));
  j["similarity_axis"] = std::string(to_string(p.interaction.similarity_axis));
  j["gamma"] = p.interaction.gamma;
  j["anchor_count"] = p.interaction.anchor_count;
  j["k"] = p.evolve.k;
  j["tau"] = p.evolve.tau;
  j["alpha"] = p.evolve.alpha;
  j["seed_source"] = std::string(to_string(p.evolve.seed_source));
  j["stage_order"] = std::string(to_string(p.order));
  j["evolve"] = p.use_evolve;
  j["resolutions"] = p.resolutions;
  j["target_resolution"] = p.target_resolution;
  j["box_mode"] = std::string(to_string(config.box_mode));
  return j;
}

template <typename F>
auto tagged(const std::string& sample_id, const char* stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    Error out = e.sample_id().empty() ? e.with_sample(sample_id) : e;
    if (out.stage().empty()) out = out.with_stage(stage);
    throw out;
  }
}

}  // namespace

Prediction to_image_space(PipelineResult result, ImageSize image_size, BoxMode box_mode) {
  Prediction p;
  p.mask = resize_nearest(result.mask, static_cast<std::size_t>(image_size.height),
                          static_cast<std::size_t>(image_size.width));
  p.box = mask_to_box(p.mask, box_mode);
  p.pipeline = std::move(result);
  return p;
}

Prediction predict(const Sample& sample, const GroundingConfig& config) {
  return tagged(sample.manifest.sample_id, "evolve", [&] {
    PipelineResult result = run_pipeline(sample.trace, sample.stack, config.pipeline);
    return to_image_space(std::move(result), sample.manifest.image_size, config.box_mode);
  });
}

std::optional<BBox> reference_box(const GroundTruth& gt) {
  if (gt.box) return gt.box;
  if (gt.mask) return mask_to_box(*gt.mask, BoxMode::kTightAll);
  return std::nullopt;
}

std::vector<fs::path> find_manifests(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kMissingFile, "dataset directory " + root.string() + " does not exist");
  }
  std::vector<fs::path> found;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "manifest.json") found.push_back(entry.path());
  }
  if (found.empty()) throw Error(ErrorCode::kEmptyDataset, "no manifest.json under " + root.string());
  std::sort(found.begin(), found.end(), [&](const fs::path& a, const fs::path& b) {
    return relative_name(a, root) < relative_name(b, root);
  });
  return found;
}

DatasetEvaluation evaluate_dataset(const fs::path& root, const GroundingConfig& config, const EvalOptions& options) {
  config.pipeline.validate();
  const std::vector<fs::path> manifests = find_manifests(root);

  DatasetEvaluation out;
  out.config = config;
  out.samples.resize(manifests.size());

  LoadOptions load;
  load.resolutions = resolution_set(config.pipeline.resolutions);

  for_each_index(manifests.size(), options.jobs, [&](std::size_t i) {
    Sample sample = load_sample(manifests[i], load);
    const std::string& id = sample.manifest.sample_id;
    Prediction pred = predict(sample, config);

    SampleEvaluation& ev = out.samples[i];
    ev.sample_id = id;
    ev.manifest = relative_name(manifests[i], root);
    ev.box = pred.box;
    ev.mask_pixels = foreground_count(pred.mask);

    const GroundTruth& gt = sample.ground_truth;
    const std::optional<BBox> gt_box = reference_box(gt);
    Scores s = score(pred.mask, pred.box, gt, gt_box);
    ev.rsres = s.rsres;
    ev.rsrec = s.rsrec;
    if (gt_box) {
      ev.rsrec_tight_all = box_overlap(mask_to_box(pred.mask, BoxMode::kTightAll), *gt_box);
      ev.rsrec_largest_component = box_overlap(mask_to_box(pred.mask, BoxMode::kLargestComponent), *gt_box);
    }

    if (options.refined_masks_dir) {
      tagged(id, "attnio", [&] {
        fs::path path = *options.refined_masks_dir / (id + ".png");
        if (!fs::exists(path)) throw Error(ErrorCode::kMissingFile, "refined mask " + path.string() + " not found");
        BinaryMask refined = png::read_mask(path);
        if (refined.rows() != static_cast<std::size_t>(sample.manifest.image_size.height) ||
            refined.cols() != static_cast<std::size_t>(sample.manifest.image_size.width)) {
          throw Error(ErrorCode::kShapeMismatch, "refined mask size differs from image_size");
        }
        Scores r = score(refined, mask_to_box(refined, config.box_mode), gt, gt_box);
        ev.refined_rsres = r.rsres;
        ev.refined_rsrec = r.rsrec;
        return 0;
      });
    }
  });

  std::set<std::string> ids;
  for (const auto& ev : out.samples) {
    if (!ids.insert(ev.sample_id).second) {
      throw Error(ErrorCode::kMalformedManifest, "duplicate sample_id in dataset").with_sample(ev.sample_id);
    }
  }

  std::vector<EvalRecord> main, tight, largest, refined;
  for (const auto& ev : out.samples) {
    add_record(main, ev.sample_id, Task::kRsres, ev.rsres);
    add_record(main, ev.sample_id, Task::kRsrec, ev.rsrec);
    add_record(tight, ev.sample_id, Task::kRsrec, ev.rsrec_tight_all);
    add_record(largest, ev.sample_id, Task::kRsrec, ev.rsrec_largest_component);
    add_record(refined, ev.sample_id, Task::kRsres, ev.refined_rsres);
    add_record(refined, ev.sample_id, Task::kRsrec, ev.refined_rsrec);
  }
  out.metrics = summarize_present(main);
  out.rsrec_tight_all = summarize_optional(tight);
  out.rsrec_largest_component = summarize_optional(largest);
  if (options.refined_masks_dir) out.refined = summarize_present(refined);
  return out;
}

std::string report_text(const DatasetEvaluation& evaluation) {
  std::vector<std::pair<std::string, TaskMetrics>> rows;
  const std::string mode(to_string(evaluation.config.box_mode));
  if (evaluation.metrics.rsrec) rows.emplace_back("RSREC (" + mode + ")", *evaluation.metrics.rsrec);
  if (evaluation.metrics.rsres) rows.emplace_back("RSRES", *evaluation.metrics.rsres);
  if (evaluation.rsrec_tight_all) rows.emplace_back("RSREC box=tight_all", *evaluation.rsrec_tight_all);
  if (evaluation.rsrec_largest_component) {
    rows.emplace_back("RSREC box=largest_component", *evaluation.rsrec_largest_component);
  }
  if (evaluation.refined) {
    if (evaluation.refined->rsrec) rows.emplace_back("RSREC w/ refine", *evaluation.refined->rsrec);
    if (evaluation.refined->rsres) rows.emplace_back("RSRES w/ refine", *evaluation.refined->rsres);
  }
  std::string out = std::to_string(evaluation.samples.size()) + " samples\n";
  if (rows.empty()) return out + "no ground truth to score against\n";
  return out + format_table(rows);
}

std::string report_json(const DatasetEvaluation& evaluation) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config_json(evaluation.config);
  j["n_samples"] = evaluation.samples.size();
  ordered_json tasks = report_metrics_json(evaluation.metrics);
  if (evaluation.rsrec_tight_all) tasks["rsrec_tight_all"] = metrics_json(*evaluation.rsrec_tight_all);
  if (evaluation.rsrec_largest_component) {
    tasks["rsrec_largest_component"] = metrics_json(*evaluation.rsrec_largest_component);
  }
  j["tasks"] = tasks;
  if (evaluation.refined) j["refined"] = report_metrics_json(*evaluation.refined);
  ordered_json samples = ordered_json::array();
  for (const auto& ev : evaluation.samples) {
    ordered_json s;
    s["sample_id"] = ev.sample_id;
    s["manifest"] = ev.manifest;
    s["box"] = box_json(ev.box);
    s["mask_pixels"] = ev.mask_pixels;
    s["rsres_iou"] = iou_json(ev.rsres);
    s["rsrec_iou"] = iou_json(ev.rsrec);
    s["rsrec_tight_all_iou"] = iou_json(ev.rsrec_tight_all);
    s["rsrec_largest_component_iou"] = iou_json(ev.rsrec_largest_component);
    if (evaluation.refined) {
      s["refined_rsres_iou"] = iou_json(ev.refined_rsres);
      s["refined_rsrec_iou"] = iou_json(ev.refined_rsrec);
    }
    samples.push_back(std::move(s));
  }
  j["samples"] = std::move(samples);
  return j.dump(2) + "\n";
}

std::string refine_boxes_json(const DatasetEvaluation& evaluation) {
  ordered_json boxes = ordered_json::object();
  for (const auto& ev : evaluation.samples) boxes[ev.sample_id] = box_json(ev.box);
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["boxes"] = std::move(boxes);
  return j.dump(2) + "\n";
}

GroundingConfig AblationCell::config(const GroundingConfig& base) const {
  GroundingConfig c = base;
  c.pipeline.interaction.strategy = strategy;
  c.pipeline.use_evolve = use_evolve;
  c.pipeline.order = order;
  c.pipeline.resolutions = resolutions;
  return c;
}

std::vector<AblationCell> run_ablation(const fs::path& root, const GroundingConfig& base,
                                       const AblationOptions& options) {
  base.pipeline.validate();
  const std::vector<fs::path> manifests = find_manifests(root);

  const Manifest first = read_manifest(manifests.front());
  std::vector<std::vector<int>> sets;
  for (const auto& set : options.resolution_sets) {
    bool available = std::all_of(set.begin(), set.end(), [&](int r) { return first.self_stack_paths.contains(r); });
    if (available && !set.empty()) sets.push_back(set);
  }

  std::vector<int> base_resolutions = base.pipeline.resolutions;
  if (base_resolutions.empty()) {
    for (const auto& [r, p] : first.self_stack_paths) base_resolutions.push_back(r);
  }

  std::vector<AblationCell> cells;
  const Strategy strategies[] = {Strategy::kSimilarity, Strategy::kAnchor, Strategy::kMultiplication,
                                 Strategy::kExponentiation};
  for (const auto& set : sets) {
    for (Strategy s : strategies) {
      for (bool evolve : {false, true}) {
        AblationCell cell;
        cell.strategy = s;
        cell.use_evolve = evolve;
        cell.order = StageOrder::kOFE;
        cell.resolutions = set;
        cell.label = std::string(to_string(s)) + (evolve ? " + evolve" : " w/o evolve") + " @ " +
                     format_resolution_list(set);
        cells.push_back(cell);
      }
    }
  }
  {
    AblationCell cell;
    cell.strategy = base.pipeline.interaction.strategy;
    cell.use_evolve = true;
    cell.order = StageOrder::kOEF;
    cell.resolutions = base_resolutions;
    cell.label = std::string(to_string(cell.strategy)) + " + evolve (oef) @ " + format_resolution_list(base_resolutions);
    cells.push_back(cell);
  }

  std::set<int> needed;
  for (const auto& cell : cells) needed.insert(cell.resolutions.begin(), cell.resolutions.end());
  LoadOptions load;
  load.resolutions = needed;

  // scores[cell][sample]
  std::vector<std::vector<Scores>> scores(cells.size(), std::vector<Scores>(manifests.size()));
  std::vector<std::string> ids(manifests.size());

  for_each_index(manifests.size(), options.jobs, [&](std::size_t i) {
    Sample sample = load_sample(manifests[i], load);
    const std::string& id = sample.manifest.sample_id;
    ids[i] = id;
    const std::optional<BBox> gt_box = reference_box(sample.ground_truth);
    const ScoreMap coarse = tagged(id, "overview", [&] { return aggregate_cross_attention(sample.trace); });

    std::vector<int> prior_resolutions;
    std::optional<FusedSelfAttention> prior;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const GroundingConfig config = cells[c].config(base);
      if (!prior || prior_resolutions != cells[c].resolutions) {
        prior = tagged(id, "focus", [&] { return fuse_prior(sample.stack, config.pipeline); });
        prior_resolutions = cells[c].resolutions;
      }
      Prediction pred = tagged(id, "evolve", [&] {
        return to_image_space(run_with_prior(coarse, *prior, config.pipeline), sample.manifest.image_size,
                              config.box_mode);
      });
      scores[c][i] = score(pred.mask, pred.box, sample.ground_truth, gt_box);
    }
  });

  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<EvalRecord> records;
    for (std::size_t i = 0; i < manifests.size(); ++i) {
      add_record(records, ids[i], Task::kRsres, scores[c][i].rsres);
      add_record(records, ids[i], Task::kRsrec, scores[c][i].rsrec);
    }
    cells[c].metrics = summarize_present(records);
  }
  return cells;
}

std::string ablation_text(const std::vector<AblationCell>& cells) {
  std::string out;
  for (Task task : {Task::kRsrec, Task::kRsres}) {
    std::vector<std::pair<std::string, TaskMetrics>> rows;
    for (const auto& cell : cells) {
      const auto& m = task == Task::kRsrec ? cell.metrics.rsrec : cell.metrics.rsres;
      if (m) rows.emplace_back(cell.label, *m);
    }
    if (rows.empty()) continue;
    if (!out.empty()) out += "\n";
    out += task == Task::kRsrec ? "RSREC\n" : "RSRES\n";
    out += format_table(rows);
  }
  return out.empty() ? "no ground truth to score against\n" : out;
}

std::string ablation_json(const std::vector<AblationCell>& cells, const GroundingConfig& base) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["base_config"] = config_json(base);
  ordered_json list = ordered_json::array();
  for (const auto& cell : cells) {
    ordered_json c;
    c["label"] = cell.label;
    c["strategy"] = std::string(to_string(cell.strategy));
    c["evolve"] = cell.use_evolve;
    c["stage_order"] = std::string(to_string(cell.order));
    c["resolutions"] = cell.resolutions;
    c["tasks"] = report_metrics_json(cell.metrics);
    list.push_back(std::move(c));
  }
  j["cells"] = std::move(list);
  return j.dump(2) + "\n";
}

}  // namespace groundattn
