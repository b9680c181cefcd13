#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "groundattn/config.hpp"
#include "groundattn/metrics.hpp"
#include "groundattn/pipeline.hpp"
#include "groundattn/sample.hpp"

namespace groundattn {

// Pipeline output lifted to image space.
struct Prediction {
  PipelineResult pipeline;
  BinaryMask mask;  // image resolution
  std::optional<BBox> box;
};

Prediction predict(const Sample& sample, const GroundingConfig& config);

// Lifts a map-resolution mask to image space and boxes it.
Prediction to_image_space(PipelineResult result, ImageSize image_size, BoxMode box_mode);

// Ground-truth box to score RSREC against: the stored one, else the tight
// box of the ground-truth mask, else none.
std::optional<BBox> reference_box(const GroundTruth& gt);

struct SampleEvaluation {
  std::string sample_id;
  std::string manifest;  // relative to the dataset root, '/' separated
  std::optional<BBox> box;
  std::size_t mask_pixels = 0;
  std::optional<Overlap> rsres;
  std::optional<Overlap> rsrec;  // configured box mode
  std::optional<Overlap> rsrec_tight_all;
  std::optional<Overlap> rsrec_largest_component;
  std::optional<Overlap> refined_rsres;
  std::optional<Overlap> refined_rsrec;
};

struct EvalOptions {
  int jobs = 1;
  // Directory holding `<sample_id>.png` masks produced by an external refiner.
  std::optional<std::filesystem::path> refined_masks_dir;
};

struct DatasetEvaluation {
  GroundingConfig config;
  std::vector<SampleEvaluation> samples;  // ordered by manifest path
  MetricsReport metrics;
  std::optional<TaskMetrics> rsrec_tight_all;
  std::optional<TaskMetrics> rsrec_largest_component;
  std::optional<MetricsReport> refined;
};

// Every manifest.json under `root`, sorted by path relative to root.
// Throws kEmptyDataset when there is none.
std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& root);

// Results are independent of `jobs`. On failure, the error of the first
// failing sample (in manifest order) is rethrown.
DatasetEvaluation evaluate_dataset(const std::filesystem::path& root, const GroundingConfig& config,
                                   const EvalOptions& options = {});

std::string report_text(const DatasetEvaluation& evaluation);
// Deterministic: no timestamps or absolute paths, keys in fixed order.
std::string report_json(const DatasetEvaluation& evaluation);
// `{"format_version": 1, "boxes": {"<sample_id>": [x1,y1,x2,y2] | null}}`
std::string refine_boxes_json(const DatasetEvaluation& evaluation);

struct AblationCell {
  std::string label;
  Strategy strategy = Strategy::kSimilarity;
  bool use_evolve = true;
  StageOrder order = StageOrder::kOFE;
  std::vector<int> resolutions;
  MetricsReport metrics;

  // Config for a single evaluate_dataset run that reproduces this cell.
  GroundingConfig config(const GroundingConfig& base) const;
};

struct AblationOptions {
  int jobs = 1;
  std::vector<std::vector<int>> resolution_sets = {{16}, {32}, {64}, {16, 32}, {32, 64}, {16, 32, 64}};
};

// Strategy x evolve x resolution set (all OFE), plus OEF with the base
// strategy and resolutions. Resolution sets that the first sample does not
// provide are dropped. Other settings come from `base`.
std::vector<AblationCell> run_ablation(const std::filesystem::path& root, const GroundingConfig& base,
                                       const AblationOptions& options = {});

std::string ablation_text(const std::vector<AblationCell>& cells);
std::string ablation_json(const std::vector<AblationCell>& cells, const GroundingConfig& base);

}  // namespace groundattn
