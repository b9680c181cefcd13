// groundattn: training-free grounding from VLM cross-attention and
// diffusion self-attention traces.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 bad input data,
// 3 internal failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "groundattn/config.hpp"
#include "groundattn/error.hpp"
#include "groundattn/evaluation.hpp"
#include "groundattn/png_io.hpp"
#include "groundattn/sample.hpp"
#include "groundattn/synth.hpp"

namespace fs = std::filesystem;
using namespace groundattn;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

// Flags shared by run/eval/ablate. Precedence, lowest first: built-in
// defaults, --config file, --set pairs, dedicated flags.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::vector<std::pair<std::string, std::string>> direct;  // key, value
  bool no_evolve = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_file, "key = value settings file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "override one setting, e.g. --set tau=0.25");
    static const std::pair<const char*, const char*> kFlags[] = {
        {"--strategy", "strategy"},         {"--k", "k"},
        {"--tau", "tau"},                   {"--alpha", "alpha"},
        {"--gamma", "gamma"},               {"--anchor-count", "anchor_count"},
        {"--similarity-axis", "similarity_axis"},
        {"--stage-order", "stage_order"},   {"--seed-source", "seed_source"},
        {"--resolutions", "resolutions"},   {"--target-resolution", "target_resolution"},
        {"--box-mode", "box_mode"},
    };
    direct.reserve(std::size(kFlags));
    for (const auto& [flag, key] : kFlags) {
      direct.emplace_back(key, std::string());
      app->add_option(flag, direct.back().second, std::string("setting '") + key + "'");
    }
    app->add_flag("--no-evolve", no_evolve, "binarize the interaction map directly");
  }

  GroundingConfig resolve() const {
    GroundingConfig config;
    if (!config_file.empty()) apply_config_file(config, config_file);
    for (const auto& pair : sets) {
      auto eq = pair.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "--set expects key=value, got '" + pair + "'");
      apply_setting(config, pair.substr(0, eq), pair.substr(eq + 1));
    }
    for (const auto& [key, value] : direct) {
      if (!value.empty()) apply_setting(config, key, value);
    }
    if (no_evolve) config.pipeline.use_evolve = false;
    config.pipeline.validate();
    return config;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

// Configuration problems are the caller's; everything else in the library's
// error type is about the data.
int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitData;
}

int cmd_run(const fs::path& manifest, const fs::path& out_dir, const GroundingConfig& config, bool heatmaps,
            int heatmap_scale) {
  LoadOptions load;
  load.resolutions = std::set<int>(config.pipeline.resolutions.begin(), config.pipeline.resolutions.end());
  load.ground_truth = false;
  Sample sample = load_sample(manifest, load);
  Prediction pred = predict(sample, config);

  fs::create_directories(out_dir);
  png::write_mask(pred.mask, out_dir / "mask.png");
  write_box(pred.box, out_dir / "box.json");
  if (heatmaps) {
    png::write_heatmap(pred.pipeline.cross, out_dir / "cross.png", heatmap_scale);
    png::write_heatmap(pred.pipeline.interaction, out_dir / "interaction.png", heatmap_scale);
    png::write_heatmap(pred.pipeline.evolved, out_dir / "evolved.png", heatmap_scale);
  }
  std::printf("%s: %zu mask pixels, box ", sample.manifest.sample_id.c_str(), foreground_count(pred.mask));
  if (pred.box) {
    std::printf("[%d, %d, %d, %d]\n", pred.box->x1, pred.box->y1, pred.box->x2, pred.box->y2);
  } else {
    std::printf("null\n");
  }
  return 0;
}

int cmd_eval(const fs::path& dataset, const GroundingConfig& config, const EvalOptions& options,
             const std::string& report, const std::string& boxes_out) {
  DatasetEvaluation ev = evaluate_dataset(dataset, config, options);
  std::fputs(report_text(ev).c_str(), stdout);
  if (!report.empty()) write_text(report, report_json(ev));
  if (!boxes_out.empty()) write_text(boxes_out, refine_boxes_json(ev));
  return 0;
}

int cmd_ablate(const fs::path& dataset, const GroundingConfig& base, const AblationOptions& options,
               const std::string& report) {
  std::vector<AblationCell> cells = run_ablation(dataset, base, options);
  std::fputs(ablation_text(cells).c_str(), stdout);
  if (!report.empty()) write_text(report, ablation_json(cells, base));
  return 0;
}

int cmd_synth(const fs::path& out_dir, int count, std::uint64_t seed) {
  for (const auto& spec : synth::standard_suite(count, seed)) {
    synth::write_fixture(synth::make_fixture(spec), out_dir / spec.sample_id);
  }
  std::printf("wrote %d fixtures to %s\n", count, out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot referring grounding from attention traces"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "ground one sample");
  ConfigFlags run_flags;
  std::string run_manifest, run_out;
  bool run_heatmaps = false;
  int heatmap_scale = 4;
  run->add_option("--manifest", run_manifest, "sample manifest.json")->required();
  run->add_option("--out", run_out, "output directory")->required();
  run->add_flag("--heatmaps", run_heatmaps, "also write cross/interaction/evolved heatmaps");
  run->add_option("--heatmap-scale", heatmap_scale, "pixels per map cell")->check(CLI::Range(1, 64));
  run_flags.attach(run);

  auto* eval = app.add_subcommand("eval", "evaluate a directory of samples");
  ConfigFlags eval_flags;
  std::string eval_dataset, eval_report, boxes_out, refined_in;
  int eval_jobs = 1;
  eval->add_option("--dataset", eval_dataset, "root searched for manifest.json files")->required();
  eval->add_option("--report", eval_report, "write the JSON report here");
  eval->add_option("--jobs", eval_jobs, "worker threads")->check(CLI::PositiveNumber);
  eval->add_option("--refine-boxes-out", boxes_out, "write predicted boxes for an external refiner");
  eval->add_option("--refined-masks-in", refined_in, "directory of <sample_id>.png refined masks")
      ->check(CLI::ExistingDirectory);
  eval_flags.attach(eval);

  auto* ablate = app.add_subcommand("ablate", "sweep strategies, evolve, resolutions and stage order");
  ConfigFlags ablate_flags;
  std::string ablate_dataset, ablate_report;
  int ablate_jobs = 1;
  ablate->add_option("--dataset", ablate_dataset, "root searched for manifest.json files")->required();
  ablate->add_option("--report", ablate_report, "write the JSON table here");
  ablate->add_option("--jobs", ablate_jobs, "worker threads")->check(CLI::PositiveNumber);
  ablate_flags.attach(ablate);

  auto* gen = app.add_subcommand("synth", "write the synthetic fixture suite");
  std::string synth_out;
  int synth_count = 50;
  std::uint64_t synth_seed = 42;
  gen->add_option("--out", synth_out, "output directory")->required();
  gen->add_option("--count", synth_count, "number of fixtures")->check(CLI::Range(1, 100000));
  gen->add_option("--seed", synth_seed, "suite seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) {
      return cmd_run(run_manifest, run_out, run_flags.resolve(), run_heatmaps, heatmap_scale);
    }
    if (*eval) {
      EvalOptions options;
      options.jobs = eval_jobs;
      if (!refined_in.empty()) options.refined_masks_dir = fs::path(refined_in);
      return cmd_eval(eval_dataset, eval_flags.resolve(), options, eval_report, boxes_out);
    }
    if (*ablate) {
      AblationOptions options;
      options.jobs = ablate_jobs;
      return cmd_ablate(ablate_dataset, ablate_flags.resolve(), options, ablate_report);
    }
    if (*gen) return cmd_synth(synth_out, synth_count, synth_seed);
  } catch (const Error& e) {
    std::fprintf(stderr, "groundattn: %s\n", e.what());
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "groundattn: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "groundattn: internal error: %s\n", e.what());
    return kExitInternal;
  }
  return kExitInternal;
}
