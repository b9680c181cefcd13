#include "groundattn/pipeline.hpp"

#include <algorithm>
#include <string>

#include "groundattn/error.hpp"
#include "groundattn/overview.hpp"

namespace groundattn {

std::string_view to_string(StageOrder o) { return o == StageOrder::kOFE ? "ofe" : "oef"; }

StageOrder parse_stage_order(std::string_view text) {
  if (text == "ofe" || text == "OFE") return StageOrder::kOFE;
  if (text == "oef" || text == "OEF") return StageOrder::kOEF;
  throw Error(ErrorCode::kInvalidArgument, "unknown stage order '" + std::string(text) + "'");
}

void PipelineConfig::validate() const {
  interaction.validate();
  evolve.validate();
  if (target_resolution < 0) throw Error(ErrorCode::kInvalidArgument, "target resolution must be positive");
  for (int r : resolutions) {
    if (r <= 0) throw Error(ErrorCode::kInvalidArgument, "resolutions must be positive");
  }
}

namespace {

template <typename F>
auto in_stage(const char* stage, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

SelfAttentionStack select_layers(const SelfAttentionStack& stack, const std::vector<int>& resolutions) {
  if (resolutions.empty()) return stack;
  SelfAttentionStack picked;
  for (int r : resolutions) {
    const AttentionMatrix* layer = stack.find(r);
    if (layer == nullptr) {
      throw Error(ErrorCode::kUnknownResolution, "no self-attention at resolution " + std::to_string(r));
    }
    if (picked.find(r) == nullptr) picked.layers.push_back(*layer);
  }
  std::sort(picked.layers.begin(), picked.layers.end(),
            [](const AttentionMatrix& a, const AttentionMatrix& b) { return a.resolution < b.resolution; });
  return picked;
}

}  // namespace

FusedSelfAttention fuse_prior(const SelfAttentionStack& stack, const PipelineConfig& config) {
  return in_stage("focus", [&] {
    SelfAttentionStack layers = select_layers(stack, config.resolutions);
    if (layers.layers.empty()) throw Error(ErrorCode::kEmptyStack, "no self-attention layers");
    int target = config.target_resolution;
    if (target == 0) target = layers.layers.back().resolution;
    return fuse_self_attention(layers, target);
  });
}

PipelineResult run_pipeline(const AttentionTrace& trace, const SelfAttentionStack& stack, const PipelineConfig& config) {
  config.validate();
  ScoreMap coarse = in_stage("overview", [&] { return aggregate_cross_attention(trace); });
  return run_with_prior(coarse, fuse_prior(stack, config), config);
}

PipelineResult run_with_prior(const ScoreMap& coarse_cross, const FusedSelfAttention& prior,
                              const PipelineConfig& config) {
  config.validate();
  PipelineResult result;
  result.resolution = prior.resolution();
  result.cross = in_stage("overview", [&] { return resize_map(coarse_cross, result.resolution); });
  const EvolveConfig& ev = config.evolve;
  if (!config.use_evolve) {
    result.interaction = in_stage("focus", [&] { return interact(result.cross, prior, config.interaction); });
    result.evolved = result.interaction;
    result.final_map = result.interaction;
  } else if (config.order == StageOrder::kOFE) {
    result.interaction = in_stage("focus", [&] { return interact(result.cross, prior, config.interaction); });
    in_stage("evolve", [&] {
      const ScoreMap& source = ev.seed_source == SeedSource::kCrossMap ? result.cross : result.interaction;
      result.seeds = select_seeds(source, ev.k);
      result.evolved = grow(result.interaction, result.seeds, ev.tau);
      return 0;
    });
    result.final_map = result.evolved;
  } else {
    in_stage("evolve", [&] {
      result.seeds = select_seeds(result.cross, ev.k);
      result.evolved = grow(result.cross, result.seeds, ev.tau);
      return 0;
    });
    result.interaction = in_stage("focus", [&] { return interact(result.evolved, prior, config.interaction); });
    result.final_map = result.interaction;
  }
  result.mask = in_stage("evolve", [&] { return binarize(result.final_map, ev.alpha); });
  return result;
}

}  // namespace groundattn
