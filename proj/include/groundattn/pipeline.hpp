#pragma once

#include <string_view>
#include <vector>

#include "groundattn/evolve.hpp"
#include "groundattn/focus.hpp"
#include "groundattn/sample.hpp"

namespace groundattn {

// OFE: aggregate, resize, fuse, interact, seed, grow, binarize.
// OEF: aggregate, resize, seed and grow on the cross map, interact, binarize.
enum class StageOrder { kOFE, kOEF };

std::string_view to_string(StageOrder o);
StageOrder parse_stage_order(std::string_view text);

struct PipelineConfig {
  InteractionConfig interaction;
  EvolveConfig evolve;
  StageOrder order = StageOrder::kOFE;
  // false skips seeding/growth and binarizes the interaction map directly.
  bool use_evolve = true;
  // Stack layers to fuse; empty means every layer present.
  std::vector<int> resolutions = {32, 64};
  // 0 means the largest fused resolution.
  int target_resolution = 0;

  void validate() const;
};

struct PipelineResult {
  ScoreMap cross;        // A_C at the fused resolution
  ScoreMap interaction;  // A_CS (OEF: interaction of the grown cross map)
  ScoreMap evolved;      // A_E (OFE: grown A_CS; OEF: grown A_C)
  ScoreMap final_map;    // the map handed to binarize
  SeedSet seeds;
  BinaryMask mask;       // at the fused resolution
  int resolution = 0;
};

// Errors come back tagged with the failing stage name
// ("overview", "focus" or "evolve").
PipelineResult run_pipeline(const AttentionTrace& trace, const SelfAttentionStack& stack, const PipelineConfig& config);

// The pieces run_pipeline is made of, for callers that sweep configurations
// and want to reuse the shared stages. run_pipeline(trace, stack, c) equals
// run_with_prior(aggregate_cross_attention(trace), fuse_prior(stack, c), c).
FusedSelfAttention fuse_prior(const SelfAttentionStack& stack, const PipelineConfig& config);
PipelineResult run_with_prior(const ScoreMap& coarse_cross, const FusedSelfAttention& prior,
                              const PipelineConfig& config);

}  // namespace groundattn
