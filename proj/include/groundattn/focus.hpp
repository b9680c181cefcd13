#pragma once

#include <string_view>

#include "groundattn/sample.hpp"
#include "groundattn/types.hpp"

namespace groundattn {

// Unified structural prior at one target resolution; rows stay stochastic.
struct FusedSelfAttention {
  AttentionMatrix matrix;

  int resolution() const { return matrix.resolution; }
};

enum class Strategy { kSimilarity, kAnchor, kMultiplication, kExponentiation };
enum class SimilarityAxis { kColumn, kRow };

struct InteractionConfig {
  Strategy strategy = Strategy::kSimilarity;
  double gamma = 2.0;      // exponentiation only
  int anchor_count = 7;    // anchor only
  SimilarityAxis similarity_axis = SimilarityAxis::kColumn;

  void validate() const;
};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);
std::string_view to_string(SimilarityAxis a);
SimilarityAxis parse_similarity_axis(std::string_view text);

// Resamples an (r*r, r*r) attention tensor, viewed as (r, r, r, r), to
// (R*R, R*R): bilinear over the key grid, then over the query grid, then
// each row rescaled to sum to 1. A layer already at R is returned as is.
AttentionMatrix resize_attention(const AttentionMatrix& layer, int target);

// Equal-weight mean of every layer after resize_attention to `target`.
FusedSelfAttention fuse_self_attention(const SelfAttentionStack& stack, int target);

// Combines the cross-attention map (target x target) with the structural
// prior. With a = flatten(cross), S = prior:
//   similarity      out[v] = cos(a, S[:,v])   (S[v,:] with the row axis)
//   multiplication  out[v] = sum_u a[u] S[u,v]
//   exponentiation  out[v] = sum_u a[u] S[u,v]^gamma
//   anchor          out[v] = mean over the anchor_count strongest u of S[u,v]
// The result is min-max normalized. Reductions run over u in ascending order.
ScoreMap interact(const ScoreMap& cross, const FusedSelfAttention& prior, const InteractionConfig& config);

// interact without the final normalization.
ScoreMap interact_raw(const ScoreMap& cross, const FusedSelfAttention& prior, const InteractionConfig& config);

}  // namespace groundattn
