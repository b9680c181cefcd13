#pragma once

#include <cstddef>

#include "groundattn/sample.hpp"
#include "groundattn/types.hpp"

namespace groundattn {

// Min-max rescale to [0,1]. A constant map (including an all-zero one)
// becomes all zeros.
ScoreMap normalize(const ScoreMap& map);

// Sentence-level cross-attention: mean over heads, then over steps, of the
// visual-token slice of each attention row, reshaped row-major onto the
// visual grid and min-max normalized. Sums run over t, then h, in order.
ScoreMap aggregate_cross_attention(const AttentionTrace& trace);

// Corner-aligned bilinear resampling (source coordinate = dst * (in-1)/(out-1)).
// No normalization.
ScoreMap resize_bilinear(const ScoreMap& map, std::size_t rows, std::size_t cols);

// resize_bilinear to target x target, then normalize.
ScoreMap resize_map(const ScoreMap& map, int target);

}  // namespace groundattn
