#include "groundattn/overview.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "groundattn/error.hpp"
#include "interp.hpp"

namespace groundattn {

ScoreMap normalize(const ScoreMap& map) {
  ScoreMap out(map.rows(), map.cols(), 0.0);
  if (map.empty()) return out;
  auto [lo, hi] = std::minmax_element(map.values().begin(), map.values().end());
  const double min = *lo;
  const double range = *hi - min;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < map.size(); ++i) out[i] = (map[i] - min) / range;
  return out;
}

ScoreMap aggregate_cross_attention(const AttentionTrace& trace) {
  if (trace.weights.rank() != 3) throw Error(ErrorCode::kShapeMismatch, "attention trace must be (T, H, N)");
  const std::size_t steps = trace.steps();
  const std::size_t heads = trace.heads();
  const std::size_t tokens = trace.tokens();
  if (steps == 0 || heads == 0) throw Error(ErrorCode::kEmptyTrace, "trace has no steps or no heads");
  const std::size_t begin = trace.visual_begin;
  const std::size_t count = trace.visual_end - trace.visual_begin;
  if (trace.visual_end > tokens || begin >= trace.visual_end || trace.visual_rows * trace.visual_cols != count) {
    throw Error(ErrorCode::kInvariantViolation, "visual span does not match the trace");
  }

  std::vector<double> step_mean(count);
  std::vector<double> total(count, 0.0);
  const float* w = trace.weights.data.data();
  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(step_mean.begin(), step_mean.end(), 0.0);
    for (std::size_t h = 0; h < heads; ++h) {
      const float* row = w + (t * heads + h) * tokens + begin;
      for (std::size_t i = 0; i < count; ++i) step_mean[i] += row[i];
    }
    for (std::size_t i = 0; i < count; ++i) total[i] += step_mean[i] / static_cast<double>(heads);
  }
  for (double& v : total) v /= static_cast<double>(steps);
  return normalize(ScoreMap(trace.visual_rows, trace.visual_cols, std::move(total)));
}

using detail::corner_aligned_taps;
using detail::lerp;

ScoreMap resize_bilinear(const ScoreMap& map, std::size_t rows, std::size_t cols) {
  if (map.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot resize an empty map");
  if (rows == 0 || cols == 0) throw Error(ErrorCode::kInvalidArgument, "target size must be positive");
  const auto ytaps = corner_aligned_taps(map.rows(), rows);
  const auto xtaps = corner_aligned_taps(map.cols(), cols);
  ScoreMap out(rows, cols);
  for (std::size_t y = 0; y < rows; ++y) {
    const detail::Tap& ty = ytaps[y];
    for (std::size_t x = 0; x < cols; ++x) {
      const detail::Tap& tx = xtaps[x];
      out(y, x) = lerp(lerp(map(ty.lo, tx.lo), map(ty.lo, tx.hi), tx.frac),
                       lerp(map(ty.hi, tx.lo), map(ty.hi, tx.hi), tx.frac), ty.frac);
    }
  }
  return out;
}

ScoreMap resize_map(const ScoreMap& map, int target) {
  if (target <= 0) throw Error(ErrorCode::kInvalidArgument, "target resolution must be positive");
  auto side = static_cast<std::size_t>(target);
  return normalize(resize_bilinear(map, side, side));
}

}  // namespace groundattn
