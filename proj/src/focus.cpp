#include "groundattn/focus.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "groundattn/error.hpp"
#include "groundattn/overview.hpp"
#include "groundattn/topk.hpp"
#include "interp.hpp"

namespace groundattn {

using detail::corner_aligned_taps;
using detail::lerp;

void InteractionConfig::validate() const {
  if (!(gamma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "gamma must be > 0");
  if (anchor_count < 1) throw Error(ErrorCode::kInvalidArgument, "anchor_count must be >= 1");
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kSimilarity: return "similarity";
    case Strategy::kAnchor: return "anchor";
    case Strategy::kMultiplication: return "multiplication";
    case Strategy::kExponentiation: return "exponentiation";
  }
  return "similarity";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "similarity") return Strategy::kSimilarity;
  if (text == "anchor") return Strategy::kAnchor;
  if (text == "multiplication") return Strategy::kMultiplication;
  if (text == "exponentiation") return Strategy::kExponentiation;
  throw Error(ErrorCode::kInvalidArgument, "unknown strategy '" + std::string(text) + "'");
}

std::string_view to_string(SimilarityAxis a) { return a == SimilarityAxis::kColumn ? "column" : "row"; }

SimilarityAxis parse_similarity_axis(std::string_view text) {
  if (text == "column") return SimilarityAxis::kColumn;
  if (text == "row") return SimilarityAxis::kRow;
  throw Error(ErrorCode::kInvalidArgument, "unknown similarity axis '" + std::string(text) + "'");
}

namespace {

// Every source query row resampled over the key grid: (r*r) x (R*R).
std::vector<double> resize_keys(const AttentionMatrix& layer, std::size_t target) {
  const auto r = static_cast<std::size_t>(layer.resolution);
  const std::size_t src_side = r * r;
  const std::size_t dst_side = target * target;
  const auto taps = corner_aligned_taps(r, target);
  std::vector<double> out(src_side * dst_side);
  for (std::size_t q = 0; q < src_side; ++q) {
    const float* src = layer.weights.data() + q * src_side;
    double* dst = out.data() + q * dst_side;
    for (std::size_t y = 0; y < target; ++y) {
      const auto& ty = taps[y];
      for (std::size_t x = 0; x < target; ++x) {
        const auto& tx = taps[x];
        dst[y * target + x] = lerp(lerp(src[ty.lo * r + tx.lo], src[ty.lo * r + tx.hi], tx.frac),
                                   lerp(src[ty.hi * r + tx.lo], src[ty.hi * r + tx.hi], tx.frac), ty.frac);
      }
    }
  }
  return out;
}

// Produces fused rows one query pixel at a time from one layer.
class LayerResampler {
 public:
  LayerResampler(const AttentionMatrix& layer, std::size_t target)
      : layer_(layer), target_(target), identity_(static_cast<std::size_t>(layer.resolution) == target) {
    if (!identity_) {
      keys_ = resize_keys(layer, target);
      taps_ = corner_aligned_taps(static_cast<std::size_t>(layer.resolution), target);
    }
  }

  // Writes the resampled, row-normalized attention of output query `u`.
  void row(std::size_t u, std::vector<double>& out) const {
    const std::size_t side = target_ * target_;
    if (identity_) {
      auto src = layer_.row(u);
      for (std::size_t v = 0; v < side; ++v) out[v] = src[v];
      return;
    }
    const auto r = static_cast<std::size_t>(layer_.resolution);
    const auto& ty = taps_[u / target_];
    const auto& tx = taps_[u % target_];
    const double* a = keys_.data() + (ty.lo * r + tx.lo) * side;
    const double* b = keys_.data() + (ty.lo * r + tx.hi) * side;
    const double* c = keys_.data() + (ty.hi * r + tx.lo) * side;
    const double* d = keys_.data() + (ty.hi * r + tx.hi) * side;
    double sum = 0.0;
    for (std::size_t v = 0; v < side; ++v) {
      out[v] = lerp(lerp(a[v], b[v], tx.frac), lerp(c[v], d[v], tx.frac), ty.frac);
      sum += out[v];
    }
    if (sum > 0.0) {
      for (std::size_t v = 0; v < side; ++v) out[v] /= sum;
    }
  }

 private:
  const AttentionMatrix& layer_;
  std::size_t target_;
  bool identity_;
  std::vector<double> keys_;
  std::vector<detail::Tap> taps_;
};

}  // namespace

AttentionMatrix resize_attention(const AttentionMatrix& layer, int target) {
  SelfAttentionStack single;
  single.layers.push_back(layer);
  return fuse_self_attention(single, target).matrix;
}

FusedSelfAttention fuse_self_attention(const SelfAttentionStack& stack, int target) {
  if (stack.layers.empty()) throw Error(ErrorCode::kEmptyStack, "no self-attention layers to fuse");
  if (target <= 0) throw Error(ErrorCode::kInvalidArgument, "target resolution must be positive");
  const auto R = static_cast<std::size_t>(target);
  const std::size_t side = R * R;
  for (const auto& layer : stack.layers) {
    auto s = layer.side();
    if (layer.resolution <= 0 || layer.weights.size() != s * s) {
      throw Error(ErrorCode::kShapeMismatch, "layer at resolution " + std::to_string(layer.resolution) +
                                                 " has the wrong number of entries");
    }
  }

  std::vector<LayerResampler> resamplers;
  resamplers.reserve(stack.layers.size());
  for (const auto& layer : stack.layers) resamplers.emplace_back(layer, R);

  const double count = static_cast<double>(stack.layers.size());
  FusedSelfAttention fused{AttentionMatrix{target, std::vector<float>(side * side)}};
  std::vector<double> row(side);
  std::vector<double> acc(side);
  for (std::size_t u = 0; u < side; ++u) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& resampler : resamplers) {
      resampler.row(u, row);
      for (std::size_t v = 0; v < side; ++v) acc[v] += row[v];
    }
    float* dst = fused.matrix.weights.data() + u * side;
    for (std::size_t v = 0; v < side; ++v) dst[v] = static_cast<float>(acc[v] / count);
  }
  return fused;
}

ScoreMap interact_raw(const ScoreMap& cross, const FusedSelfAttention& prior, const InteractionConfig& config) {
  config.validate();
  const auto R = static_cast<std::size_t>(prior.resolution());
  if (cross.rows() != R || cross.cols() != R) {
    throw Error(ErrorCode::kResolutionMismatch, "cross-attention is " + std::to_string(cross.rows()) + "x" +
                                                    std::to_string(cross.cols()) + ", prior is " +
                                                    std::to_string(R) + "x" + std::to_string(R));
  }
  const std::size_t side = R * R;
  if (prior.matrix.weights.size() != side * side) {
    throw Error(ErrorCode::kShapeMismatch, "structural prior has the wrong number of entries");
  }
  auto a = cross.values();
  bool any = false;
  for (double x : a) any = any || x != 0.0;
  if (!any) throw Error(ErrorCode::kAllZeroAttention, "cross-attention map is all zeros");

  const float* S = prior.matrix.weights.data();
  std::vector<double> out(side, 0.0);

  switch (config.strategy) {
    case Strategy::kSimilarity: {
      double a_sq = 0.0;
      for (double x : a) a_sq += x * x;
      const double a_norm = std::sqrt(a_sq);
      std::vector<double> s_sq(side, 0.0);
      if (config.similarity_axis == SimilarityAxis::kColumn) {
        for (std::size_t u = 0; u < side; ++u) {
          const float* row = S + u * side;
          const double au = a[u];
          for (std::size_t v = 0; v < side; ++v) {
            const double s = row[v];
            out[v] += au * s;
            s_sq[v] += s * s;
          }
        }
      } else {
        for (std::size_t u = 0; u < side; ++u) {
          const float* row = S + u * side;
          double dot = 0.0;
          double sq = 0.0;
          for (std::size_t v = 0; v < side; ++v) {
            const double s = row[v];
            dot += a[v] * s;
            sq += s * s;
          }
          out[u] = dot;
          s_sq[u] = sq;
        }
      }
      for (std::size_t v = 0; v < side; ++v) {
        const double denom = a_norm * std::sqrt(s_sq[v]);
        out[v] = denom > 0.0 ? out[v] / denom : 0.0;
      }
      break;
    }
    case Strategy::kMultiplication:
    case Strategy::kExponentiation: {
      const bool power = config.strategy == Strategy::kExponentiation;
      for (std::size_t u = 0; u < side; ++u) {
        const double au = a[u];
        if (au == 0.0) continue;
        const float* row = S + u * side;
        for (std::size_t v = 0; v < side; ++v) {
          const double s = row[v];
          out[v] += au * (power ? std::pow(s, config.gamma) : s);
        }
      }
      break;
    }
    case Strategy::kAnchor: {
      auto anchors = top_k_positive(a, static_cast<std::size_t>(config.anchor_count));
      for (std::size_t u : anchors) {
        const float* row = S + u * side;
        for (std::size_t v = 0; v < side; ++v) out[v] += row[v];
      }
      for (double& x : out) x /= static_cast<double>(anchors.size());
      break;
    }
  }
  return ScoreMap(R, R, std::move(out));
}

ScoreMap interact(const ScoreMap& cross, const FusedSelfAttention& prior, const InteractionConfig& config) {
  return normalize(interact_raw(cross, prior, config));
}

}  // namespace groundattn
