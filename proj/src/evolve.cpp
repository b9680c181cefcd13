#include "groundattn/evolve.hpp"

#include <string>

#include "groundattn/error.hpp"
#include "groundattn/topk.hpp"

namespace groundattn {

std::string_view to_string(SeedSource s) {
  return s == SeedSource::kInteractionMap ? "interaction_map" : "cross_map";
}

SeedSource parse_seed_source(std::string_view text) {
  if (text == "interaction_map") return SeedSource::kInteractionMap;
  if (text == "cross_map") return SeedSource::kCrossMap;
  throw Error(ErrorCode::kInvalidArgument, "unknown seed source '" + std::string(text) + "'");
}

void EvolveConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "tau must lie in [0, 1]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
}

SeedSet select_seeds(const ScoreMap& map, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  auto flat = top_k_positive(map.values(), static_cast<std::size_t>(k));
  if (flat.empty()) throw Error(ErrorCode::kEmptyMap, "no positive cell to seed from");
  SeedSet seeds;
  seeds.positions.reserve(flat.size());
  for (std::size_t i : flat) seeds.positions.push_back({i / map.cols(), i % map.cols()});
  return seeds;
}

ScoreMap grow(const ScoreMap& map, const SeedSet& seeds, double tau) {
  const std::size_t rows = map.rows();
  const std::size_t cols = map.cols();
  ScoreMap out(rows, cols, 0.0);
  std::vector<std::uint8_t> visited(map.size(), 0);
  std::vector<std::size_t> stack;

  for (const Pixel& seed : seeds.positions) {
    if (seed.row >= rows || seed.col >= cols) {
      throw Error(ErrorCode::kInvalidArgument, "seed outside the map");
    }
    const std::size_t start = seed.row * cols + seed.col;
    if (visited[start] || !(map[start] >= tau)) continue;
    visited[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      out[cur] = map[cur];
      const std::size_t r = cur / cols;
      const std::size_t c = cur % cols;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if ((dr < 0 && r == 0) || (dc < 0 && c == 0)) continue;
          const std::size_t nr = r + static_cast<std::size_t>(dr);
          const std::size_t nc = c + static_cast<std::size_t>(dc);
          if (nr >= rows || nc >= cols) continue;
          const std::size_t next = nr * cols + nc;
          if (visited[next] || !(map[next] >= tau)) continue;
          visited[next] = 1;
          stack.push_back(next);
        }
      }
    }
  }
  return out;
}

BinaryMask binarize(const ScoreMap& map, double alpha) {
  BinaryMask mask(map.rows(), map.cols(), 0);
  for (std::size_t i = 0; i < map.size(); ++i) mask[i] = map[i] > alpha ? 1 : 0;
  return mask;
}

BinaryMask resize_nearest(const BinaryMask& mask, std::size_t rows, std::size_t cols) {
  if (mask.empty() || rows == 0 || cols == 0) throw Error(ErrorCode::kInvalidArgument, "cannot resize an empty mask");
  BinaryMask out(rows, cols, 0);
  for (std::size_t y = 0; y < rows; ++y) {
    const std::size_t sy = y * mask.rows() / rows;
    for (std::size_t x = 0; x < cols; ++x) out(y, x) = mask(sy, x * mask.cols() / cols);
  }
  return out;
}

}  // namespace groundattn
