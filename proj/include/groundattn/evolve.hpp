#pragma once

#include <string_view>
#include <vector>

#include "groundattn/types.hpp"

namespace groundattn {

enum class SeedSource { kInteractionMap, kCrossMap };

std::string_view to_string(SeedSource s);
SeedSource parse_seed_source(std::string_view text);

struct EvolveConfig {
  int k = 7;
  double tau = 0.3;
  double alpha = 0.4;
  SeedSource seed_source = SeedSource::kInteractionMap;

  void validate() const;
};

struct SeedSet {
  std::vector<Pixel> positions;
};

// The k highest-valued positive cells, highest first, ties in row-major
// order. Throws kEmptyMap when no cell is positive.
SeedSet select_seeds(const ScoreMap& map, int k);

// Keeps map values on cells reachable from a seed through 8-connected cells
// whose value is >= tau and zeroes everything else. A seed below tau
// contributes nothing.
ScoreMap grow(const ScoreMap& map, const SeedSet& seeds, double tau);

// Foreground where value > alpha (strict).
BinaryMask binarize(const ScoreMap& map, double alpha);

// Nearest-neighbour resampling: output (y, x) takes input
// (floor(y * in_rows / rows), floor(x * in_cols / cols)).
BinaryMask resize_nearest(const BinaryMask& mask, std::size_t rows, std::size_t cols);

}  // namespace groundattn
