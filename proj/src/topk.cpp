#include "groundattn/topk.hpp"

#include <algorithm>

namespace groundattn {

std::vector<std::size_t> top_k_positive(std::span<const double> values, std::size_t k) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > 0.0) candidates.push_back(i);
  }
  const std::size_t take = std::min(k, candidates.size());
  auto better = [&](std::size_t a, std::size_t b) {
    return values[a] > values[b] || (values[a] == values[b] && a < b);
  };
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                    better);
  candidates.resize(take);
  return candidates;
}

}  // namespace groundattn
