#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace groundattn {

// Flat indices of the k largest strictly positive values, largest first;
// equal values keep ascending index order (row-major for grids). Returns
// fewer than k indices when fewer values are positive.
std::vector<std::size_t> top_k_positive(std::span<const double> values, std::size_t k);

}  // namespace groundattn
