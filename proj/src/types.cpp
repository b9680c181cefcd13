#include "groundattn/types.hpp"

#include <algorithm>
#include <cstring>
#include <functional>
#include <numeric>

namespace groundattn {

namespace {
std::size_t product(const std::vector<std::size_t>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}
}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims) : shape(std::move(dims)), data(product(shape), 0.0f) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<float> values)
    : shape(std::move(dims)), data(std::move(values)) {
  data.resize(product(shape), 0.0f);
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape || a.data.size() != b.data.size()) return false;
  return a.data.empty() ||
         std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

std::size_t foreground_count(const BinaryMask& mask) {
  auto v = mask.values();
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](std::uint8_t x) { return x != 0; }));
}

}  // namespace groundattn
