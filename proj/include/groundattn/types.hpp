#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace groundattn {

// Dense float32 tensor in C order; the unit of exchange with NPY files.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);
  Tensor(std::vector<std::size_t> dims, std::vector<float> values);

  std::size_t rank() const { return shape.size(); }
  std::size_t numel() const { return data.size(); }
};

// Same shape and same bytes, so NaN payloads and signed zeros count.
bool bit_equal(const Tensor& a, const Tensor& b);

// Row-major 2D grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  Grid(std::size_t rows, std::size_t cols, std::vector<T> values)
      : rows_(rows), cols_(cols), values_(std::move(values)) {
    values_.resize(rows_ * cols_);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  T& operator[](std::size_t flat) { return values_[flat]; }
  const T& operator[](std::size_t flat) const { return values_[flat]; }

  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> values_;
};

// A_C, A_CS and A_E are all score maps over the grid.
using ScoreMap = Grid<double>;

// 0 = background, 1 = foreground.
using BinaryMask = Grid<std::uint8_t>;

std::size_t foreground_count(const BinaryMask& mask);

struct Pixel {
  std::size_t row = 0;
  std::size_t col = 0;
  bool operator==(const Pixel&) const = default;
};

// Axis-aligned, half-open pixel box in image space.
struct BBox {
  int x1 = 0;
  int y1 = 0;
  int x2 = 0;
  int y2 = 0;

  long long area() const {
    return static_cast<long long>(x2 - x1) * static_cast<long long>(y2 - y1);
  }
  bool valid() const { return x1 < x2 && y1 < y2; }
  bool operator==(const BBox&) const = default;
};

// Square pixel-to-pixel attention at one grid resolution: weights is
// (r*r) x (r*r), row u is the distribution query pixel u pays over keys.
struct AttentionMatrix {
  int resolution = 0;
  std::vector<float> weights;

  std::size_t side() const { return static_cast<std::size_t>(resolution) * resolution; }
  float at(std::size_t query, std::size_t key) const { return weights[query * side() + key]; }
  std::span<const float> row(std::size_t query) const {
    return std::span<const float>(weights).subspan(query * side(), side());
  }
};

}  // namespace groundattn
