#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "groundattn/sample.hpp"
#include "groundattn/types.hpp"

namespace support {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("groundattn_" + name + "_" + std::to_string(rd()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& child) const { return path_ / child; }

 private:
  fs::path path_;
};

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline groundattn::ScoreMap random_map(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  groundattn::ScoreMap m(rows, cols);
  for (auto& v : m.values()) v = uniform(rng);
  return m;
}

inline groundattn::BinaryMask random_mask(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double p) {
  groundattn::BinaryMask m(rows, cols);
  for (auto& v : m.values()) v = uniform(rng) < p ? 1 : 0;
  return m;
}

inline groundattn::AttentionMatrix random_stochastic(std::mt19937_64& rng, int r) {
  groundattn::AttentionMatrix a;
  a.resolution = r;
  const std::size_t n = a.side();
  a.weights.resize(n * n);
  for (std::size_t u = 0; u < n; ++u) {
    double sum = 0.0;
    std::vector<double> row(n);
    for (auto& v : row) {
      v = uniform(rng);
      sum += v;
    }
    for (std::size_t v = 0; v < n; ++v) a.weights[u * n + v] = static_cast<float>(row[v] / sum);
  }
  return a;
}

inline groundattn::AttentionMatrix identity_attention(int r) {
  groundattn::AttentionMatrix a;
  a.resolution = r;
  const std::size_t n = a.side();
  a.weights.assign(n * n, 0.0f);
  for (std::size_t u = 0; u < n; ++u) a.weights[u * n + u] = 1.0f;
  return a;
}

// Trace whose visual slice is `visual` for every (t, h) row, scaled so the
// row holds `mass` on the visual tokens; text tokens split the remainder.
inline groundattn::AttentionTrace trace_from_map(const groundattn::ScoreMap& visual, std::size_t steps,
                                                 std::size_t heads, std::size_t text_tokens = 4) {
  groundattn::AttentionTrace t;
  const std::size_t nv = visual.size();
  const std::size_t n = nv + text_tokens;
  t.weights = groundattn::Tensor({steps, heads, n});
  t.visual_begin = text_tokens / 2;
  t.visual_end = t.visual_begin + nv;
  t.visual_rows = visual.rows();
  t.visual_cols = visual.cols();
  double total = 0.0;
  for (double v : visual.values()) total += v;
  const double scale = total > 0.0 ? 0.5 / total : 0.0;
  for (std::size_t row = 0; row < steps * heads; ++row) {
    float* w = t.weights.data.data() + row * n;
    for (std::size_t i = 0; i < text_tokens; ++i) {
      std::size_t token = i < t.visual_begin ? i : i + nv;
      w[token] = static_cast<float>(0.4 / static_cast<double>(text_tokens));
    }
    for (std::size_t i = 0; i < nv; ++i) w[t.visual_begin + i] = static_cast<float>(visual[i] * scale);
  }
  return t;
}

inline groundattn::AttentionTrace random_trace(std::mt19937_64& rng, std::size_t steps, std::size_t heads,
                                               std::size_t grid_rows, std::size_t grid_cols,
                                               std::size_t text_tokens = 6) {
  groundattn::AttentionTrace t;
  const std::size_t nv = grid_rows * grid_cols;
  const std::size_t n = nv + text_tokens;
  t.weights = groundattn::Tensor({steps, heads, n});
  t.visual_begin = text_tokens / 2;
  t.visual_end = t.visual_begin + nv;
  t.visual_rows = grid_rows;
  t.visual_cols = grid_cols;
  for (std::size_t row = 0; row < steps * heads; ++row) {
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& v : w) {
      v = uniform(rng);
      sum += v;
    }
    for (std::size_t i = 0; i < n; ++i) t.weights.data[row * n + i] = static_cast<float>(w[i] / sum * 0.999);
  }
  return t;
}

}  // namespace support
