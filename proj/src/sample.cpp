#include "groundattn/sample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "groundattn/error.hpp"
#include "groundattn/npy.hpp"
#include "groundattn/png_io.hpp"
#include "json.hpp"

namespace groundattn {

namespace fs = std::filesystem;
using nlohmann::json;

bool is_supported_resolution(int r) { return r == 16 || r == 32 || r == 64; }

std::vector<int> SelfAttentionStack::resolutions() const {
  std::vector<int> out;
  out.reserve(layers.size());
  for (const auto& layer : layers) out.push_back(layer.resolution);
  return out;
}

const AttentionMatrix* SelfAttentionStack::find(int resolution) const {
  for (const auto& layer : layers) {
    if (layer.resolution == resolution) return &layer;
  }
  return nullptr;
}

void validate_trace(const AttentionTrace& trace) {
  const Tensor& w = trace.weights;
  if (w.rank() != 3) {
    throw Error(ErrorCode::kShapeMismatch, "attention trace must be (T, H, N), got rank " + std::to_string(w.rank()));
  }
  if (w.shape[0] == 0 || w.shape[1] == 0) throw Error(ErrorCode::kEmptyTrace, "trace has no steps or no heads");
  const std::size_t n = w.shape[2];
  if (!(trace.visual_begin < trace.visual_end && trace.visual_end <= n)) {
    std::ostringstream msg;
    msg << "visual span [" << trace.visual_begin << ", " << trace.visual_end << ") invalid for " << n << " tokens";
    throw Error(ErrorCode::kInvariantViolation, msg.str());
  }
  if (trace.visual_rows * trace.visual_cols != trace.visual_end - trace.visual_begin) {
    throw Error(ErrorCode::kInvariantViolation, "visual grid does not cover the visual span");
  }
  const std::size_t rows = w.shape[0] * w.shape[1];
  for (std::size_t r = 0; r < rows; ++r) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      float x = w.data[r * n + i];
      if (!std::isfinite(x)) throw Error(ErrorCode::kInvariantViolation, "non-finite attention");
      if (x < 0.0f) throw Error(ErrorCode::kInvariantViolation, "negative attention");
      sum += x;
    }
    if (sum > 1.0 + kRowSumTolerance) {
      std::ostringstream msg;
      msg << "attention row " << r << " sums to " << sum << " > 1";
      throw Error(ErrorCode::kInvariantViolation, msg.str());
    }
  }
}

void validate_attention(const AttentionMatrix& layer) {
  if (layer.resolution <= 0) throw Error(ErrorCode::kInvariantViolation, "resolution must be positive");
  const std::size_t side = layer.side();
  if (layer.weights.size() != side * side) {
    throw Error(ErrorCode::kShapeMismatch, "self-attention at resolution " + std::to_string(layer.resolution) +
                                               " must hold " + std::to_string(side * side) + " entries");
  }
  for (std::size_t u = 0; u < side; ++u) {
    double sum = 0.0;
    for (float x : layer.row(u)) {
      if (!std::isfinite(x)) throw Error(ErrorCode::kInvariantViolation, "non-finite self-attention");
      if (x < 0.0f) throw Error(ErrorCode::kInvariantViolation, "negative attention");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      std::ostringstream msg;
      msg << "self-attention row " << u << " at resolution " << layer.resolution << " sums to " << sum;
      throw Error(ErrorCode::kInvariantViolation, msg.str());
    }
  }
}

void validate_stack(const SelfAttentionStack& stack) {
  if (stack.layers.empty()) throw Error(ErrorCode::kEmptyStack, "self-attention stack is empty");
  std::set<int> seen;
  for (const auto& layer : stack.layers) {
    if (!seen.insert(layer.resolution).second) {
      throw Error(ErrorCode::kInvariantViolation, "duplicate resolution " + std::to_string(layer.resolution));
    }
    validate_attention(layer);
  }
}

namespace {

template <typename T>
T require(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) {
    throw Error(ErrorCode::kMalformedManifest, std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, std::string("field '") + key + "': " + e.what());
  }
}

std::optional<fs::path> optional_path(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw Error(ErrorCode::kMalformedManifest, std::string("field '") + key + "' must be a string");
  return fs::path(j.at(key).get<std::string>());
}

int parse_resolution(const std::string& key) {
  int value = 0;
  std::size_t used = 0;
  try {
    value = std::stoi(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || key.empty()) throw Error(ErrorCode::kUnknownResolution, "resolution key '" + key + "'");
  if (!is_supported_resolution(value)) {
    throw Error(ErrorCode::kUnknownResolution, "resolution " + key + " not in {16, 32, 64}");
  }
  return value;
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

AttentionMatrix load_layer(const fs::path& path, int resolution) {
  Tensor t = npy::read_tensor(path);
  const std::size_t r = static_cast<std::size_t>(resolution);
  const std::size_t side = r * r;
  bool flat = t.shape == std::vector<std::size_t>{side, side};
  bool grid = t.shape == std::vector<std::size_t>{r, r, r, r};
  if (!flat && !grid) {
    throw Error(ErrorCode::kShapeMismatch, path.filename().string() + " does not have shape (" +
                                               std::to_string(side) + ", " + std::to_string(side) + ")");
  }
  AttentionMatrix layer{resolution, std::move(t.data)};
  validate_attention(layer);
  return layer;
}

}  // namespace

Manifest read_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kMalformedManifest, "manifest must be a JSON object");

  Manifest m;
  m.sample_id = require<std::string>(j, "sample_id");
  try {
    int version = require<int>(j, "format_version");
    if (version != kFormatVersion) {
      throw Error(ErrorCode::kMalformedManifest, "unsupported format_version " + std::to_string(version));
    }
    auto size = require<std::vector<int>>(j, "image_size");
    if (size.size() != 2 || size[0] <= 0 || size[1] <= 0) {
      throw Error(ErrorCode::kMalformedManifest, "image_size must be [height, width] with positive entries");
    }
    m.image_size = {size[0], size[1]};
    m.expression = require<std::string>(j, "expression");
    m.cross_trace_path = require<std::string>(j, "cross_trace_path");

    auto span = require<std::vector<std::size_t>>(j, "visual_span");
    auto grid = require<std::vector<std::size_t>>(j, "visual_grid");
    if (span.size() != 2 || grid.size() != 2) {
      throw Error(ErrorCode::kMalformedManifest, "visual_span and visual_grid must have two entries");
    }
    m.visual_begin = span[0];
    m.visual_end = span[1];
    m.visual_rows = grid[0];
    m.visual_cols = grid[1];

    if (!j.contains("self_stack_paths") || !j.at("self_stack_paths").is_object()) {
      throw Error(ErrorCode::kMalformedManifest, "self_stack_paths must be an object");
    }
    for (const auto& [key, value] : j.at("self_stack_paths").items()) {
      int r = parse_resolution(key);
      if (!value.is_string()) throw Error(ErrorCode::kMalformedManifest, "self_stack_paths entries must be strings");
      if (!m.self_stack_paths.emplace(r, value.get<std::string>()).second) {
        throw Error(ErrorCode::kInvariantViolation, "duplicate resolution " + key);
      }
    }
    if (m.self_stack_paths.empty()) throw Error(ErrorCode::kEmptyStack, "self_stack_paths is empty");
    m.gt_mask_path = optional_path(j, "gt_mask_path");
    m.gt_box_path = optional_path(j, "gt_box_path");
  } catch (const Error& e) {
    throw e.with_sample(m.sample_id).with_stage("attnio");
  }
  return m;
}

void write_manifest(const Manifest& m, const fs::path& manifest_path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["sample_id"] = m.sample_id;
  j["image_size"] = {m.image_size.height, m.image_size.width};
  j["expression"] = m.expression;
  j["cross_trace_path"] = m.cross_trace_path.generic_string();
  j["visual_span"] = {m.visual_begin, m.visual_end};
  j["visual_grid"] = {m.visual_rows, m.visual_cols};
  json stack = json::object();
  for (const auto& [r, p] : m.self_stack_paths) stack[std::to_string(r)] = p.generic_string();
  j["self_stack_paths"] = stack;
  j["gt_mask_path"] = m.gt_mask_path ? json(m.gt_mask_path->generic_string()) : json(nullptr);
  j["gt_box_path"] = m.gt_box_path ? json(m.gt_box_path->generic_string()) : json(nullptr);
  std::ofstream out(manifest_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + manifest_path.string());
  out << j.dump(2) << "\n";
}

Sample load_sample(const fs::path& manifest_path, const LoadOptions& options) {
  Sample sample;
  sample.manifest = read_manifest(manifest_path);
  const Manifest& m = sample.manifest;
  const fs::path base = manifest_path.parent_path();

  try {
    sample.trace.weights = npy::read_tensor(resolve(base, m.cross_trace_path));
    sample.trace.visual_begin = m.visual_begin;
    sample.trace.visual_end = m.visual_end;
    sample.trace.visual_rows = m.visual_rows;
    sample.trace.visual_cols = m.visual_cols;
    validate_trace(sample.trace);
  } catch (const Error& e) {
    throw e.with_sample(m.sample_id).with_stage("overview");
  }

  try {
    for (int r : options.resolutions) {
      if (!m.self_stack_paths.contains(r)) {
        throw Error(ErrorCode::kUnknownResolution, "sample has no self-attention at resolution " + std::to_string(r));
      }
    }
    for (const auto& [r, p] : m.self_stack_paths) {
      if (!options.resolutions.empty() && !options.resolutions.contains(r)) continue;
      sample.stack.layers.push_back(load_layer(resolve(base, p), r));
    }
    validate_stack(sample.stack);
  } catch (const Error& e) {
    throw e.with_sample(m.sample_id).with_stage("focus");
  }

  if (options.ground_truth) {
    try {
      if (m.gt_mask_path) {
        BinaryMask mask = png::read_mask(resolve(base, *m.gt_mask_path));
        if (mask.rows() != static_cast<std::size_t>(m.image_size.height) ||
            mask.cols() != static_cast<std::size_t>(m.image_size.width)) {
          throw Error(ErrorCode::kShapeMismatch, "ground-truth mask size differs from image_size");
        }
        sample.ground_truth.mask = std::move(mask);
      }
      if (m.gt_box_path) {
        auto box = read_box(resolve(base, *m.gt_box_path));
        if (!box) throw Error(ErrorCode::kInvariantViolation, "ground-truth box is null");
        if (!box->valid() || box->x1 < 0 || box->y1 < 0 || box->x2 > m.image_size.width ||
            box->y2 > m.image_size.height) {
          throw Error(ErrorCode::kInvariantViolation, "ground-truth box outside the image or degenerate");
        }
        sample.ground_truth.box = box;
      }
    } catch (const Error& e) {
      throw e.with_sample(m.sample_id).with_stage("attnio");
    }
  }
  return sample;
}

fs::path write_sample(const fs::path& dir, const std::string& sample_id, ImageSize image_size,
                      const std::string& expression, const AttentionTrace& trace, const SelfAttentionStack& stack,
                      const GroundTruth& ground_truth) {
  fs::create_directories(dir);
  Manifest m;
  m.sample_id = sample_id;
  m.image_size = image_size;
  m.expression = expression;
  m.cross_trace_path = "cross_trace.npy";
  m.visual_begin = trace.visual_begin;
  m.visual_end = trace.visual_end;
  m.visual_rows = trace.visual_rows;
  m.visual_cols = trace.visual_cols;
  npy::write_tensor(trace.weights, dir / m.cross_trace_path);
  for (const auto& layer : stack.layers) {
    fs::path name = "self_attn_" + std::to_string(layer.resolution) + ".npy";
    auto side = layer.side();
    npy::write_tensor(Tensor({side, side}, layer.weights), dir / name);
    m.self_stack_paths[layer.resolution] = name;
  }
  if (ground_truth.mask) {
    m.gt_mask_path = "gt_mask.png";
    png::write_mask(*ground_truth.mask, dir / *m.gt_mask_path);
  }
  if (ground_truth.box) {
    m.gt_box_path = "gt_box.json";
    write_box(ground_truth.box, dir / *m.gt_box_path);
  }
  fs::path manifest_path = dir / "manifest.json";
  write_manifest(m, manifest_path);
  return manifest_path;
}

std::optional<BBox> read_box(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open box file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, path.filename().string() + ": " + e.what());
  }
  if (j.is_null()) return std::nullopt;
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCode::kMalformedManifest, path.filename().string() + ": box must be [x1, y1, x2, y2]");
  }
  try {
    return BBox{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, path.filename().string() + ": " + e.what());
  }
}

void write_box(const std::optional<BBox>& box, const fs::path& path) {
  json j = box ? json::array({box->x1, box->y1, box->x2, box->y2}) : json(nullptr);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump() << "\n";
}

}  // namespace groundattn
