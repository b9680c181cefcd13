#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "groundattn/types.hpp"

// On-disk sample layout: one JSON manifest per sample plus NPY tensors and
// PNG/JSON ground truth. Relative paths in a manifest resolve against the
// manifest's own directory. See docs/interchange.md for the schema.
namespace groundattn {

inline constexpr int kFormatVersion = 1;
inline constexpr double kRowSumTolerance = 1e-4;

// Resolutions a diffusion U-Net exposes for self-attention.
bool is_supported_resolution(int r);

struct ImageSize {
  int height = 0;
  int width = 0;
  bool operator==(const ImageSize&) const = default;
};

struct Manifest {
  std::string sample_id;
  ImageSize image_size;
  std::string expression;
  std::filesystem::path cross_trace_path;
  std::size_t visual_begin = 0;
  std::size_t visual_end = 0;
  std::size_t visual_rows = 0;
  std::size_t visual_cols = 0;
  std::map<int, std::filesystem::path> self_stack_paths;
  std::optional<std::filesystem::path> gt_mask_path;
  std::optional<std::filesystem::path> gt_box_path;
};

// Raw VLM attention: weights is (T steps, H heads, N tokens); the visual
// tokens occupy [visual_begin, visual_end) laid out row-major over a
// visual_rows x visual_cols grid.
struct AttentionTrace {
  Tensor weights;
  std::size_t visual_begin = 0;
  std::size_t visual_end = 0;
  std::size_t visual_rows = 0;
  std::size_t visual_cols = 0;

  std::size_t steps() const { return weights.rank() == 3 ? weights.shape[0] : 0; }
  std::size_t heads() const { return weights.rank() == 3 ? weights.shape[1] : 0; }
  std::size_t tokens() const { return weights.rank() == 3 ? weights.shape[2] : 0; }
};

// Diffusion self-attention, already averaged over heads and timesteps,
// one entry per resolution, sorted by ascending resolution.
struct SelfAttentionStack {
  std::vector<AttentionMatrix> layers;

  std::vector<int> resolutions() const;
  const AttentionMatrix* find(int resolution) const;
};

struct GroundTruth {
  std::optional<BinaryMask> mask;
  std::optional<BBox> box;
};

struct Sample {
  Manifest manifest;
  AttentionTrace trace;
  SelfAttentionStack stack;
  GroundTruth ground_truth;
};

struct LoadOptions {
  // Only these resolutions are read from disk; empty means all of them.
  std::set<int> resolutions;
  bool ground_truth = true;
};

// Structural and numeric checks; throw kInvariantViolation/kShapeMismatch.
void validate_trace(const AttentionTrace& trace);
void validate_attention(const AttentionMatrix& layer);
void validate_stack(const SelfAttentionStack& stack);

Manifest read_manifest(const std::filesystem::path& manifest_path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& manifest_path);

// Errors carry the sample id and the stage that owns the failing file:
// "overview" for the trace, "focus" for self-attention, "attnio" otherwise.
Sample load_sample(const std::filesystem::path& manifest_path, const LoadOptions& options = {});

// Writes tensors, ground truth and manifest.json into `dir` using the
// standard file names and returns the manifest path.
std::filesystem::path write_sample(const std::filesystem::path& dir, const std::string& sample_id,
                                   ImageSize image_size, const std::string& expression,
                                   const AttentionTrace& trace, const SelfAttentionStack& stack,
                                   const GroundTruth& ground_truth);

// Box files hold `[x1, y1, x2, y2]` or `null` for an empty prediction.
std::optional<BBox> read_box(const std::filesystem::path& path);
void write_box(const std::optional<BBox>& box, const std::filesystem::path& path);

}  // namespace groundattn
