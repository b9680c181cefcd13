#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "groundattn/sample.hpp"
#include "groundattn/types.hpp"

// Synthetic attention fixtures with analytically known ground truth.
//
// Geometry is expressed in map-grid units (0 .. grid-1). A cell of a
// coarser grid with side n maps to coordinate index * (grid-1)/(n-1), the
// same corner alignment the resizers use, so every resolution sees the
// same shapes.
namespace groundattn::synth {

struct Disk {
  double row = 0.0;
  double col = 0.0;
  double radius = 1.0;
  double peak = 1.0;  // strength of the cross-attention it attracts
};

struct FixtureSpec {
  std::string sample_id = "fixture";
  std::string expression = "the object";
  int grid = 64;
  std::vector<int> resolutions = {16, 32, 64};
  int visual_grid = 16;
  int image_scale = 4;
  // Referred objects. Cross-attention lands on four points at 3/4 of the
  // radius along the diagonals ("corners"), not on the whole disk.
  std::vector<Disk> blobs;
  // Unreferred objects with a single bump of cross-attention on them.
  std::vector<Disk> distractors;
  double noise_level = 0.05;
  std::uint64_t seed = 42;
  int steps = 4;
  int heads = 4;
  int text_tokens = 12;
  // Side of the background blocks in the self-attention (grid units).
  int background_tile = 8;
};

struct Fixture {
  std::string sample_id;
  std::string expression;
  AttentionTrace trace;
  SelfAttentionStack stack;
  BinaryMask gt_map;   // grid x grid
  BinaryMask gt_mask;  // image resolution
  BBox gt_box;
  ImageSize image_size;
};

// Minimum clearance (grid cells) between the rims of any two disks.
inline constexpr double kMinGap = 2.0;

// Throws kFixtureSpec on an empty blob list, disks outside the grid, or
// disks closer than kMinGap.
void validate(const FixtureSpec& spec);

Fixture make_fixture(const FixtureSpec& spec);

// Writes a standard sample directory (manifest.json + NPY + PNG + box JSON).
std::filesystem::path write_fixture(const Fixture& fixture, const std::filesystem::path& dir);

// Randomized scene i of the standard suite: one referred blob, up to three
// distractors of mixed strength, noise 0.05. Pure function of (index, seed).
FixtureSpec standard_spec(int index, std::uint64_t seed = 42);
std::vector<FixtureSpec> standard_suite(int count = 50, std::uint64_t seed = 42);

}  // namespace groundattn::synth
