#include <fstream>

#include "doctest.h"
#include "groundattn/error.hpp"
#include "groundattn/evolve.hpp"
#include "groundattn/grounding.hpp"
#include "groundattn/metrics.hpp"
#include "groundattn/npy.hpp"
#include "groundattn/pipeline.hpp"
#include "groundattn/synth.hpp"
#include "support.hpp"

using namespace groundattn;
using synth::Disk;
using synth::FixtureSpec;

namespace {

FixtureSpec single_blob(double radius, double row = 30.0, double col = 33.0) {
  FixtureSpec s;
  s.blobs = {Disk{row, col, radius, 1.0}};
  s.noise_level = 0.0;
  return s;
}

PipelineConfig defaults_with(std::vector<int> resolutions) {
  PipelineConfig c;
  c.resolutions = std::move(resolutions);
  return c;
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("spec validation") {
  FixtureSpec s;
  CHECK_THROWS_WITH_AS(synth::validate(s), doctest::Contains("FixtureSpec"), Error);
  s = single_blob(5.0);
  synth::validate(s);
  s.distractors = {Disk{30.0, 40.0, 2.0, 0.5}};  // rims touch
  CHECK_THROWS_AS(synth::validate(s), Error);
  s.distractors = {Disk{30.0, 33.0 + 5.0 + 2.0 + 1.0, 2.0, 0.5}};  // gap exactly 1 < kMinGap
  CHECK_THROWS_AS(synth::validate(s), Error);
  s.distractors = {Disk{30.0, 33.0 + 5.0 + 2.0 + synth::kMinGap, 2.0, 0.5}};
  synth::validate(s);
  s.distractors = {Disk{30.0, 70.0, 2.0, 0.5}};
  CHECK_THROWS_AS(synth::validate(s), Error);
}

TEST_CASE("fixture structure") {
  FixtureSpec s = synth::standard_spec(3);
  synth::Fixture fx = synth::make_fixture(s);
  validate_trace(fx.trace);
  validate_stack(fx.stack);
  CHECK(fx.stack.resolutions() == std::vector<int>{16, 32, 64});
  for (const auto& layer : fx.stack.layers) {
    for (std::size_t u = 0; u < layer.side(); ++u) {
      double sum = 0.0;
      for (float w : layer.row(u)) sum += w;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
  CHECK(fx.gt_mask == resize_nearest(fx.gt_map, 256, 256));
  CHECK(fx.gt_box == mask_to_box(fx.gt_mask, BoxMode::kTightAll));
  CHECK(fx.image_size == ImageSize{256, 256});

  // Ground-truth disk by direct evaluation.
  const Disk& b = s.blobs[0];
  for (std::size_t r = 0; r < 64; ++r) {
    for (std::size_t c = 0; c < 64; ++c) {
      bool in = std::hypot(r - b.row, c - b.col) <= b.radius;
      CHECK(fx.gt_map(r, c) == (in ? 1 : 0));
    }
  }
}

TEST_CASE("fixtures are pure functions of spec and seed") {
  FixtureSpec s = synth::standard_spec(7, 42);
  CHECK(synth::standard_spec(7, 42).blobs[0].radius == s.blobs[0].radius);
  synth::Fixture a = synth::make_fixture(s), b = synth::make_fixture(s);
  CHECK(bit_equal(a.trace.weights, b.trace.weights));
  CHECK(a.stack.layers[0].weights == b.stack.layers[0].weights);

  FixtureSpec other = s;
  other.seed = 43;
  CHECK_FALSE(bit_equal(synth::make_fixture(other).trace.weights, a.trace.weights));

  FixtureSpec small = s;
  small.resolutions = {16};
  support::TempDir dir("synthfiles");
  synth::Fixture fx = synth::make_fixture(small);
  synth::write_fixture(fx, dir / "one");
  synth::write_fixture(synth::make_fixture(small), dir / "two");
  for (const char* name : {"manifest.json", "cross_trace.npy", "self_attn_16.npy", "gt_mask.png", "gt_box.json"}) {
    CAPTURE(name);
    CHECK(read_bytes(dir / "one" / name) == read_bytes(dir / "two" / name));
  }
  Sample loaded = load_sample(dir / "one" / "manifest.json");
  CHECK(bit_equal(loaded.trace.weights, fx.trace.weights));
  CHECK(loaded.ground_truth.mask == fx.gt_mask);
  CHECK(loaded.ground_truth.box == fx.gt_box);
}

TEST_CASE("clean single blob is recovered exactly from the full-resolution prior") {
  for (double radius : {4.0, 5.0, 7.0, 8.5, 10.0, 12.0, 14.0}) {
    CAPTURE(radius);
    FixtureSpec s = single_blob(radius);
    s.resolutions = {64};
    synth::Fixture fx = synth::make_fixture(s);
    PipelineResult res = run_pipeline(fx.trace, fx.stack, defaults_with({64}));
    CHECK(res.mask == fx.gt_map);
  }
}

// The upsampled 32x32 layer blurs object edges by about one coarse cell, so
// recovery is near-exact rather than exact; for radii in the standard-suite
// range the loss stays small.
TEST_CASE("clean single blob with the default two-resolution prior") {
  for (double radius : {7.0, 8.5, 10.0, 12.0, 14.0}) {
    for (auto [row, col] : {std::pair{20.0, 22.0}, {25.5, 40.1}, {33.3, 27.7}}) {
      CAPTURE(radius);
      CAPTURE(row);
      FixtureSpec s = single_blob(radius, row, col);
      s.resolutions = {32, 64};
      synth::Fixture fx = synth::make_fixture(s);
      PipelineResult res = run_pipeline(fx.trace, fx.stack, PipelineConfig{});
      CHECK(mask_iou(res.mask, fx.gt_map) >= 0.95);
    }
  }
}

TEST_CASE("weak distractors do not change the mask") {
  FixtureSpec clean = single_blob(10.0, 22.0, 22.0);
  clean.noise_level = 0.05;
  clean.resolutions = {32, 64};
  FixtureSpec cluttered = clean;
  cluttered.distractors = {Disk{50.0, 12.0, 3.0, 0.15}, Disk{48.0, 50.0, 2.5, 0.2}, Disk{12.0, 52.0, 3.5, 0.1}};
  synth::Fixture a = synth::make_fixture(clean), b = synth::make_fixture(cluttered);
  PipelineResult ra = run_pipeline(a.trace, a.stack, PipelineConfig{});
  PipelineResult rb = run_pipeline(b.trace, b.stack, PipelineConfig{});
  // The distractors stay below the growth threshold once normalized.
  for (const Disk& d : cluttered.distractors) {
    CHECK(rb.interaction(static_cast<std::size_t>(d.row), static_cast<std::size_t>(d.col)) < 0.3);
  }
  CHECK(ra.mask == rb.mask);
}

TEST_CASE("standard suite is deterministic and valid") {
  auto suite = synth::standard_suite(50, 42);
  REQUIRE(suite.size() == 50);
  CHECK(suite[0].sample_id == "fixture_000");
  CHECK(suite[49].sample_id == "fixture_049");
  std::size_t distractors = 0;
  for (const auto& s : suite) {
    synth::validate(s);
    distractors += s.distractors.size();
  }
  CHECK(distractors > 0);
  auto again = synth::standard_suite(50, 42);
  for (std::size_t i = 0; i < suite.size(); ++i) {
    CHECK(again[i].blobs[0].row == suite[i].blobs[0].row);
    CHECK(again[i].distractors.size() == suite[i].distractors.size());
  }
}
