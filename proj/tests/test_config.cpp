#include <fstream>

#include "doctest.h"
#include "groundattn/config.hpp"
#include "groundattn/error.hpp"
#include "support.hpp"

using namespace groundattn;

TEST_CASE("defaults") {
  GroundingConfig c;
  CHECK(c.pipeline.evolve.k == 7);
  CHECK(c.pipeline.evolve.tau == 0.3);
  CHECK(c.pipeline.evolve.alpha == 0.4);
  CHECK(c.pipeline.interaction.strategy == Strategy::kSimilarity);
  CHECK(c.pipeline.interaction.gamma == 2.0);
  CHECK(c.pipeline.interaction.anchor_count == 7);
  CHECK(c.pipeline.order == StageOrder::kOFE);
  CHECK(c.pipeline.resolutions == std::vector<int>{32, 64});
  CHECK(c.pipeline.use_evolve);
  CHECK(c.box_mode == BoxMode::kLargestComponent);
}

TEST_CASE("every key is settable") {
  GroundingConfig c;
  apply_setting(c, "k", "3");
  apply_setting(c, " tau ", " 0.25");
  apply_setting(c, "alpha", "0.5");
  apply_setting(c, "gamma", "3");
  apply_setting(c, "anchor_count", "4");
  apply_setting(c, "strategy", "anchor");
  apply_setting(c, "similarity_axis", "row");
  apply_setting(c, "stage_order", "oef");
  apply_setting(c, "seed_source", "cross_map");
  apply_setting(c, "box_mode", "tight_all");
  apply_setting(c, "evolve", "false");
  apply_setting(c, "resolutions", "16, 64");
  apply_setting(c, "target_resolution", "32");
  CHECK(c.pipeline.evolve.k == 3);
  CHECK(c.pipeline.evolve.tau == 0.25);
  CHECK(c.pipeline.evolve.alpha == 0.5);
  CHECK(c.pipeline.interaction.gamma == 3.0);
  CHECK(c.pipeline.interaction.anchor_count == 4);
  CHECK(c.pipeline.interaction.strategy == Strategy::kAnchor);
  CHECK(c.pipeline.interaction.similarity_axis == SimilarityAxis::kRow);
  CHECK(c.pipeline.order == StageOrder::kOEF);
  CHECK(c.pipeline.evolve.seed_source == SeedSource::kCrossMap);
  CHECK(c.box_mode == BoxMode::kTightAll);
  CHECK_FALSE(c.pipeline.use_evolve);
  CHECK(c.pipeline.resolutions == std::vector<int>{16, 64});
  CHECK(c.pipeline.target_resolution == 32);

  apply_setting(c, "resolutions", "all");
  CHECK(c.pipeline.resolutions.empty());
}

TEST_CASE("bad settings are rejected") {
  GroundingConfig c;
  CHECK_THROWS_AS(apply_setting(c, "kk", "3"), Error);
  CHECK_THROWS_AS(apply_setting(c, "k", "3.5"), Error);
  CHECK_THROWS_AS(apply_setting(c, "tau", "abc"), Error);
  CHECK_THROWS_AS(apply_setting(c, "tau", "0.3x"), Error);
  CHECK_THROWS_AS(apply_setting(c, "evolve", "maybe"), Error);
  CHECK_THROWS_AS(apply_setting(c, "resolutions", "32,,64"), Error);
  CHECK_THROWS_AS(apply_setting(c, "resolutions", "-16"), Error);
  CHECK_THROWS_AS(apply_setting(c, "strategy", "cosine"), Error);
}

TEST_CASE("config file and describe round trip") {
  support::TempDir dir("config");
  {
    std::ofstream out(dir / "a.conf");
    out << "# ablation\n\nstrategy = multiplication\ntau=0.2\n  resolutions = 16,32\n";
  }
  GroundingConfig c;
  apply_config_file(c, dir / "a.conf");
  CHECK(c.pipeline.interaction.strategy == Strategy::kMultiplication);
  CHECK(c.pipeline.evolve.tau == 0.2);
  CHECK(c.pipeline.resolutions == std::vector<int>{16, 32});

  {
    std::ofstream out(dir / "b.conf");
    out << describe(c);
  }
  GroundingConfig back;
  apply_config_file(back, dir / "b.conf");
  CHECK(describe(back) == describe(c));
  CHECK(back.pipeline.evolve.tau == c.pipeline.evolve.tau);

  {
    std::ofstream out(dir / "bad.conf");
    out << "strategy multiplication\n";
  }
  CHECK_THROWS_WITH_AS(apply_config_file(c, dir / "bad.conf"), doctest::Contains("bad.conf:1"), Error);
  CHECK_THROWS_AS(apply_config_file(c, dir / "absent.conf"), Error);
}
