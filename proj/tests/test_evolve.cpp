#include <algorithm>
#include <random>

#include "doctest.h"
#include "groundattn/error.hpp"
#include "groundattn/evolve.hpp"
#include "groundattn/grounding.hpp"
#include "groundattn/topk.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace groundattn;

namespace {

std::set<std::size_t> support_of(const ScoreMap& m) {
  std::set<std::size_t> s;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] != 0.0) s.insert(i);
  }
  return s;
}

SeedSet random_seeds(std::mt19937_64& rng, std::size_t rows, std::size_t cols, int count) {
  SeedSet s;
  for (int i = 0; i < count; ++i) {
    s.positions.push_back({static_cast<std::size_t>(support::uniform_int(rng, 0, static_cast<int>(rows) - 1)),
                           static_cast<std::size_t>(support::uniform_int(rng, 0, static_cast<int>(cols) - 1))});
  }
  return s;
}

// Values drawn from a few levels so that ties are common.
ScoreMap coarse_map(std::mt19937_64& rng, std::size_t side) {
  ScoreMap m(side, side);
  for (auto& v : m.values()) v = support::uniform_int(rng, 0, 5) / 5.0;
  return m;
}

}  // namespace

TEST_CASE("seed order and tie break") {
  ScoreMap m(2, 2, std::vector<double>{0.9, 0.1, 0.5, 0.5});
  SeedSet s = select_seeds(m, 2);
  CHECK(s.positions == std::vector<Pixel>{{0, 0}, {1, 0}});
}

TEST_CASE("k beyond the positive count returns every positive cell") {
  ScoreMap m(2, 3, std::vector<double>{0.0, 0.2, 0.0, 0.7, 0.0, 0.2});
  SeedSet s = select_seeds(m, 50);
  CHECK(s.positions == std::vector<Pixel>{{1, 0}, {0, 1}, {1, 2}});
}

TEST_CASE("all-zero map has no seeds") {
  CHECK_THROWS_WITH_AS(select_seeds(ScoreMap(3, 3, 0.0), 7), doctest::Contains("EmptyMap"), Error);
}

TEST_CASE("top-k agrees with a full sort") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    ScoreMap m = trial % 2 ? coarse_map(rng, 16) : support::random_map(rng, 16, 16);
    std::size_t k = static_cast<std::size_t>(support::uniform_int(rng, 1, 20));
    std::vector<double> values(m.values().begin(), m.values().end());
    CHECK(top_k_positive(m.values(), k) == oracle::sorted_top_k(values, k));
  }
}

TEST_CASE("grow keeps a plateau around the seed") {
  ScoreMap m(6, 6, 0.0);
  for (std::size_t r = 1; r < 4; ++r) {
    for (std::size_t c = 2; c < 5; ++c) m(r, c) = 1.0;
  }
  CHECK(grow(m, SeedSet{{{2, 3}}}, 0.3) == m);
}

TEST_CASE("a sub-threshold seed grows nothing") {
  ScoreMap m(4, 4, 0.9);
  m(0, 0) = 0.2;
  CHECK(grow(m, SeedSet{{{0, 0}}}, 0.3) == ScoreMap(4, 4, 0.0));
}

TEST_CASE("only the seeded blob survives") {
  ScoreMap m(5, 7, 0.0);
  m(1, 1) = 0.8;
  m(2, 2) = 0.5;  // diagonal neighbour: 8-connected
  m(1, 5) = 0.9;
  ScoreMap g = grow(m, SeedSet{{{1, 1}}}, 0.3);
  CHECK(g(1, 1) == 0.8);
  CHECK(g(2, 2) == 0.5);
  CHECK(g(1, 5) == 0.0);
}

TEST_CASE("grow equals BFS reachability on random maps") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 300; ++trial) {
    ScoreMap m = trial % 3 == 0 ? coarse_map(rng, 16) : support::random_map(rng, 16, 16);
    SeedSet seeds = random_seeds(rng, 16, 16, support::uniform_int(rng, 1, 10));
    double tau = trial % 4 == 0 ? support::uniform(rng) : 0.3;
    ScoreMap g = grow(m, seeds, tau);
    std::set<std::size_t> want = oracle::bfs_reachable(m, seeds.positions, tau);
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(g[i] == (want.contains(i) ? m[i] : 0.0));
    }
  }
}

TEST_CASE("grow properties") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    ScoreMap m = support::random_map(rng, 12, 12);
    for (auto& v : m.values()) {
      if (v < 0.1) v = 0.0;
    }
    SeedSet seeds = random_seeds(rng, 12, 12, support::uniform_int(rng, 1, 6));
    const double tau = 0.3;
    ScoreMap g = grow(m, seeds, tau);

    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g[i] != 0.0) CHECK(m[i] >= tau);
    }
    CHECK(support_of(grow(g, seeds, tau)) == support_of(g));

    SeedSet reversed = seeds;
    std::reverse(reversed.positions.begin(), reversed.positions.end());
    CHECK(grow(m, reversed, tau) == g);

    std::set<std::size_t> lower = support_of(grow(m, seeds, 0.2));
    for (std::size_t i : support_of(g)) CHECK(lower.contains(i));

    // Each grown component contains a seed.
    BinaryMask fg(12, 12);
    for (std::size_t i = 0; i < g.size(); ++i) fg[i] = g[i] != 0.0;
    ComponentLabeling lab = label_components(fg);
    std::set<int> seeded;
    for (const Pixel& p : seeds.positions) {
      if (lab.labels(p.row, p.col) != 0) seeded.insert(lab.labels(p.row, p.col));
    }
    CHECK(seeded.size() == lab.components.size());
  }
}

TEST_CASE("binarize is strict and element-wise") {
  CHECK(binarize(ScoreMap(3, 3, 0.4), 0.4) == BinaryMask(3, 3, 0));
  ScoreMap b(1, 4, std::vector<double>{0, 1, 1, 0});
  CHECK(binarize(b, 0.4) == BinaryMask(1, 4, std::vector<std::uint8_t>{0, 1, 1, 0}));

  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    ScoreMap m = support::random_map(rng, 9, 11);
    double alpha = support::uniform(rng);
    BinaryMask got = binarize(m, alpha);
    BinaryMask higher = binarize(m, std::min(1.0, alpha + 0.1));
    for (std::size_t i = 0; i < m.size(); ++i) {
      CHECK(got[i] == (m[i] > alpha ? 1 : 0));
      CHECK(higher[i] <= got[i]);
    }
  }
}

TEST_CASE("nearest resize index mapping") {
  std::mt19937_64 rng(35);
  BinaryMask m = support::random_mask(rng, 7, 5, 0.5);
  for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{28, 20}, {13, 9}, {3, 2}, {7, 5}}) {
    BinaryMask out = resize_nearest(m, rows, cols);
    REQUIRE(out.rows() == rows);
    for (std::size_t y = 0; y < rows; ++y) {
      for (std::size_t x = 0; x < cols; ++x) CHECK(out(y, x) == m(y * 7 / rows, x * 5 / cols));
    }
  }
}

TEST_CASE("evolve config bounds") {
  EvolveConfig c;
  CHECK(c.k == 7);
  CHECK(c.tau == 0.3);
  CHECK(c.alpha == 0.4);
  CHECK(c.seed_source == SeedSource::kInteractionMap);
  c.validate();
  c.tau = 1.2;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EvolveConfig{};
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = EvolveConfig{};
  c.alpha = -0.1;
  CHECK_THROWS_AS(c.validate(), Error);
  CHECK(parse_seed_source(to_string(SeedSource::kCrossMap)) == SeedSource::kCrossMap);
}
