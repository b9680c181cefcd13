#include <cmath>
#include <random>

#include "doctest.h"
#include "groundattn/error.hpp"
#include "groundattn/focus.hpp"
#include "groundattn/overview.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace groundattn;

namespace {

FusedSelfAttention prior_of(AttentionMatrix m) { return FusedSelfAttention{std::move(m)}; }

InteractionConfig with(Strategy s) {
  InteractionConfig c;
  c.strategy = s;
  return c;
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Straight from the definitions, column v of S is S[u][v] over u.
std::vector<double> naive_interaction(const ScoreMap& a, const AttentionMatrix& s, const InteractionConfig& cfg) {
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  std::vector<std::size_t> anchors;
  if (cfg.strategy == Strategy::kAnchor) {
    anchors = oracle::sorted_top_k(std::vector<double>(a.values().begin(), a.values().end()),
                                   static_cast<std::size_t>(cfg.anchor_count));
  }
  for (std::size_t v = 0; v < n; ++v) {
    double acc = 0.0, na = 0.0, ns = 0.0;
    switch (cfg.strategy) {
      case Strategy::kSimilarity:
        for (std::size_t u = 0; u < n; ++u) {
          double sv = cfg.similarity_axis == SimilarityAxis::kColumn ? s.at(u, v) : s.at(v, u);
          acc += a[u] * sv;
          na += a[u] * a[u];
          ns += sv * sv;
        }
        out[v] = ns == 0.0 ? 0.0 : acc / (std::sqrt(na) * std::sqrt(ns));
        break;
      case Strategy::kMultiplication:
        for (std::size_t u = 0; u < n; ++u) acc += a[u] * s.at(u, v);
        out[v] = acc;
        break;
      case Strategy::kExponentiation:
        for (std::size_t u = 0; u < n; ++u) acc += a[u] * std::pow(static_cast<double>(s.at(u, v)), cfg.gamma);
        out[v] = acc;
        break;
      case Strategy::kAnchor:
        for (std::size_t u : anchors) acc += s.at(u, v);
        out[v] = acc / static_cast<double>(anchors.size());
        break;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("fusion of a single layer at the target is the identity") {
  std::mt19937_64 rng(21);
  AttentionMatrix layer = support::random_stochastic(rng, 4);
  SelfAttentionStack stack{{layer}};
  CHECK(fuse_self_attention(stack, 4).matrix.weights == layer.weights);
  CHECK(resize_attention(layer, 4).weights == layer.weights);
}

TEST_CASE("two identical layers fuse to that layer") {
  std::mt19937_64 rng(22);
  AttentionMatrix layer = support::random_stochastic(rng, 4);
  SelfAttentionStack stack{{layer, layer}};
  stack.layers[1].resolution = 4;
  // Duplicate resolutions are a stack-level invariant; fusion itself only averages.
  CHECK(fuse_self_attention(stack, 4).matrix.weights == layer.weights);
}

TEST_CASE("fusion matches the 4-loop oracle and stays row-stochastic") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<AttentionMatrix> layers = {support::random_stochastic(rng, 2), support::random_stochastic(rng, 4),
                                           support::random_stochastic(rng, 8)};
    for (std::size_t first = 0; first < 2; ++first) {
      std::vector<AttentionMatrix> used(layers.begin() + static_cast<long>(first), layers.end());
      FusedSelfAttention fused = fuse_self_attention(SelfAttentionStack{used}, 8);
      std::vector<double> want = oracle::fuse(used, 8);
      REQUIRE(fused.resolution() == 8);
      REQUIRE(fused.matrix.weights.size() == want.size());
      double worst = 0.0, worst_sum = 0.0;
      for (std::size_t u = 0; u < 64; ++u) {
        double sum = 0.0;
        for (std::size_t v = 0; v < 64; ++v) {
          sum += fused.matrix.at(u, v);
          worst = std::max(worst, std::abs(fused.matrix.at(u, v) - want[u * 64 + v]));
        }
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
      }
      CHECK(worst <= 1e-5);
      CHECK(worst_sum <= 1e-6);
    }
  }
}

TEST_CASE("fusion downsamples to a smaller target") {
  std::mt19937_64 rng(24);
  std::vector<AttentionMatrix> layers = {support::random_stochastic(rng, 8)};
  FusedSelfAttention fused = fuse_self_attention(SelfAttentionStack{layers}, 4);
  std::vector<double> want = oracle::fuse(layers, 4);
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(fused.matrix.weights[i] == doctest::Approx(want[i]).epsilon(1e-5));
}

TEST_CASE("fusion errors") {
  CHECK_THROWS_WITH_AS(fuse_self_attention(SelfAttentionStack{}, 8), doctest::Contains("EmptyStack"), Error);
  std::mt19937_64 rng(25);
  CHECK_THROWS_AS(fuse_self_attention(SelfAttentionStack{{support::random_stochastic(rng, 4)}}, 0), Error);
}

TEST_CASE("similarity against the identity prior is proportional to the map") {
  std::mt19937_64 rng(26);
  FusedSelfAttention id = prior_of(support::identity_attention(8));
  for (int trial = 0; trial < 20; ++trial) {
    ScoreMap a = normalize(support::random_map(rng, 8, 8));
    ScoreMap out = interact(a, id, with(Strategy::kSimilarity));
    CHECK(argmax(out.values()) == argmax(a.values()));
    ScoreMap raw = interact_raw(a, id, with(Strategy::kSimilarity));
    double norm = 0.0;
    for (double v : a.values()) norm += v * v;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(raw[i] == doctest::Approx(a[i] / norm).epsilon(1e-12));
  }
}

TEST_CASE("a uniform prior carries no signal") {
  AttentionMatrix s;
  s.resolution = 4;
  s.weights.assign(256, 1.0f / 16.0f);
  std::mt19937_64 rng(27);
  ScoreMap a = normalize(support::random_map(rng, 4, 4));
  CHECK(interact(a, prior_of(s), with(Strategy::kSimilarity)) == ScoreMap(4, 4, 0.0));
}

TEST_CASE("multiplication by hand on a 2x2 grid") {
  AttentionMatrix s;
  s.resolution = 2;
  s.weights = {.7f, .1f, .1f, .1f, .25f, .25f, .25f, .25f, .25f, .25f, .25f, .25f, .1f, .2f, .3f, .4f};
  ScoreMap a(2, 2, std::vector<double>{1, 0, 0, 0});
  ScoreMap raw = interact_raw(a, prior_of(s), with(Strategy::kMultiplication));
  CHECK(raw[0] == doctest::Approx(0.7));
  CHECK(raw[1] == doctest::Approx(0.1));
  CHECK(raw[2] == doctest::Approx(0.1));
  CHECK(raw[3] == doctest::Approx(0.1));
  CHECK(interact(a, prior_of(s), with(Strategy::kMultiplication)) == ScoreMap(2, 2, std::vector<double>{1, 0, 0, 0}));
}

TEST_CASE("every strategy matches its definition") {
  std::mt19937_64 rng(28);
  AttentionMatrix s = support::random_stochastic(rng, 6);
  ScoreMap a = normalize(support::random_map(rng, 6, 6));
  std::vector<InteractionConfig> configs;
  for (Strategy st : {Strategy::kSimilarity, Strategy::kMultiplication, Strategy::kExponentiation, Strategy::kAnchor}) {
    configs.push_back(with(st));
  }
  InteractionConfig rows = with(Strategy::kSimilarity);
  rows.similarity_axis = SimilarityAxis::kRow;
  configs.push_back(rows);
  InteractionConfig cube = with(Strategy::kExponentiation);
  cube.gamma = 3.0;
  configs.push_back(cube);
  InteractionConfig few = with(Strategy::kAnchor);
  few.anchor_count = 2;
  configs.push_back(few);

  for (const auto& cfg : configs) {
    CAPTURE(to_string(cfg.strategy));
    ScoreMap raw = interact_raw(a, prior_of(s), cfg);
    std::vector<double> want = naive_interaction(a, s, cfg);
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(raw[i] == doctest::Approx(want[i]).epsilon(1e-9));
    ScoreMap out = interact(a, prior_of(s), cfg);
    CHECK(out == normalize(raw));
  }
}

TEST_CASE("exponentiation with gamma 1 is multiplication exactly") {
  std::mt19937_64 rng(29);
  AttentionMatrix s = support::random_stochastic(rng, 5);
  ScoreMap a = normalize(support::random_map(rng, 5, 5));
  InteractionConfig e = with(Strategy::kExponentiation);
  e.gamma = 1.0;
  CHECK(interact_raw(a, prior_of(s), e) == interact_raw(a, prior_of(s), with(Strategy::kMultiplication)));
}

TEST_CASE("raw similarity lies in [0, 1]") {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 10; ++trial) {
    AttentionMatrix s = support::random_stochastic(rng, 4);
    ScoreMap raw = interact_raw(normalize(support::random_map(rng, 4, 4)), prior_of(s), with(Strategy::kSimilarity));
    for (double v : raw.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("interaction errors") {
  FusedSelfAttention id = prior_of(support::identity_attention(4));
  CHECK_THROWS_WITH_AS(interact(ScoreMap(4, 4, 0.0), id, with(Strategy::kSimilarity)),
                       doctest::Contains("AllZeroAttention"), Error);
  CHECK_THROWS_WITH_AS(interact(ScoreMap(8, 8, 1.0), id, with(Strategy::kSimilarity)),
                       doctest::Contains("ResolutionMismatch"), Error);
  InteractionConfig bad = with(Strategy::kExponentiation);
  bad.gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = with(Strategy::kAnchor);
  bad.anchor_count = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("strategy names") {
  for (Strategy s : {Strategy::kSimilarity, Strategy::kMultiplication, Strategy::kExponentiation, Strategy::kAnchor}) {
    CHECK(parse_strategy(to_string(s)) == s);
  }
  CHECK(parse_similarity_axis("row") == SimilarityAxis::kRow);
  CHECK_THROWS_AS(parse_strategy("dot"), Error);
}
