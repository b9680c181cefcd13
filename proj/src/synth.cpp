#include "groundattn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "groundattn/error.hpp"
#include "groundattn/evolve.hpp"
#include "groundattn/grounding.hpp"

namespace groundattn::synth {

namespace {

// mt19937_64 output is fixed by the standard; the conversion to [0,1) is
// done here because the standard distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(uniform() * (hi - lo + 1)); }

 private:
  std::mt19937_64 engine_;
};

double to_grid(int index, int side, int grid) {
  if (side <= 1) return 0.0;
  return static_cast<double>(index) * static_cast<double>(grid - 1) / static_cast<double>(side - 1);
}

bool inside(const Disk& d, double row, double col) {
  const double dr = row - d.row;
  const double dc = col - d.col;
  return dr * dr + dc * dc <= d.radius * d.radius;
}

double bump(double row, double col, double center_row, double center_col, double sigma) {
  const double dr = row - center_row;
  const double dc = col - center_col;
  return std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
}

// Base cross-attention on the visual grid, before noise.
double cross_signal(const FixtureSpec& spec, double row, double col) {
  double v = 0.0;
  constexpr double kDiag = 0.70710678118654752;
  for (const Disk& b : spec.blobs) {
    const double offset = 0.75 * b.radius * kDiag;
    const double sigma = std::max(1.5, 0.3 * b.radius);
    for (int k = 0; k < 4; ++k) {
      const double sr = (k & 1) ? 1.0 : -1.0;
      const double sc = (k & 2) ? 1.0 : -1.0;
      v += b.peak * bump(row, col, b.row + sr * offset, b.col + sc * offset, sigma);
    }
  }
  for (const Disk& d : spec.distractors) v += d.peak * bump(row, col, d.row, d.col, std::max(1.5, d.radius));
  return v;
}

// -1 for background, otherwise the index of the disk covering the point.
int owner(const std::vector<Disk>& disks, double row, double col) {
  for (std::size_t i = 0; i < disks.size(); ++i) {
    if (inside(disks[i], row, col)) return static_cast<int>(i);
  }
  return -1;
}

AttentionMatrix make_self_attention(const FixtureSpec& spec, const std::vector<Disk>& objects, int r) {
  const std::size_t side = static_cast<std::size_t>(r) * r;
  // Group id per pixel: objects first, then background tiles.
  std::vector<long> group(side);
  const long tiles_per_row = (spec.grid + spec.background_tile - 1) / spec.background_tile;
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      const double y = to_grid(i, r, spec.grid);
      const double x = to_grid(j, r, spec.grid);
      const int o = owner(objects, y, x);
      long g = 0;
      if (o >= 0) {
        g = o;
      } else {
        const long ty = static_cast<long>(y) / spec.background_tile;
        const long tx = static_cast<long>(x) / spec.background_tile;
        g = static_cast<long>(objects.size()) + ty * tiles_per_row + tx;
      }
      group[static_cast<std::size_t>(i) * r + j] = g;
    }
  }
  std::vector<std::size_t> members;
  std::vector<long> sizes;
  for (long g : group) {
    if (g >= static_cast<long>(sizes.size())) sizes.resize(g + 1, 0);
    ++sizes[g];
  }
  AttentionMatrix layer{r, std::vector<float>(side * side, 0.0f)};
  for (std::size_t u = 0; u < side; ++u) {
    const float w = static_cast<float>(1.0 / static_cast<double>(sizes[group[u]]));
    float* row = layer.weights.data() + u * side;
    for (std::size_t v = 0; v < side; ++v) {
      if (group[v] == group[u]) row[v] = w;
    }
  }
  return layer;
}

void check_disk(const Disk& d, int grid, const char* what) {
  if (!(d.radius > 0.0)) throw Error(ErrorCode::kFixtureSpec, std::string(what) + " radius must be positive");
  if (!(d.peak >= 0.0)) throw Error(ErrorCode::kFixtureSpec, std::string(what) + " peak must be non-negative");
  if (d.row < 0.0 || d.col < 0.0 || d.row > grid - 1 || d.col > grid - 1) {
    throw Error(ErrorCode::kFixtureSpec, std::string(what) + " center outside the grid");
  }
}

}  // namespace

void validate(const FixtureSpec& spec) {
  if (spec.blobs.empty()) throw Error(ErrorCode::kFixtureSpec, "at least one blob is required");
  if (spec.grid < 2 || spec.visual_grid < 2 || spec.image_scale < 1 || spec.background_tile < 1) {
    throw Error(ErrorCode::kFixtureSpec, "grid sizes must be >= 2 and scales >= 1");
  }
  if (spec.resolutions.empty()) throw Error(ErrorCode::kFixtureSpec, "no self-attention resolutions");
  for (int r : spec.resolutions) {
    if (r < 2) throw Error(ErrorCode::kFixtureSpec, "self-attention resolution must be >= 2");
  }
  if (spec.steps < 1 || spec.heads < 1 || spec.text_tokens < 0) {
    throw Error(ErrorCode::kFixtureSpec, "trace needs at least one step and one head");
  }
  if (!(spec.noise_level >= 0.0)) throw Error(ErrorCode::kFixtureSpec, "noise level must be non-negative");
  std::vector<Disk> all;
  for (const Disk& b : spec.blobs) {
    check_disk(b, spec.grid, "blob");
    all.push_back(b);
  }
  for (const Disk& d : spec.distractors) {
    check_disk(d, spec.grid, "distractor");
    all.push_back(d);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double dist = std::hypot(all[i].row - all[j].row, all[i].col - all[j].col);
      if (dist - all[i].radius - all[j].radius < kMinGap) {
        throw Error(ErrorCode::kFixtureSpec, "disks " + std::to_string(i) + " and " + std::to_string(j) +
                                                 " overlap or are closer than the minimum gap");
      }
    }
  }
}

Fixture make_fixture(const FixtureSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  Fixture fx;
  fx.sample_id = spec.sample_id;
  fx.expression = spec.expression;

  // Cross-attention trace.
  const auto g = static_cast<std::size_t>(spec.visual_grid);
  const std::size_t cells = g * g;
  std::vector<double> base(cells);
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      base[i * g + j] = cross_signal(spec, to_grid(static_cast<int>(i), spec.visual_grid, spec.grid),
                                     to_grid(static_cast<int>(j), spec.visual_grid, spec.grid));
    }
  }
  for (double& v : base) v += rng.uniform(0.0, spec.noise_level);

  const auto steps = static_cast<std::size_t>(spec.steps);
  const auto heads = static_cast<std::size_t>(spec.heads);
  const auto text = static_cast<std::size_t>(spec.text_tokens);
  const std::size_t prefix = text / 2;
  const std::size_t tokens = text + cells;
  constexpr double kVisualMass = 0.6;
  fx.trace.weights = Tensor({steps, heads, tokens});
  fx.trace.visual_begin = prefix;
  fx.trace.visual_end = prefix + cells;
  fx.trace.visual_rows = g;
  fx.trace.visual_cols = g;
  std::vector<double> row(cells);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t h = 0; h < heads; ++h) {
      double sum = 0.0;
      for (std::size_t i = 0; i < cells; ++i) {
        row[i] = base[i] * rng.uniform(0.9, 1.1);
        sum += row[i];
      }
      float* dst = fx.trace.weights.data.data() + (t * heads + h) * tokens;
      const double text_weight = text > 0 ? (1.0 - kVisualMass) / static_cast<double>(text) : 0.0;
      for (std::size_t i = 0; i < tokens; ++i) dst[i] = static_cast<float>(text_weight);
      for (std::size_t i = 0; i < cells; ++i) {
        dst[prefix + i] = sum > 0.0 ? static_cast<float>(kVisualMass * row[i] / sum) : 0.0f;
      }
    }
  }

  // Self-attention: uniform within each object, uniform within each
  // background tile otherwise.
  std::vector<Disk> objects = spec.blobs;
  objects.insert(objects.end(), spec.distractors.begin(), spec.distractors.end());
  std::vector<int> resolutions = spec.resolutions;
  std::sort(resolutions.begin(), resolutions.end());
  resolutions.erase(std::unique(resolutions.begin(), resolutions.end()), resolutions.end());
  for (int r : resolutions) fx.stack.layers.push_back(make_self_attention(spec, objects, r));

  // Ground truth.
  const auto R = static_cast<std::size_t>(spec.grid);
  fx.gt_map = BinaryMask(R, R, 0);
  for (std::size_t i = 0; i < R; ++i) {
    for (std::size_t j = 0; j < R; ++j) {
      fx.gt_map(i, j) = owner(spec.blobs, static_cast<double>(i), static_cast<double>(j)) >= 0 ? 1 : 0;
    }
  }
  const std::size_t pixels = R * static_cast<std::size_t>(spec.image_scale);
  fx.image_size = {static_cast<int>(pixels), static_cast<int>(pixels)};
  fx.gt_mask = resize_nearest(fx.gt_map, pixels, pixels);
  auto box = mask_to_box(fx.gt_mask, BoxMode::kTightAll);
  if (!box) throw Error(ErrorCode::kFixtureSpec, "blobs cover no grid cell");
  fx.gt_box = *box;
  return fx;
}

std::filesystem::path write_fixture(const Fixture& fixture, const std::filesystem::path& dir) {
  GroundTruth gt{fixture.gt_mask, fixture.gt_box};
  return write_sample(dir, fixture.sample_id, fixture.image_size, fixture.expression, fixture.trace, fixture.stack,
                      gt);
}

FixtureSpec standard_spec(int index, std::uint64_t seed) {
  Rng rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(index) + 1);
  FixtureSpec spec;
  char id[32];
  std::snprintf(id, sizeof(id), "fixture_%03d", index);
  spec.sample_id = id;
  spec.expression = "the object";
  spec.seed = seed + static_cast<std::uint64_t>(index);
  const double grid = spec.grid - 1;

  Disk blob;
  blob.radius = rng.uniform(7.0, 14.0);
  blob.peak = 1.0;
  const double margin = blob.radius + 2.0;
  blob.row = rng.uniform(margin, grid - margin);
  blob.col = rng.uniform(margin, grid - margin);
  spec.blobs.push_back(blob);

  const int distractors = rng.integer(0, 3);
  for (int n = 0; n < distractors; ++n) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      Disk d;
      d.radius = rng.uniform(1.5, 4.0);
      // One in three distractors is stronger than the referred object's
      // own corner response.
      d.peak = rng.uniform() < 1.0 / 3.0 ? rng.uniform(1.0, 1.4) : rng.uniform(0.3, 0.9);
      d.row = rng.uniform(d.radius, grid - d.radius);
      d.col = rng.uniform(d.radius, grid - d.radius);
      bool clear = true;
      for (const Disk& o : spec.blobs) clear = clear && std::hypot(o.row - d.row, o.col - d.col) - o.radius - d.radius >= kMinGap + 1.0;
      for (const Disk& o : spec.distractors) clear = clear && std::hypot(o.row - d.row, o.col - d.col) - o.radius - d.radius >= kMinGap + 1.0;
      if (clear) {
        spec.distractors.push_back(d);
        break;
      }
    }
  }
  return spec;
}

std::vector<FixtureSpec> standard_suite(int count, std::uint64_t seed) {
  std::vector<FixtureSpec> specs;
  specs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) specs.push_back(standard_spec(i, seed));
  return specs;
}

}  // namespace groundattn::synth
