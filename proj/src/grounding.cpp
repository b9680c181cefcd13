#include "groundattn/grounding.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "groundattn/error.hpp"

namespace groundattn {

std::string_view to_string(BoxMode m) { return m == BoxMode::kTightAll ? "tight_all" : "largest_component"; }

BoxMode parse_box_mode(std::string_view text) {
  if (text == "tight_all") return BoxMode::kTightAll;
  if (text == "largest_component") return BoxMode::kLargestComponent;
  throw Error(ErrorCode::kInvalidArgument, "unknown box mode '" + std::string(text) + "'");
}

namespace {

class DisjointSet {
 public:
  int make() {
    parent_.push_back(static_cast<int>(parent_.size()));
    return parent_.back();
  }
  int find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

ComponentLabeling label_components(const BinaryMask& mask) {
  const std::size_t rows = mask.rows();
  const std::size_t cols = mask.cols();
  Grid<int> provisional(rows, cols, -1);
  DisjointSet sets;

  // First pass: provisional labels from the already-visited half of the
  // 8-neighbourhood (W, NW, N, NE).
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!mask(r, c)) continue;
      int label = -1;
      auto visit = [&](std::size_t nr, std::size_t nc) {
        int other = provisional(nr, nc);
        if (other < 0) return;
        if (label < 0) {
          label = other;
        } else {
          sets.unite(label, other);
        }
      };
      if (c > 0) visit(r, c - 1);
      if (r > 0) {
        if (c > 0) visit(r - 1, c - 1);
        visit(r - 1, c);
        if (c + 1 < cols) visit(r - 1, c + 1);
      }
      provisional(r, c) = label < 0 ? sets.make() : label;
    }
  }

  // Second pass: resolve roots and gather statistics per root.
  struct Stats {
    std::size_t count = 0;
    BBox box{0, 0, 0, 0};
    Pixel first;
  };
  std::vector<int> root_slot;
  std::vector<Stats> stats;
  Grid<int> slots(rows, cols, -1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (provisional(r, c) < 0) continue;
      int root = sets.find(provisional(r, c));
      if (static_cast<std::size_t>(root) >= root_slot.size()) root_slot.resize(root + 1, -1);
      if (root_slot[root] < 0) {
        root_slot[root] = static_cast<int>(stats.size());
        Stats s;
        s.box = {static_cast<int>(c), static_cast<int>(r), static_cast<int>(c) + 1, static_cast<int>(r) + 1};
        s.first = {r, c};
        stats.push_back(s);
      }
      int slot = root_slot[root];
      Stats& s = stats[slot];
      ++s.count;
      s.box.x1 = std::min(s.box.x1, static_cast<int>(c));
      s.box.y1 = std::min(s.box.y1, static_cast<int>(r));
      s.box.x2 = std::max(s.box.x2, static_cast<int>(c) + 1);
      s.box.y2 = std::max(s.box.y2, static_cast<int>(r) + 1);
      slots(r, c) = slot;
    }
  }

  // Slots were created in row-major order of first pixel, so a stable sort
  // by size gives the required tie-break.
  std::vector<int> order(stats.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return stats[a].count > stats[b].count; });
  std::vector<int> id_of_slot(stats.size());
  ComponentLabeling out;
  out.components.reserve(stats.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Stats& s = stats[order[i]];
    id_of_slot[order[i]] = static_cast<int>(i) + 1;
    out.components.push_back({static_cast<int>(i) + 1, s.count, s.box, s.first});
  }
  out.labels = Grid<int>(rows, cols, 0);
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] >= 0) out.labels[i] = id_of_slot[slots[i]];
  }
  return out;
}

std::vector<Component> connected_components(const BinaryMask& mask) { return label_components(mask).components; }

std::optional<BBox> mask_to_box(const BinaryMask& mask, BoxMode mode) {
  if (mode == BoxMode::kLargestComponent) {
    auto comps = connected_components(mask);
    if (comps.empty()) return std::nullopt;
    return comps.front().box;
  }
  bool found = false;
  BBox box;
  for (std::size_t r = 0; r < mask.rows(); ++r) {
    for (std::size_t c = 0; c < mask.cols(); ++c) {
      if (!mask(r, c)) continue;
      const int x = static_cast<int>(c);
      const int y = static_cast<int>(r);
      if (!found) {
        box = {x, y, x + 1, y + 1};
        found = true;
      } else {
        box.x1 = std::min(box.x1, x);
        box.y1 = std::min(box.y1, y);
        box.x2 = std::max(box.x2, x + 1);
        box.y2 = std::max(box.y2, y + 1);
      }
    }
  }
  if (!found) return std::nullopt;
  return box;
}

BinaryMask rasterize(const BBox& box, std::size_t rows, std::size_t cols) {
  BinaryMask mask(rows, cols, 0);
  const auto clamp = [](int v, std::size_t hi) { return static_cast<std::size_t>(std::clamp<long long>(v, 0, static_cast<long long>(hi))); };
  for (std::size_t r = clamp(box.y1, rows); r < clamp(box.y2, rows); ++r) {
    for (std::size_t c = clamp(box.x1, cols); c < clamp(box.x2, cols); ++c) mask(r, c) = 1;
  }
  return mask;
}

}  // namespace groundattn
