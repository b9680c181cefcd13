#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "groundattn/types.hpp"

namespace groundattn {

enum class BoxMode { kTightAll, kLargestComponent };

std::string_view to_string(BoxMode m);
BoxMode parse_box_mode(std::string_view text);

struct Component {
  int id = 0;  // 1-based, equal to its position in the sorted list
  std::size_t pixel_count = 0;
  BBox box;
  Pixel first;  // row-major first pixel
};

struct ComponentLabeling {
  Grid<int> labels;  // 0 = background, otherwise a Component::id
  std::vector<Component> components;
};

// 8-connected two-pass labeling. Components are ordered by descending
// pixel count, then by row-major first pixel.
ComponentLabeling label_components(const BinaryMask& mask);
std::vector<Component> connected_components(const BinaryMask& mask);

// Half-open box around the foreground (all of it, or the largest
// component). nullopt for an empty mask.
std::optional<BBox> mask_to_box(const BinaryMask& mask, BoxMode mode);

BinaryMask rasterize(const BBox& box, std::size_t rows, std::size_t cols);

}  // namespace groundattn
