#pragma once

#include <filesystem>

#include "groundattn/types.hpp"

namespace groundattn::png {

// Single-channel 8-bit PNG, foreground = 255, background = 0.
void write_mask(const BinaryMask& mask, const std::filesystem::path& path);

// Any PNG libpng can decode; converted to 8-bit gray, foreground where the
// gray value is >= 128.
BinaryMask read_mask(const std::filesystem::path& path);

// RGB heatmap of a score map clamped to [0,1] using the jet colormap:
//   r = clamp(1.5 - |4x - 3|), g = clamp(1.5 - |4x - 2|), b = clamp(1.5 - |4x - 1|)
// Each map cell becomes a `scale` x `scale` block of pixels.
void write_heatmap(const ScoreMap& map, const std::filesystem::path& path, int scale = 1);

}  // namespace groundattn::png
