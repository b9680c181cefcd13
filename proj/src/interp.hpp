#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace groundattn::detail {

// Source neighbours and weight for one output coordinate.
struct Tap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

// Corner alignment: output index d samples source coordinate d*(in-1)/(out-1).
inline std::vector<Tap> corner_aligned_taps(std::size_t in, std::size_t out) {
  std::vector<Tap> taps(out);
  const double scale = out > 1 ? static_cast<double>(in - 1) / static_cast<double>(out - 1) : 0.0;
  for (std::size_t d = 0; d < out; ++d) {
    double src = static_cast<double>(d) * scale;
    auto lo = std::min(static_cast<std::size_t>(std::floor(src)), in - 1);
    std::size_t hi = std::min(lo + 1, in - 1);
    taps[d] = {lo, hi, src - static_cast<double>(lo)};
  }
  return taps;
}

// a + (b - a) * t keeps equal endpoints exact, so constant regions stay
// constant bit for bit.
inline double lerp(double a, double b, double t) { return a + (b - a) * t; }

}  // namespace groundattn::detail
