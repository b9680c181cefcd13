#include "groundattn/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "groundattn/error.hpp"

namespace groundattn::png {

namespace {

void write_image(const std::filesystem::path& path, std::size_t width, std::size_t height, png_uint_32 format,
                 const std::vector<png_byte>& pixels) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format;
  if (png_image_write_to_file(&image, path.c_str(), 0, pixels.data(), 0, nullptr) == 0) {
    std::string reason = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot write " + path.string() + ": " + reason);
  }
}

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void write_mask(const BinaryMask& mask, const std::filesystem::path& path) {
  if (mask.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot write an empty mask");
  std::vector<png_byte> pixels(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) pixels[i] = mask[i] ? 255 : 0;
  write_image(path, mask.cols(), mask.rows(), PNG_FORMAT_GRAY, pixels);
}

BinaryMask read_mask(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kMissingFile, "no such mask " + path.string());
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    std::string reason = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kMalformedHeader, "cannot decode " + path.string() + ": " + reason);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr) == 0) {
    std::string reason = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kTruncatedFile, "cannot decode " + path.string() + ": " + reason);
  }
  BinaryMask mask(image.height, image.width);
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = pixels[i] >= 128 ? 1 : 0;
  return mask;
}

void write_heatmap(const ScoreMap& map, const std::filesystem::path& path, int scale) {
  if (map.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot write an empty heatmap");
  if (scale < 1) throw Error(ErrorCode::kInvalidArgument, "heatmap scale must be >= 1");
  const std::size_t s = static_cast<std::size_t>(scale);
  const std::size_t width = map.cols() * s;
  const std::size_t height = map.rows() * s;
  std::vector<png_byte> pixels(width * height * 3);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      double v = clamp01(map(y / s, x / s));
      png_byte* px = &pixels[(y * width + x) * 3];
      px[0] = static_cast<png_byte>(std::lround(255.0 * clamp01(1.5 - std::abs(4.0 * v - 3.0))));
      px[1] = static_cast<png_byte>(std::lround(255.0 * clamp01(1.5 - std::abs(4.0 * v - 2.0))));
      px[2] = static_cast<png_byte>(std::lround(255.0 * clamp01(1.5 - std::abs(4.0 * v - 1.0))));
    }
  }
  write_image(path, width, height, PNG_FORMAT_RGB, pixels);
}

}  // namespace groundattn::png
