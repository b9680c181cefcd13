#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "groundattn/types.hpp"

// NPY v1.0 reader/writer restricted to little-endian float32, C order,
// rank 2..4. Payload bytes are copied verbatim, so round trips are
// bit-exact (NaN payloads included).
namespace groundattn::npy {

std::string encode(const Tensor& tensor);
Tensor decode(std::string_view bytes);

void write_tensor(const Tensor& tensor, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

// Throws kShapeMismatch when the stored shape differs from `expected`.
Tensor read_tensor(const std::filesystem::path& path, const std::vector<std::size_t>& expected);

}  // namespace groundattn::npy
