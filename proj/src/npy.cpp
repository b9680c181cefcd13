#include "groundattn/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "groundattn/error.hpp"

namespace groundattn::npy {

namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kAlign = 64;

static_assert(sizeof(float) == 4);

std::string shape_literal(const std::vector<std::size_t>& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    out += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) out += ",";
    if (i + 1 < shape.size()) out += " ";
  }
  return out + ")";
}

void check_rank(std::size_t rank) {
  if (rank < 2 || rank > 4) {
    throw Error(ErrorCode::kUnsupportedTensor,
                "rank " + std::to_string(rank) + " not supported (expected 2, 3 or 4)");
  }
}

// Value text that follows `'key':` in the header dict.
std::string_view dict_value(std::string_view header, std::string_view key) {
  std::string quoted = "'" + std::string(key) + "'";
  auto pos = header.find(quoted);
  if (pos == std::string_view::npos) {
    throw Error(ErrorCode::kMalformedHeader, "header lacks key " + quoted);
  }
  pos = header.find(':', pos + quoted.size());
  if (pos == std::string_view::npos) throw Error(ErrorCode::kMalformedHeader, "missing ':' after " + quoted);
  ++pos;
  while (pos < header.size() && header[pos] == ' ') ++pos;
  return header.substr(pos);
}

std::vector<std::size_t> parse_shape(std::string_view text) {
  if (text.empty() || text.front() != '(') throw Error(ErrorCode::kMalformedHeader, "shape is not a tuple");
  auto close = text.find(')');
  if (close == std::string_view::npos) throw Error(ErrorCode::kMalformedHeader, "unterminated shape tuple");
  std::vector<std::size_t> shape;
  std::string_view body = text.substr(1, close - 1);
  std::size_t i = 0;
  while (i < body.size()) {
    while (i < body.size() && (body[i] == ' ' || body[i] == ',')) ++i;
    if (i >= body.size()) break;
    if (body[i] < '0' || body[i] > '9') throw Error(ErrorCode::kMalformedHeader, "non-numeric shape entry");
    std::size_t value = 0;
    while (i < body.size() && body[i] >= '0' && body[i] <= '9') {
      value = value * 10 + static_cast<std::size_t>(body[i] - '0');
      ++i;
    }
    shape.push_back(value);
  }
  return shape;
}

std::uint32_t read_le(std::string_view bytes, std::size_t offset, std::size_t width) {
  std::uint32_t value = 0;
  for (std::size_t i = 0; i < width; ++i) {
    value |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i])) << (8 * i);
  }
  return value;
}

void copy_floats_out(const std::vector<float>& src, char* dst) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst, src.data(), src.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < src.size(); ++i) {
      auto word = std::bit_cast<std::uint32_t>(src[i]);
      for (int b = 0; b < 4; ++b) dst[i * 4 + b] = static_cast<char>((word >> (8 * b)) & 0xffu);
    }
  }
}

void copy_floats_in(const char* src, std::vector<float>& dst) {
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(dst.data(), src, dst.size() * sizeof(float));
  } else {
    for (std::size_t i = 0; i < dst.size(); ++i) {
      std::uint32_t word = 0;
      for (int b = 0; b < 4; ++b) word |= static_cast<std::uint32_t>(static_cast<unsigned char>(src[i * 4 + b])) << (8 * b);
      dst[i] = std::bit_cast<float>(word);
    }
  }
}

}  // namespace

std::string encode(const Tensor& tensor) {
  check_rank(tensor.rank());
  std::size_t expected = 1;
  for (auto d : tensor.shape) expected *= d;
  if (expected != tensor.data.size()) {
    throw Error(ErrorCode::kShapeMismatch, "tensor data does not match its shape");
  }

  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': " + shape_literal(tensor.shape) + ", }";
  std::size_t preamble = kMagic.size() + 2 + 2;
  std::size_t total = preamble + dict.size() + 1;
  std::size_t padded = (total + kAlign - 1) / kAlign * kAlign;
  dict.append(padded - total, ' ');
  dict.push_back('\n');
  if (dict.size() > 0xffff) throw Error(ErrorCode::kUnsupportedTensor, "header too long for NPY v1.0");

  std::string out;
  out.reserve(padded + tensor.data.size() * 4);
  out.append(kMagic);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(dict.size() & 0xff));
  out.push_back(static_cast<char>((dict.size() >> 8) & 0xff));
  out.append(dict);
  std::size_t offset = out.size();
  out.resize(offset + tensor.data.size() * 4);
  copy_floats_out(tensor.data, out.data() + offset);
  return out;
}

Tensor decode(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 2 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw Error(ErrorCode::kMalformedHeader, "bad NPY magic");
  }
  auto major = static_cast<unsigned char>(bytes[6]);
  std::size_t len_width = 0;
  if (major == 1) {
    len_width = 2;
  } else if (major == 2) {
    len_width = 4;
  } else {
    throw Error(ErrorCode::kMalformedHeader, "unsupported NPY version " + std::to_string(major));
  }
  std::size_t header_start = 8 + len_width;
  if (bytes.size() < header_start) throw Error(ErrorCode::kTruncatedFile, "file ends inside the preamble");
  std::size_t header_len = read_le(bytes, 8, len_width);
  if (bytes.size() < header_start + header_len) throw Error(ErrorCode::kTruncatedFile, "file ends inside the header");
  std::string_view header = bytes.substr(header_start, header_len);
  if (header.empty() || header.front() != '{') throw Error(ErrorCode::kMalformedHeader, "header is not a dict");

  auto descr = dict_value(header, "descr");
  if (descr.substr(0, 5) != "'<f4'") {
    throw Error(ErrorCode::kUnsupportedTensor, "only little-endian float32 ('<f4') is supported");
  }
  auto fortran = dict_value(header, "fortran_order");
  if (fortran.substr(0, 4) == "True") throw Error(ErrorCode::kUnsupportedTensor, "Fortran order not supported");
  if (fortran.substr(0, 5) != "False") throw Error(ErrorCode::kMalformedHeader, "bad fortran_order value");
  auto shape = parse_shape(dict_value(header, "shape"));
  check_rank(shape.size());

  std::size_t count = 1;
  for (auto d : shape) count *= d;
  std::size_t payload = bytes.size() - header_start - header_len;
  if (payload < count * 4) {
    throw Error(ErrorCode::kTruncatedFile, "payload has " + std::to_string(payload) + " bytes, expected " +
                                               std::to_string(count * 4));
  }
  if (payload > count * 4) throw Error(ErrorCode::kShapeMismatch, "payload longer than the declared shape");

  Tensor tensor(shape);
  copy_floats_in(bytes.data() + header_start + header_len, tensor.data);
  return tensor;
}

void write_tensor(const Tensor& tensor, const std::filesystem::path& path) {
  std::string bytes = encode(tensor);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::string bytes(static_cast<std::size_t>(in.tellg()), '\0');
  in.seekg(0);
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw Error(ErrorCode::kIo, "read failed for " + path.string());
  try {
    return decode(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.filename().string() + ": " + e.detail());
  }
}

Tensor read_tensor(const std::filesystem::path& path, const std::vector<std::size_t>& expected) {
  Tensor tensor = read_tensor(path);
  if (tensor.shape != expected) {
    std::ostringstream msg;
    msg << path.filename().string() << ": shape " << shape_literal(tensor.shape) << " expected "
        << shape_literal(expected);
    throw Error(ErrorCode::kShapeMismatch, msg.str());
  }
  return tensor;
}

}  // namespace groundattn::npy
