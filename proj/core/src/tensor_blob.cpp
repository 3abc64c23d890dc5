#include "terrasight/tensor_blob.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>

#include "terrasight/errors.hpp"

namespace terrasight {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int k = 0; k < 8; ++k) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
  }
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) {
    v |= static_cast<std::uint32_t>(p[k]) << (8 * k);
  }
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) {
    v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  }
  return v;
}

std::size_t product(const std::vector<std::uint32_t>& dims) {
  std::size_t n = 1;
  for (std::uint32_t d : dims) {
    n *= d;
  }
  return n;
}

void check_count(const std::vector<std::uint32_t>& dims, std::size_t count) {
  if (product(dims) != count) {
    std::ostringstream msg;
    msg << "tensor shape " << shape_string(dims) << " holds " << product(dims) << " elements, got " << count;
    throw DimensionError(msg.str());
  }
}

}  // namespace

std::size_t dtype_size(DType dtype) {
  switch (dtype) {
    case DType::F32: return 4;
    case DType::F64: return 8;
    case DType::U8: return 1;
  }
  return 0;
}

const char* to_string(DType dtype) {
  switch (dtype) {
    case DType::F32: return "f32";
    case DType::F64: return "f64";
    case DType::U8: return "u8";
  }
  return "unknown";
}

std::string shape_string(std::span<const std::uint32_t> dims) {
  std::string out = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    out += (i ? "," : "") + (dims[i] == 0 ? std::string("*") : std::to_string(dims[i]));
  }
  return out + "]";
}

TensorBlob TensorBlob::from_f32(std::vector<std::uint32_t> dims, std::span<const float> values) {
  check_count(dims, values.size());
  std::vector<std::uint8_t> payload;
  payload.reserve(values.size() * 4);
  for (float v : values) {
    put_u32(payload, std::bit_cast<std::uint32_t>(v));
  }
  return TensorBlob(DType::F32, std::move(dims), std::move(payload));
}

TensorBlob TensorBlob::from_f64(std::vector<std::uint32_t> dims, std::span<const double> values) {
  check_count(dims, values.size());
  std::vector<std::uint8_t> payload;
  payload.reserve(values.size() * 8);
  for (double v : values) {
    put_u64(payload, std::bit_cast<std::uint64_t>(v));
  }
  return TensorBlob(DType::F64, std::move(dims), std::move(payload));
}

TensorBlob TensorBlob::from_u8(std::vector<std::uint32_t> dims, std::span<const std::uint8_t> values) {
  check_count(dims, values.size());
  return TensorBlob(DType::U8, std::move(dims), std::vector<std::uint8_t>(values.begin(), values.end()));
}

std::size_t TensorBlob::element_count() const noexcept { return product(dims_); }

std::vector<float> TensorBlob::to_f32() const {
  if (dtype_ != DType::F32) {
    throw DimensionError(std::string("expected f32 tensor, found ") + to_string(dtype_));
  }
  std::vector<float> out(element_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<float>(get_u32(payload_.data() + 4 * i));
  }
  return out;
}

std::vector<double> TensorBlob::to_f64() const {
  if (dtype_ != DType::F64) {
    throw DimensionError(std::string("expected f64 tensor, found ") + to_string(dtype_));
  }
  std::vector<double> out(element_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::bit_cast<double>(get_u64(payload_.data() + 8 * i));
  }
  return out;
}

std::vector<std::uint8_t> TensorBlob::to_u8() const {
  if (dtype_ != DType::U8) {
    throw DimensionError(std::string("expected u8 tensor, found ") + to_string(dtype_));
  }
  return payload_;
}

std::vector<std::uint8_t> TensorBlob::encode() const {
  std::vector<std::uint8_t> out;
  out.reserve(16 + 4 * dims_.size() + payload_.size());
  out.insert(out.end(), kBlobMagic, kBlobMagic + 4);
  put_u32(out, kBlobVersion);
  put_u32(out, static_cast<std::uint32_t>(dtype_));
  put_u32(out, static_cast<std::uint32_t>(dims_.size()));
  for (std::uint32_t d : dims_) {
    put_u32(out, d);
  }
  out.insert(out.end(), payload_.begin(), payload_.end());
  return out;
}

TensorBlob TensorBlob::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kBlobMagic, 4) != 0) {
    throw FormatError("not a tensor blob (bad magic)");
  }
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kBlobVersion) {
    throw VersionError("unsupported blob version " + std::to_string(version) + ", expected " +
                       std::to_string(kBlobVersion));
  }
  const std::uint32_t code = get_u32(bytes.data() + 8);
  if (code < 1 || code > 3) {
    throw FormatError("unknown blob element type " + std::to_string(code));
  }
  const DType dtype = static_cast<DType>(code);
  const std::uint32_t rank = get_u32(bytes.data() + 12);
  const std::size_t header = 16 + 4 * static_cast<std::size_t>(rank);
  if (rank > 16 || bytes.size() < header) {
    throw DimensionError("blob header truncated (rank " + std::to_string(rank) + ")");
  }
  std::vector<std::uint32_t> dims(rank);
  for (std::uint32_t i = 0; i < rank; ++i) {
    dims[i] = get_u32(bytes.data() + 16 + 4 * i);
  }
  const std::size_t expected = product(dims) * dtype_size(dtype);
  if (bytes.size() - header != expected) {
    throw DimensionError("blob payload of " + std::to_string(bytes.size() - header) + " bytes, shape " +
                         shape_string(dims) + " needs " + std::to_string(expected));
  }
  return TensorBlob(dtype, std::move(dims), std::vector<std::uint8_t>(bytes.begin() + header, bytes.end()));
}

void TensorBlob::expect(DType dtype, std::span<const std::uint32_t> shape, const std::string& name) const {
  bool ok = dtype == dtype_ && shape.size() == dims_.size();
  for (std::size_t i = 0; ok && i < shape.size(); ++i) {
    ok = shape[i] == 0 || shape[i] == dims_[i];
  }
  if (!ok) {
    throw DimensionError(name + ": expected " + to_string(dtype) + " rank " + std::to_string(shape.size()) + " " +
                         shape_string(shape) + ", found " + to_string(dtype_) + " rank " +
                         std::to_string(dims_.size()) + " " + shape_string(dims_));
  }
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot commit " + path.string());
  }
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path, std::int64_t episode_index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::string what = "missing or unreadable file " + path.string();
    if (episode_index >= 0) {
      what += " (episode " + std::to_string(episode_index) + ")";
    }
    throw PathError(what, episode_index);
  }
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace terrasight
