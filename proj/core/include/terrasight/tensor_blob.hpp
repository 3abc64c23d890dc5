#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace terrasight {

/// Element type codes stored in blob headers.
enum class DType : std::uint32_t { F32 = 1, F64 = 2, U8 = 3 };

std::size_t dtype_size(DType dtype);
const char* to_string(DType dtype);

inline constexpr char kBlobMagic[4] = {'T', 'B', 'I', 'P'};
inline constexpr std::uint32_t kBlobVersion = 1;

/// Raw tensor: header "TBIP", u32 version, u32 dtype, u32 rank, u32 dims[rank],
/// then the row-major payload. Every field is little-endian.
class TensorBlob {
 public:
  TensorBlob() = default;

  static TensorBlob from_f32(std::vector<std::uint32_t> dims, std::span<const float> values);
  static TensorBlob from_f64(std::vector<std::uint32_t> dims, std::span<const double> values);
  static TensorBlob from_u8(std::vector<std::uint32_t> dims, std::span<const std::uint8_t> values);

  DType dtype() const noexcept { return dtype_; }
  const std::vector<std::uint32_t>& dims() const noexcept { return dims_; }
  std::size_t element_count() const noexcept;
  /// Little-endian payload bytes.
  const std::vector<std::uint8_t>& payload() const noexcept { return payload_; }

  /// Decoded values; throw DimensionError when the dtype differs.
  std::vector<float> to_f32() const;
  std::vector<double> to_f64() const;
  std::vector<std::uint8_t> to_u8() const;

  std::vector<std::uint8_t> encode() const;
  /// Throws FormatError on bad magic, VersionError on an unknown version,
  /// DimensionError when the payload length disagrees with the dims.
  static TensorBlob decode(std::span<const std::uint8_t> bytes);

  /// Throws DimensionError naming expected vs found unless the dtype and
  /// shape match; a zero in `shape` matches any extent.
  void expect(DType dtype, std::span<const std::uint32_t> shape, const std::string& name) const;

  bool operator==(const TensorBlob&) const = default;

 private:
  TensorBlob(DType dtype, std::vector<std::uint32_t> dims, std::vector<std::uint8_t> payload)
      : dtype_(dtype), dims_(std::move(dims)), payload_(std::move(payload)) {}

  DType dtype_ = DType::F32;
  std::vector<std::uint32_t> dims_;
  std::vector<std::uint8_t> payload_;
};

std::string shape_string(std::span<const std::uint32_t> dims);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

/// Writes via a temporary sibling and rename; throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

/// Throws PathError (with `episode_index`) when the file is missing or unreadable.
std::vector<std::uint8_t> read_file(const std::filesystem::path& path, std::int64_t episode_index = -1);

}  // namespace terrasight
