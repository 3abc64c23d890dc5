#include <gtest/gtest.h>

#include <filesystem>
#include <vector>

#include "terrasight/errors.hpp"
#include "terrasight/tensor_blob.hpp"

namespace terrasight {
namespace {

namespace fs = std::filesystem;

TEST(TensorBlob, GoldenBytes) {
  const std::vector<float> v{1.0f, -2.0f};
  const auto bytes = TensorBlob::from_f32({2}, v).encode();
  const std::vector<std::uint8_t> golden{
      'T', 'B', 'I', 'P',       // magic
      1, 0, 0, 0,               // version
      1, 0, 0, 0,               // dtype f32
      1, 0, 0, 0,               // rank
      2, 0, 0, 0,               // dims
      0x00, 0x00, 0x80, 0x3f,   // 1.0f
      0x00, 0x00, 0x00, 0xc0};  // -2.0f
  EXPECT_EQ(bytes, golden);
}

TEST(TensorBlob, RoundTripAllTypes) {
  const std::vector<float> f{0.5f, 1.5f, -3.25f, 7.0f, 0.0f, 1e-7f};
  const std::vector<double> d{0.1, -1e300, 3.0, 4.0};
  const std::vector<std::uint8_t> u{0, 1, 255};
  const TensorBlob bf = TensorBlob::from_f32({2, 3}, f);
  const TensorBlob bd = TensorBlob::from_f64({2, 2}, d);
  const TensorBlob bu = TensorBlob::from_u8({3}, u);
  EXPECT_EQ(TensorBlob::decode(bf.encode()), bf);
  EXPECT_EQ(TensorBlob::decode(bd.encode()).to_f64(), d);
  EXPECT_EQ(TensorBlob::decode(bu.encode()).to_u8(), u);
  EXPECT_EQ(bf.to_f32(), f);
  EXPECT_EQ(bf.element_count(), 6u);
}

TEST(TensorBlob, WrongDtypeAccessThrows) {
  const std::vector<float> f{1.0f};
  EXPECT_THROW(TensorBlob::from_f32({1}, f).to_f64(), DimensionError);
}

TEST(TensorBlob, MismatchedDimsAtConstruction) {
  const std::vector<float> f{1.0f, 2.0f, 3.0f};
  EXPECT_THROW(TensorBlob::from_f32({2, 2}, f), DimensionError);
}

TEST(TensorBlob, BadMagicIsFormatError) {
  auto bytes = TensorBlob::from_u8({1}, std::vector<std::uint8_t>{7}).encode();
  bytes[0] = 'X';
  EXPECT_THROW(TensorBlob::decode(bytes), FormatError);
}

TEST(TensorBlob, UnknownVersionIsVersionError) {
  auto bytes = TensorBlob::from_u8({1}, std::vector<std::uint8_t>{7}).encode();
  bytes[4] = 9;
  EXPECT_THROW(TensorBlob::decode(bytes), VersionError);
}

TEST(TensorBlob, TruncatedPayloadIsDimensionError) {
  auto bytes = TensorBlob::from_f32({2}, std::vector<float>{1.0f, 2.0f}).encode();
  bytes.pop_back();
  EXPECT_THROW(TensorBlob::decode(bytes), DimensionError);
}

TEST(TensorBlob, ExpectNamesExpectedAndFound) {
  const TensorBlob b = TensorBlob::from_f32({3, 4}, std::vector<float>(12, 0.0f));
  const std::vector<std::uint32_t> ok{0, 4};
  EXPECT_NO_THROW(b.expect(DType::F32, ok, "depth"));
  const std::vector<std::uint32_t> bad{3, 5};
  try {
    b.expect(DType::F32, bad, "depth");
    FAIL() << "expected DimensionError";
  } catch (const DimensionError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("depth"), std::string::npos) << what;
    EXPECT_NE(what.find(shape_string(bad)), std::string::npos) << what;
    EXPECT_NE(what.find(shape_string(b.dims())), std::string::npos) << what;
  }
}

TEST(Checksum, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64({}), 0xcbf29ce484222325ull);
  const std::vector<std::uint8_t> a{'a'};
  EXPECT_EQ(fnv1a64(a), 0xaf63dc4c8601ec8cull);
}

TEST(Files, AtomicWriteAndMissingFile) {
  const fs::path dir = fs::temp_directory_path() / "terrasight_blob_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<std::uint8_t> bytes{1, 2, 3};
  write_file_atomic(dir / "x.bin", bytes);
  EXPECT_EQ(read_file(dir / "x.bin"), bytes);
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 1);
  try {
    read_file(dir / "missing.bin", 12);
    FAIL() << "expected PathError";
  } catch (const PathError& e) {
    EXPECT_EQ(e.episode_index(), 12);
    EXPECT_NE(std::string(e.what()).find("missing.bin"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("episode 12"), std::string::npos);
  }
  EXPECT_THROW(write_file_atomic(dir / "no" / "such" / "dir.bin", bytes), IoError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace terrasight
