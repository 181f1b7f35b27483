#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "l2d/error.hpp"
#include "l2d/memory_io.hpp"
#include "test_util.hpp"

using namespace l2d;

namespace {

std::string temp_path(const std::string& name) {
  return "/tmp/l2d_io_test_" + name;
}

std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            std::streamsize(bytes.size()));
}

Errc load_error(const std::string& path) {
  try {
    load_memory(path);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected load to fail");
  return Errc::io;
}

}  // namespace

TEST_CASE("crc32 matches the standard check value") {
  const char* msg = "123456789";
  CHECK(crc32_ieee(msg, 9) == 0xCBF43926u);

  // Incremental folding equals one pass over the concatenation.
  const std::uint32_t part = crc32_ieee(msg, 4);
  CHECK(crc32_ieee(msg + 4, 5, part) == 0xCBF43926u);

  CHECK(crc32_ieee("", 0) == 0u);
}

TEST_CASE("half conversion hits the known encodings") {
  CHECK(f32_to_f16(0.0f) == 0x0000);
  CHECK(f32_to_f16(-0.0f) == 0x8000);
  CHECK(f32_to_f16(1.0f) == 0x3C00);
  CHECK(f32_to_f16(0.5f) == 0x3800);
  CHECK(f32_to_f16(-2.0f) == 0xC000);
  CHECK(f32_to_f16(65504.0f) == 0x7BFF);      // largest finite half
  CHECK(f32_to_f16(65520.0f) == 0x7C00);      // overflows to infinity
  CHECK(f32_to_f16(std::ldexp(1.0f, -24)) == 0x0001);  // smallest subnormal
  CHECK(f32_to_f16(std::ldexp(1.0f, -25)) == 0x0000);  // halfway, ties to even
  CHECK(f32_to_f16(std::ldexp(3.0f, -26)) == 0x0001);  // above halfway
  CHECK(f32_to_f16(std::numeric_limits<float>::infinity()) == 0x7C00);

  CHECK(f16_to_f32(0x3C00) == 1.0f);
  CHECK(f16_to_f32(0x0001) == std::ldexp(1.0f, -24));
  CHECK(f16_to_f32(0x7C00) == std::numeric_limits<float>::infinity());
  CHECK(std::isnan(f16_to_f32(0x7C01)));
  CHECK(std::isnan(f16_to_f32(std::uint16_t(f32_to_f16(
      std::numeric_limits<float>::quiet_NaN())))));
}

TEST_CASE("every half value survives the f32 round trip") {
  for (std::uint32_t bits = 0; bits < 0x10000; ++bits) {
    const auto half = std::uint16_t(bits);
    const bool is_nan = (half & 0x7C00) == 0x7C00 && (half & 0x3FF) != 0;
    if (is_nan) continue;  // payloads are not preserved, NaN-ness is
    CHECK(f32_to_f16(f16_to_f32(half)) == half);
  }
}

TEST_CASE("f32 saves round-trip bit exactly, on disk and in memory") {
  const auto records = testutil::random_records(60, 5, 8, 21);
  const MemorySet m = MemorySet::build(records, 5);
  const std::string path = temp_path("roundtrip.bin");
  save_memory(m, path);

  const MemorySet loaded = load_memory(path);
  CHECK(loaded == m);

  const std::string again = temp_path("roundtrip2.bin");
  save_memory(loaded, again);
  CHECK(slurp(path) == slurp(again));
  std::remove(path.c_str());
  std::remove(again.c_str());
}

TEST_CASE("a zero-row memory survives the round trip") {
  const MemorySet empty = MemorySet::build(std::vector<MemoryRecord>{}, 7);
  const std::string path = temp_path("empty.bin");
  save_memory(empty, path);
  const MemorySet loaded = load_memory(path);
  CHECK(loaded.count() == 0);
  CHECK(loaded.dim() == 7);
  std::remove(path.c_str());
}

TEST_CASE("f16 storage halves the matrix and loads within half precision") {
  const auto records = testutil::random_records(40, 6, 5, 33);
  const MemorySet m = MemorySet::build(records, 6);
  const std::string p32 = temp_path("dt32.bin");
  const std::string p16 = temp_path("dt16.bin");
  save_memory(m, p32, StorageDtype::f32);
  save_memory(m, p16, StorageDtype::f16);

  const auto b32 = slurp(p32);
  const auto b16 = slurp(p16);
  const std::size_t matrix32 = 4 * m.matrix().size();
  CHECK(b32.size() - matrix32 == b16.size() - matrix32 / 2);

  const MemorySet loaded = load_memory(p16);
  CHECK(loaded.catalog() == m.catalog());
  REQUIRE(loaded.count() == m.count());
  for (std::size_t i = 0; i < m.matrix().size(); ++i) {
    // Components live in [0,1); half precision resolves 2^-11 of that.
    CHECK(std::fabs(loaded.matrix()[i] - m.matrix()[i]) < 6e-4);
  }

  // Re-saving an f16 load as f16 is a fixed point.
  const std::string p16b = temp_path("dt16b.bin");
  save_memory(loaded, p16b, StorageDtype::f16);
  CHECK(slurp(p16) == slurp(p16b));
  std::remove(p32.c_str());
  std::remove(p16.c_str());
  std::remove(p16b.c_str());
}

TEST_CASE("load failures carry distinct error codes") {
  const auto records = testutil::random_records(25, 4, 6, 55);
  const MemorySet m = MemorySet::build(records, 4);
  const std::string path = temp_path("corrupt.bin");
  save_memory(m, path);
  const auto good = slurp(path);

  SUBCASE("missing file") {
    CHECK(load_error(temp_path("nope.bin")) == Errc::io);
  }

  SUBCASE("corrupted magic") {
    auto bytes = good;
    bytes[0] = 'X';
    spit(path, bytes);
    CHECK(load_error(path) == Errc::bad_magic);
  }

  SUBCASE("unsupported version") {
    auto bytes = good;
    bytes[4] = 0x7F;
    spit(path, bytes);
    CHECK(load_error(path) == Errc::bad_version);
  }

  SUBCASE("truncated tail") {
    auto bytes = good;
    bytes.resize(bytes.size() - bytes.size() / 4);
    spit(path, bytes);
    CHECK(load_error(path) == Errc::truncated);
  }

  SUBCASE("truncated to a few bytes") {
    auto bytes = good;
    bytes.resize(3);
    spit(path, bytes);
    CHECK(load_error(path) == Errc::truncated);
  }

  SUBCASE("flipped payload byte") {
    auto bytes = good;
    bytes[bytes.size() / 2] ^= 0x40;
    spit(path, bytes);
    CHECK(load_error(path) == Errc::checksum_mismatch);
  }

  SUBCASE("trailing garbage") {
    auto bytes = good;
    bytes.push_back(0xEE);
    spit(path, bytes);
    CHECK(load_error(path) == Errc::bad_format);
  }

  std::remove(path.c_str());
}
