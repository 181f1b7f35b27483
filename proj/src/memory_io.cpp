#include "l2d/memory_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <utility>
#include <vector>

#include "l2d/error.hpp"

namespace l2d {

namespace {

constexpr std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) {
      c = (c & 1u) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
    }
    table[i] = c;
  }
  return table;
}

constexpr auto kCrcTable = make_crc_table();

// Streams bytes to disk while folding them into a running CRC, so the
// trailing checksum covers everything without buffering the whole file.
class ChecksumWriter {
 public:
  explicit ChecksumWriter(const std::string& path)
      : out_(path, std::ios::binary) {
    if (!out_) fail(Errc::io, "cannot open " + path + " for writing");
  }

  void write(const void* data, std::size_t size) {
    crc_ = crc32_ieee(data, size, crc_);
    out_.write(static_cast<const char*>(data),
               static_cast<std::streamsize>(size));
  }

  void write_u8(std::uint8_t v) { write(&v, 1); }
  void write_u16(std::uint16_t v) {
    const std::uint8_t b[2] = {std::uint8_t(v), std::uint8_t(v >> 8)};
    write(b, 2);
  }
  void write_u32(std::uint32_t v) {
    const std::uint8_t b[4] = {std::uint8_t(v), std::uint8_t(v >> 8),
                               std::uint8_t(v >> 16), std::uint8_t(v >> 24)};
    write(b, 4);
  }
  void write_u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = std::uint8_t(v >> (8 * i));
    write(b, 8);
  }

  std::uint32_t crc() const { return crc_; }

  void finish(const std::string& path) {
    const std::uint32_t sum = crc_;
    const std::uint8_t b[4] = {std::uint8_t(sum), std::uint8_t(sum >> 8),
                               std::uint8_t(sum >> 16),
                               std::uint8_t(sum >> 24)};
    out_.write(reinterpret_cast<const char*>(b), 4);
    out_.close();
    if (!out_) fail(Errc::io, "write to " + path + " failed");
  }

 private:
  std::ofstream out_;
  std::uint32_t crc_ = 0;
};

class BufferReader {
 public:
  BufferReader(const unsigned char* data, std::size_t size)
      : data_(data), size_(size) {}

  void need(std::size_t n) {
    if (size_ - pos_ < n) {
      fail(Errc::truncated, "file ends inside a record block");
    }
  }

  const unsigned char* take(std::size_t n) {
    need(n);
    const unsigned char* p = data_ + pos_;
    pos_ += n;
    return p;
  }

  std::uint8_t read_u8() { return *take(1); }
  std::uint16_t read_u16() {
    const unsigned char* p = take(2);
    return std::uint16_t(p[0] | (std::uint16_t(p[1]) << 8));
  }
  std::uint32_t read_u32() {
    const unsigned char* p = take(4);
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
           (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
  }
  std::uint64_t read_u64() {
    const unsigned char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(p[i]) << (8 * i);
    return v;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

std::uint32_t float_bits(float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  return bits;
}

float bits_to_float(std::uint32_t bits) {
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

std::uint32_t crc32_ieee(const void* data, std::size_t size,
                         std::uint32_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  for (std::size_t i = 0; i < size; ++i) {
    c = kCrcTable[(c ^ p[i]) & 0xFFu] ^ (c >> 8);
  }
  return c ^ 0xFFFFFFFFu;
}

std::uint16_t f32_to_f16(float value) {
  const std::uint32_t bits = float_bits(value);
  const std::uint32_t sign = (bits >> 16) & 0x8000u;
  const std::uint32_t exp = (bits >> 23) & 0xFFu;
  const std::uint32_t mant = bits & 0x7FFFFFu;

  if (exp == 0xFFu) {
    // Infinity keeps a zero payload, NaN keeps a quiet bit.
    return std::uint16_t(sign | 0x7C00u | (mant ? 0x200u : 0u));
  }

  const int new_exp = int(exp) - 127 + 15;
  if (new_exp >= 0x1F) return std::uint16_t(sign | 0x7C00u);

  if (new_exp <= 0) {
    if (new_exp < -10) return std::uint16_t(sign);
    // Subnormal target: shift the full significand, round to nearest even.
    const std::uint32_t full = mant | 0x800000u;
    const int shift = 14 - new_exp;
    std::uint32_t half = full >> shift;
    const std::uint32_t rem = full & ((1u << shift) - 1u);
    const std::uint32_t halfway = 1u << (shift - 1);
    if (rem > halfway || (rem == halfway && (half & 1u))) ++half;
    return std::uint16_t(sign | half);
  }

  std::uint32_t half =
      sign | (std::uint32_t(new_exp) << 10) | (mant >> 13);
  const std::uint32_t rem = mant & 0x1FFFu;
  // A mantissa carry rolls into the exponent, which is the correct rounding
  // for 1.111... and turns the largest exponent into infinity.
  if (rem > 0x1000u || (rem == 0x1000u && (half & 1u))) ++half;
  return std::uint16_t(half);
}

float f16_to_f32(std::uint16_t half) {
  const std::uint32_t sign = (std::uint32_t(half) & 0x8000u) << 16;
  const std::uint32_t exp = (half >> 10) & 0x1Fu;
  const std::uint32_t mant = half & 0x3FFu;

  if (exp == 0) {
    if (mant == 0) return bits_to_float(sign);
    // Normalize the subnormal significand.
    const int p = 31 - std::countl_zero(mant);
    const std::uint32_t rest = mant ^ (1u << p);
    return bits_to_float(sign | (std::uint32_t(103 + p) << 23) |
                         (rest << (23 - p)));
  }
  if (exp == 0x1Fu) {
    return bits_to_float(sign | 0x7F800000u | (mant << 13));
  }
  return bits_to_float(sign | ((exp + 112u) << 23) | (mant << 13));
}

void save_memory(const MemorySet& m, const std::string& path,
                 StorageDtype dtype) {
  ChecksumWriter w(path);
  w.write(kMemoryMagic, 4);
  w.write_u16(kMemoryFormatVersion);
  w.write_u8(std::uint8_t(dtype));
  w.write_u32(m.dim());
  w.write_u64(m.count());

  const ItemCatalog& catalog = m.catalog();
  w.write_u32(catalog.size());
  for (ItemId id = 0; id < catalog.size(); ++id) {
    const std::string& key = catalog.key_of(id);
    w.write_u32(std::uint32_t(key.size()));
    w.write(key.data(), key.size());
  }

  for (std::uint64_t r = 0; r < m.count(); ++r) w.write_u32(m.item_of_row(r));

  const std::vector<float>& matrix = m.matrix();
  if (dtype == StorageDtype::f32) {
    std::vector<std::uint8_t> chunk;
    chunk.reserve(4 * 16384);
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      const std::uint32_t bits = float_bits(matrix[i]);
      chunk.push_back(std::uint8_t(bits));
      chunk.push_back(std::uint8_t(bits >> 8));
      chunk.push_back(std::uint8_t(bits >> 16));
      chunk.push_back(std::uint8_t(bits >> 24));
      if (chunk.size() == chunk.capacity()) {
        w.write(chunk.data(), chunk.size());
        chunk.clear();
      }
    }
    if (!chunk.empty()) w.write(chunk.data(), chunk.size());
  } else {
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      w.write_u16(f32_to_f16(matrix[i]));
    }
  }

  w.finish(path);
}

MemorySet load_memory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) fail(Errc::io, "read from " + path + " failed");

  BufferReader r(bytes.data(), bytes.size());
  const unsigned char* magic = r.take(4);
  if (std::memcmp(magic, kMemoryMagic, 4) != 0) {
    fail(Errc::bad_magic, path + ": not a memory container");
  }
  const std::uint16_t version = r.read_u16();
  if (version != kMemoryFormatVersion) {
    fail(Errc::bad_version,
         path + ": unsupported version " + std::to_string(version));
  }
  const std::uint8_t dtype_byte = r.read_u8();
  if (dtype_byte > std::uint8_t(StorageDtype::f16)) {
    fail(Errc::bad_format, path + ": unknown dtype");
  }
  const auto dtype = StorageDtype(dtype_byte);
  const std::uint32_t dim = r.read_u32();
  const std::uint64_t count = r.read_u64();
  if (dim == 0) fail(Errc::bad_format, path + ": zero dimension");

  const std::uint32_t item_count = r.read_u32();
  std::vector<std::string> keys(item_count);
  for (std::uint32_t i = 0; i < item_count; ++i) {
    const std::uint32_t len = r.read_u32();
    const unsigned char* p = r.take(len);
    keys[i].assign(reinterpret_cast<const char*>(p), len);
  }

  if (count > r.remaining() / 4) {
    fail(Errc::truncated, path + ": row index block is incomplete");
  }
  std::vector<ItemId> item_of_row(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    item_of_row[i] = r.read_u32();
  }

  const std::size_t value_size = dtype == StorageDtype::f32 ? 4 : 2;
  if (count > r.remaining() / value_size / dim) {
    fail(Errc::truncated, path + ": matrix block is incomplete");
  }
  const std::size_t matrix_bytes = std::size_t(count) * dim * value_size;
  const unsigned char* matrix_block = r.take(matrix_bytes);

  if (r.remaining() < 4) fail(Errc::truncated, path + ": missing checksum");
  const std::size_t body_size = r.pos();
  const std::uint32_t stored_crc = r.read_u32();
  if (r.remaining() != 0) {
    fail(Errc::bad_format, path + ": trailing bytes after checksum");
  }
  const std::uint32_t actual_crc = crc32_ieee(bytes.data(), body_size);
  if (actual_crc != stored_crc) {
    fail(Errc::checksum_mismatch, path + ": checksum mismatch");
  }

  for (std::uint64_t i = 0; i < count; ++i) {
    if (item_of_row[i] >= item_count) {
      fail(Errc::bad_format, path + ": row item out of range");
    }
  }

  std::vector<float> matrix(std::size_t(count) * dim);
  if (dtype == StorageDtype::f32) {
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      const unsigned char* p = matrix_block + 4 * i;
      matrix[i] = bits_to_float(std::uint32_t(p[0]) |
                                (std::uint32_t(p[1]) << 8) |
                                (std::uint32_t(p[2]) << 16) |
                                (std::uint32_t(p[3]) << 24));
    }
  } else {
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      const unsigned char* p = matrix_block + 2 * i;
      matrix[i] =
          f16_to_f32(std::uint16_t(p[0] | (std::uint16_t(p[1]) << 8)));
    }
  }

  // The catalog block lists keys in id order, which for every container we
  // write is also first-appearance order over the rows. Rebuilding from the
  // rows and comparing enforces that and restores the frequencies.
  ItemCatalog catalog;
  for (std::uint64_t i = 0; i < count; ++i) {
    catalog.add_occurrence(keys[item_of_row[i]]);
  }
  if (catalog.size() != item_count) {
    fail(Errc::bad_format, path + ": catalog lists items with no rows");
  }
  for (std::uint32_t i = 0; i < item_count; ++i) {
    if (catalog.key_of(i) != keys[i]) {
      fail(Errc::bad_format, path + ": catalog order mismatch");
    }
  }

  return MemorySet::from_parts(dim, std::move(matrix), std::move(item_of_row),
                               std::move(catalog));
}

}  // namespace l2d
