#pragma once

#include <cstdint>
#include <string>

#include "l2d/memory.hpp"

namespace l2d {

// On-disk container: magic "L2DM", version u16, dtype u8 (0 = f32, 1 = f16),
// dim u32, count u64, catalog block (u32 item count, then u32-length-prefixed
// UTF-8 keys in id order), item_of_row u32 x N, row-major matrix block,
// trailing CRC32 of all preceding bytes. Little-endian throughout.
enum class StorageDtype : std::uint8_t { f32 = 0, f16 = 1 };

inline constexpr char kMemoryMagic[4] = {'L', '2', 'D', 'M'};
inline constexpr std::uint16_t kMemoryFormatVersion = 1;

// f32 saves round-trip bit-exactly; f16 halves the matrix block at reduced
// precision (arithmetic still happens in at least 32-bit after load).
void save_memory(const MemorySet& m, const std::string& path,
                 StorageDtype dtype = StorageDtype::f32);

MemorySet load_memory(const std::string& path);

std::uint32_t crc32_ieee(const void* data, std::size_t size,
                         std::uint32_t seed = 0);

std::uint16_t f32_to_f16(float value);
float f16_to_f32(std::uint16_t half);

}  // namespace l2d
