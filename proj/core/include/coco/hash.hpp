#pragma once

#include <cstdint>
#include <string_view>

namespace coco {

/// FNV-1a 64-bit; stable across builds, used for provenance hashes.
constexpr std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace coco
