#pragma once

#include <cstdint>
#include <string_view>

namespace lcdc {

// 64-bit FNV-1a, used for trace digests and trace-token mapping.
class Fnv1a {
 public:
  void add_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void add_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      const unsigned char b = static_cast<unsigned char>(v >> (8 * i));
      add_bytes(&b, 1);
    }
  }
  void add(std::string_view s) { add_bytes(s.data(), s.size()); }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::uint64_t fnv1a(std::string_view s) {
  Fnv1a h;
  h.add(s);
  return h.digest();
}

}  // namespace lcdc
