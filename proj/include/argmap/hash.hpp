#pragma once

#include <cstdint>
#include <string_view>

namespace argmap {

// 64-bit FNV-1a. Stable across builds and platforms, which std::hash is not;
// used wherever a hash feeds a seed or an on-disk fingerprint.
class Fnv1a {
 public:
  Fnv1a& add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
    return *this;
  }

  Fnv1a& add(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= (v >> (8 * i)) & 0xffu;
      state_ *= kPrime;
    }
    return *this;
  }

  // Field separator so that ("ab","c") and ("a","bc") hash differently.
  Fnv1a& sep() {
    state_ ^= 0x1fu;
    state_ *= kPrime;
    return *this;
  }

  std::uint64_t digest() const { return state_; }

 private:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
  return Fnv1a().add(seed).sep().add(key).digest();
}

}  // namespace argmap
