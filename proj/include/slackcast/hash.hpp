#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace slackcast {

/// 64-bit FNV-1a. Used for content checksums (token streams, id sets,
/// weight blobs); not a cryptographic hash.
class Fnv1a {
 public:
  Fnv1a& add(std::string_view bytes) {
    for (unsigned char c : bytes) {
      state_ ^= c;
      state_ *= kPrime;
    }
    return *this;
  }

  Fnv1a& add(std::span<const double> values) {
    for (double v : values) {
      unsigned char raw[sizeof(double)];
      std::memcpy(raw, &v, sizeof(double));
      add(std::string_view(reinterpret_cast<const char*>(raw), sizeof(double)));
    }
    return *this;
  }

  Fnv1a& add_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      state_ ^= static_cast<unsigned char>(v >> (8 * i));
      state_ *= kPrime;
    }
    return *this;
  }

  std::uint64_t value() const { return state_; }

 private:
  static constexpr std::uint64_t kOffset = 14695981039346656037ull;
  static constexpr std::uint64_t kPrime = 1099511628211ull;
  std::uint64_t state_ = kOffset;
};

inline std::uint64_t fnv1a(std::string_view bytes) { return Fnv1a().add(bytes).value(); }

}  // namespace slackcast
