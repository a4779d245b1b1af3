#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adshield {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline constexpr std::size_t kDigestSize = 32;
using Digest = std::array<std::uint8_t, kDigestSize>;
using MacKey = std::array<std::uint8_t, kDigestSize>;

inline ByteView as_bytes(std::string_view s) noexcept {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

Digest sha256(ByteView data);
Digest hmac_sha256(ByteView key, ByteView data);

// Constant-time comparison.
bool digest_equal(const Digest& a, const Digest& b) noexcept;

std::string to_hex(ByteView data);
std::string base64url_encode(ByteView data);
// Throws Error{ParseError} on malformed input.
Bytes base64url_decode(std::string_view text);
Digest digest_from_base64url(std::string_view text);

// Big-endian, length-prefixed builder for canonical MAC inputs.
class CanonicalWriter {
 public:
  CanonicalWriter& u8(std::uint8_t v);
  CanonicalWriter& u32(std::uint32_t v);
  CanonicalWriter& u64(std::uint64_t v);
  CanonicalWriter& i32(std::int32_t v);
  CanonicalWriter& raw(ByteView data);
  // u32-be length prefix followed by the bytes.
  CanonicalWriter& lp(ByteView data);
  CanonicalWriter& lp(std::string_view s) { return lp(as_bytes(s)); }

  const Bytes& bytes() const noexcept { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Byte source for keys and nonces. Seeded instances produce a reproducible
// HMAC-counter stream; unseeded instances draw from the OS CSPRNG.
class Entropy {
 public:
  explicit Entropy(std::optional<std::uint64_t> seed = std::nullopt);

  void fill(std::span<std::uint8_t> out);

  template <std::size_t N>
  std::array<std::uint8_t, N> draw() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }

  bool deterministic() const noexcept { return seeded_; }

 private:
  std::mutex mu_;
  bool seeded_;
  MacKey stream_key_{};
  std::uint64_t block_counter_ = 0;
  Digest block_{};
  std::size_t block_used_ = kDigestSize;
};

}  // namespace adshield
