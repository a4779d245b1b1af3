#include "adshield/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <algorithm>
#include <cstring>

#include "adshield/error.hpp"

namespace adshield {

Digest sha256(ByteView data) {
  Digest out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(),
                 nullptr) != 1 ||
      len != kDigestSize) {
    throw std::runtime_error("EVP_Digest(SHA-256) failed");
  }
  return out;
}

Digest hmac_sha256(ByteView key, ByteView data) {
  Digest out{};
  unsigned int len = 0;
  // OpenSSL rejects a null key pointer even for zero-length keys.
  static const std::uint8_t kEmpty = 0;
  const void* key_ptr = key.empty() ? &kEmpty : key.data();
  if (HMAC(EVP_sha256(), key_ptr, static_cast<int>(key.size()), data.data(),
           data.size(), out.data(), &len) == nullptr ||
      len != kDigestSize) {
    throw std::runtime_error("HMAC-SHA256 failed");
  }
  return out;
}

bool digest_equal(const Digest& a, const Digest& b) noexcept {
  return CRYPTO_memcmp(a.data(), b.data(), kDigestSize) == 0;
}

std::string to_hex(ByteView data) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0x0f]);
  }
  return out;
}

std::string base64url_encode(ByteView data) {
  if (data.empty()) return {};
  std::string out(4 * ((data.size() + 2) / 3) + 1, '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          data.data(), static_cast<int>(data.size()));
  out.resize(static_cast<std::size_t>(n));
  while (!out.empty() && out.back() == '=') out.pop_back();
  std::replace(out.begin(), out.end(), '+', '-');
  std::replace(out.begin(), out.end(), '/', '_');
  return out;
}

Bytes base64url_decode(std::string_view text) {
  if (text.empty()) return {};
  if (text.size() % 4 == 1) {
    throw Error(Errc::ParseError, "base64url: invalid length");
  }
  std::string std_alphabet;
  std_alphabet.reserve(text.size() + 3);
  for (char c : text) {
    if (c == '-') {
      std_alphabet.push_back('+');
    } else if (c == '_') {
      std_alphabet.push_back('/');
    } else if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
               (c >= '0' && c <= '9')) {
      std_alphabet.push_back(c);
    } else {
      throw Error(Errc::ParseError, "base64url: invalid character");
    }
  }
  std::size_t padding = (4 - std_alphabet.size() % 4) % 4;
  std_alphabet.append(padding, '=');

  Bytes out(std_alphabet.size() / 4 * 3);
  int n = EVP_DecodeBlock(out.data(),
                          reinterpret_cast<const unsigned char*>(std_alphabet.data()),
                          static_cast<int>(std_alphabet.size()));
  if (n < 0) throw Error(Errc::ParseError, "base64url: decode failed");
  out.resize(static_cast<std::size_t>(n) - padding);
  // Reject non-canonical trailing bits so each value has one encoding.
  if (base64url_encode(out) != text) {
    throw Error(Errc::ParseError, "base64url: non-canonical encoding");
  }
  return out;
}

Digest digest_from_base64url(std::string_view text) {
  Bytes raw = base64url_decode(text);
  if (raw.size() != kDigestSize) {
    throw Error(Errc::ParseError, "expected a 32-byte value");
  }
  Digest out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

CanonicalWriter& CanonicalWriter::u8(std::uint8_t v) {
  buf_.push_back(v);
  return *this;
}

CanonicalWriter& CanonicalWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  return *this;
}

CanonicalWriter& CanonicalWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    buf_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  return *this;
}

CanonicalWriter& CanonicalWriter::i32(std::int32_t v) {
  return u32(static_cast<std::uint32_t>(v));
}

CanonicalWriter& CanonicalWriter::raw(ByteView data) {
  buf_.insert(buf_.end(), data.begin(), data.end());
  return *this;
}

CanonicalWriter& CanonicalWriter::lp(ByteView data) {
  u32(static_cast<std::uint32_t>(data.size()));
  return raw(data);
}

Entropy::Entropy(std::optional<std::uint64_t> seed) : seeded_(seed.has_value()) {
  if (seeded_) {
    stream_key_ = sha256(CanonicalWriter{}
                             .lp(std::string_view{"adshield-entropy"})
                             .u64(*seed)
                             .bytes());
  }
}

void Entropy::fill(std::span<std::uint8_t> out) {
  std::lock_guard lock(mu_);
  if (!seeded_) {
    if (!out.empty() &&
        RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
      throw std::runtime_error("RAND_bytes failed");
    }
    return;
  }
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (block_used_ == kDigestSize) {
      block_ = hmac_sha256(stream_key_, CanonicalWriter{}.u64(block_counter_++).bytes());
      block_used_ = 0;
    }
    std::size_t n = std::min(out.size() - pos, kDigestSize - block_used_);
    std::memcpy(out.data() + pos, block_.data() + block_used_, n);
    pos += n;
    block_used_ += n;
  }
}

}  // namespace adshield
