#include "mpsu/common.hpp"

#include <sodium.h>

#include <algorithm>

namespace mpsu {

namespace {

struct SodiumInit {
  SodiumInit() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
  }
};

void ensure_sodium() { static SodiumInit init; }

}  // namespace

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::CuckooFailure: return "CuckooFailure";
    case Errc::EncodeSingular: return "EncodeSingular";
    case Errc::OutOfDictionary: return "OutOfDictionary";
    case Errc::ChannelClosed: return "ChannelClosed";
    case Errc::MalformedMessage: return "MalformedMessage";
    case Errc::ModeMismatch: return "ModeMismatch";
    case Errc::ReusedCorrelation: return "ReusedCorrelation";
    case Errc::TriplesExhausted: return "TriplesExhausted";
    case Errc::ResourceExhausted: return "ResourceExhausted";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::Timeout: return "Timeout";
    case Errc::PeerCrash: return "PeerCrash";
    case Errc::ConfigMismatch: return "ConfigMismatch";
  }
  return "Unknown";
}

void xor_into(MutByteSpan dst, ByteSpan src) {
  if (dst.size() != src.size()) fail(Errc::DimensionMismatch, "xor of unequal lengths");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] ^= src[i];
}

bool is_zero(ByteSpan b) {
  return std::all_of(b.begin(), b.end(), [](std::uint8_t v) { return v == 0; });
}

std::string to_hex(ByteSpan b) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto v : b) {
    out.push_back(digits[v >> 4]);
    out.push_back(digits[v & 15]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) fail(Errc::MalformedMessage, "odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = nibble(hex[2 * i]);
    int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) fail(Errc::MalformedMessage, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::size_t ceil_log2(std::uint64_t x) {
  std::size_t r = 0;
  while ((std::uint64_t{1} << r) < x && r < 64) ++r;
  return r;
}

void blake2b(MutByteSpan out, std::initializer_list<ByteSpan> parts, ByteSpan key) {
  ensure_sodium();
  if (out.size() < crypto_generichash_BYTES_MIN || out.size() > crypto_generichash_BYTES_MAX) {
    // BLAKE2b accepts 1..64; short outputs are still produced by truncating a 16-byte digest.
    if (out.size() == 0) return;
    if (out.size() > crypto_generichash_BYTES_MAX)
      throw std::invalid_argument("blake2b output longer than 64 bytes");
    std::array<std::uint8_t, crypto_generichash_BYTES_MIN> tmp{};
    blake2b(tmp, parts, key);
    std::copy_n(tmp.begin(), out.size(), out.begin());
    return;
  }
  crypto_generichash_state st;
  crypto_generichash_init(&st, key.empty() ? nullptr : key.data(), key.size(), out.size());
  for (auto p : parts) {
    // length-prefix each part so concatenations are unambiguous
    auto len = u32_le(static_cast<std::uint32_t>(p.size()));
    crypto_generichash_update(&st, len.data(), len.size());
    crypto_generichash_update(&st, p.data(), p.size());
  }
  crypto_generichash_final(&st, out.data(), out.size());
}

void hash_expand(MutByteSpan out, std::initializer_list<ByteSpan> parts) {
  if (out.size() <= crypto_generichash_BYTES_MAX) {
    blake2b(out, parts);
    return;
  }
  std::array<std::uint8_t, 32> key{};
  blake2b(key, parts);
  std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
  std::fill(out.begin(), out.end(), 0);
  crypto_stream_chacha20_ietf_xor_ic(out.data(), out.data(), out.size(), nonce.data(), 0,
                                     key.data());
}

Rng::Rng(const Seed& seed) : key_(seed) { ensure_sodium(); }

Rng::Rng(std::uint64_t seed) {
  ensure_sodium();
  auto s = u64_le(seed);
  blake2b(key_, {as_bytes("mpsu.rng.seed"), s});
}

Rng Rng::from_parts(std::initializer_list<ByteSpan> parts) {
  Seed s{};
  blake2b(s, parts);
  return Rng(s);
}

void Rng::refill() {
  std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
  buf_.fill(0);
  crypto_stream_chacha20_ietf_xor_ic(buf_.data(), buf_.data(), buf_.size(), nonce.data(),
                                     counter_, key_.data());
  counter_ += static_cast<std::uint32_t>(buf_.size() / 64);
  pos_ = 0;
}

void Rng::fill(MutByteSpan out) {
  std::size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buf_.size()) refill();
    std::size_t take = std::min(out.size() - done, buf_.size() - pos_);
    std::memcpy(out.data() + done, buf_.data() + pos_, take);
    pos_ += take;
    done += take;
  }
}

Bytes Rng::bytes(std::size_t n) {
  Bytes b(n);
  fill(b);
  return b;
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  return load_u64_le(b);
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform bound must be positive");
  // rejection sampling to avoid modulo bias
  const std::uint64_t limit = max() - max() % bound;
  for (;;) {
    auto v = next_u64();
    if (v < limit) return v % bound;
  }
}

Rng Rng::fork(std::string_view label) const {
  return from_parts({key_, as_bytes(label)});
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.uniform(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

Bytes pack_bits(const BitVec& bits) {
  Bytes out(bits_to_bytes(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i)
    out[i / 8] |= static_cast<std::uint8_t>((bits[i] & 1) << (i % 8));
  return out;
}

BitVec unpack_bits(ByteSpan packed, std::size_t count) {
  if (packed.size() != bits_to_bytes(count)) fail(Errc::MalformedMessage, "packed bit length");
  BitVec out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = (packed[i / 8] >> (i % 8)) & 1;
  return out;
}

RowVec RowVec::from_bytes(Bytes data, std::size_t width) {
  if (width == 0 || data.size() % width != 0)
    fail(Errc::MalformedMessage, "row data not a multiple of the row width");
  RowVec v;
  v.rows_ = data.size() / width;
  v.width_ = width;
  v.data_ = std::move(data);
  return v;
}

RowVec& RowVec::operator^=(const RowVec& other) {
  if (rows_ != other.rows_ || width_ != other.width_)
    fail(Errc::DimensionMismatch, "xor of differently shaped row vectors");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] ^= other.data_[i];
  return *this;
}

RowVec RowVec::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != rows_) fail(Errc::DimensionMismatch, "permutation size");
  RowVec out(rows_, width_);
  for (std::size_t i = 0; i < rows_; ++i) std::memcpy(out[i].data(), (*this)[perm[i]].data(), width_);
  return out;
}

std::uint8_t Reader::u8() { return raw(1)[0]; }
std::uint16_t Reader::u16() {
  auto b = raw(2);
  return static_cast<std::uint16_t>(b[0] | b[1] << 8);
}
std::uint32_t Reader::u32() {
  auto b = raw(4);
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}
std::uint64_t Reader::u64() { return load_u64_le(raw(8)); }

ByteSpan Reader::raw(std::size_t n) {
  if (n > remaining()) fail(Errc::MalformedMessage, "truncated message");
  auto out = b_.subspan(pos_, n);
  pos_ += n;
  return out;
}

void Reader::expect_end() const {
  if (remaining() != 0) fail(Errc::MalformedMessage, "trailing bytes in message");
}

}  // namespace mpsu
