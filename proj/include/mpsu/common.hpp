#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mpsu {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;
using MutByteSpan = std::span<std::uint8_t>;
using PartyId = std::size_t;

enum class Errc {
  InvalidConfig,
  CuckooFailure,
  EncodeSingular,
  OutOfDictionary,
  ChannelClosed,
  MalformedMessage,
  ModeMismatch,
  ReusedCorrelation,
  TriplesExhausted,
  ResourceExhausted,
  DimensionMismatch,
  Timeout,
  PeerCrash,
  ConfigMismatch,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline ByteSpan as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

void xor_into(MutByteSpan dst, ByteSpan src);
bool is_zero(ByteSpan b);
std::string to_hex(ByteSpan b);
Bytes from_hex(std::string_view hex);

inline std::size_t bits_to_bytes(std::size_t bits) { return (bits + 7) / 8; }

// Ceiling of log2(x) for x >= 1; 0 for x <= 1.
std::size_t ceil_log2(std::uint64_t x);

/// BLAKE2b over the concatenation of `parts`, optionally keyed. Output up to 64 bytes.
void blake2b(MutByteSpan out, std::initializer_list<ByteSpan> parts, ByteSpan key = {});

/// Arbitrary-length hash output: BLAKE2b for <= 64 bytes, otherwise a
/// ChaCha20 stream keyed by BLAKE2b of the input.
void hash_expand(MutByteSpan out, std::initializer_list<ByteSpan> parts);

inline Bytes u32_le(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
}
inline Bytes u64_le(std::uint64_t v) {
  Bytes out(8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * i));
  return out;
}
inline std::uint64_t load_u64_le(ByteSpan b) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < b.size() && i < 8; ++i) v |= std::uint64_t{b[i]} << (8 * i);
  return v;
}

/// Seeded deterministic random stream (ChaCha20 keystream). Every randomized
/// operation in the library draws from one of these, so transcripts replay
/// exactly under fixed seeds.
class Rng {
 public:
  using Seed = std::array<std::uint8_t, 32>;
  using result_type = std::uint64_t;

  explicit Rng(const Seed& seed);
  explicit Rng(std::uint64_t seed);
  static Rng from_parts(std::initializer_list<ByteSpan> parts);

  void fill(MutByteSpan out);
  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  std::uint8_t bit() { return static_cast<std::uint8_t>(next_u64() & 1); }
  /// Uniform in [0, bound); bound > 0.
  std::uint64_t uniform(std::uint64_t bound);
  /// Independent child stream; the parent stream is not advanced.
  Rng fork(std::string_view label) const;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  void refill();

  Seed key_{};
  std::uint32_t counter_ = 0;
  std::array<std::uint8_t, 256> buf_{};
  std::size_t pos_ = 256;
};

/// Fisher-Yates permutation of [0, n) drawn from `rng`.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

/// A vector of single bits stored one per byte (values 0/1). Packed only on the wire.
using BitVec = std::vector<std::uint8_t>;
Bytes pack_bits(const BitVec& bits);
BitVec unpack_bits(ByteSpan packed, std::size_t count);

/// Fixed-width rows stored contiguously: share vectors, OT pads, OKVS rows.
class RowVec {
 public:
  RowVec() = default;
  RowVec(std::size_t rows, std::size_t width) : rows_(rows), width_(width), data_(rows * width) {}

  static RowVec random(std::size_t rows, std::size_t width, Rng& rng) {
    RowVec v(rows, width);
    rng.fill(v.data_);
    return v;
  }
  static RowVec from_bytes(Bytes data, std::size_t width);

  std::size_t size() const { return rows_; }
  std::size_t width() const { return width_; }
  bool empty() const { return rows_ == 0; }
  MutByteSpan operator[](std::size_t i) { return {data_.data() + i * width_, width_}; }
  ByteSpan operator[](std::size_t i) const { return {data_.data() + i * width_, width_}; }
  const Bytes& bytes() const { return data_; }
  Bytes& bytes() { return data_; }

  RowVec& operator^=(const RowVec& other);
  friend RowVec operator^(RowVec a, const RowVec& b) { return a ^= b; }
  friend bool operator==(const RowVec&, const RowVec&) = default;

  /// out[i] = in[perm[i]]
  RowVec permuted(const std::vector<std::size_t>& perm) const;

 private:
  std::size_t rows_ = 0;
  std::size_t width_ = 0;
  Bytes data_;
};

/// Append-only wire encoder.
class Writer {
 public:
  Writer& u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
  }
  Writer& u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v));
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    return *this;
  }
  Writer& u32(std::uint32_t v) {
    auto b = u32_le(v);
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
  }
  Writer& u64(std::uint64_t v) {
    auto b = u64_le(v);
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
  }
  Writer& raw(ByteSpan b) {
    buf_.insert(buf_.end(), b.begin(), b.end());
    return *this;
  }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

/// Bounds-checked decoder; underflow raises MalformedMessage.
class Reader {
 public:
  explicit Reader(ByteSpan b) : b_(b) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  ByteSpan raw(std::size_t n);
  std::size_t remaining() const { return b_.size() - pos_; }
  void expect_end() const;

 private:
  ByteSpan b_;
  std::size_t pos_ = 0;
};

}  // namespace mpsu
