#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "mpsu/common.hpp"

namespace mpsu {

/// Encoded group element. Only the first `Group::element_size()` bytes are
/// meaningful; the rest stay zero so equality is plain byte equality.
struct GroupElement {
  std::array<std::uint8_t, 32> bytes{};
  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

/// Exponent in Z_q, little-endian, always reduced.
struct Scalar {
  std::array<std::uint8_t, 32> bytes{};
  friend bool operator==(const Scalar&, const Scalar&) = default;
};

struct GroupElementHash {
  std::size_t operator()(const GroupElement& e) const noexcept {
    return static_cast<std::size_t>(load_u64_le({e.bytes.data(), 8})) * 0x9e3779b97f4a7c15ull;
  }
};

/// Prime-order cyclic group. Protocol code only talks to this interface.
class Group {
 public:
  virtual ~Group() = default;

  virtual std::string_view name() const = 0;
  virtual std::size_t element_size() const = 0;
  /// Group order q as a decimal string (for diagnostics and config hashing).
  virtual std::string order_string() const = 0;

  virtual GroupElement identity() const = 0;
  virtual GroupElement generator() const = 0;
  virtual GroupElement mul(const GroupElement& a, const GroupElement& b) const = 0;
  virtual GroupElement div(const GroupElement& a, const GroupElement& b) const = 0;
  virtual GroupElement exp(const GroupElement& base, const Scalar& s) const = 0;
  virtual GroupElement exp_base(const Scalar& s) const { return exp(generator(), s); }

  virtual Scalar random_scalar(Rng& rng) const = 0;
  virtual Scalar scalar_from_u64(std::uint64_t v) const = 0;
  virtual Scalar scalar_add(const Scalar& a, const Scalar& b) const = 0;
  virtual Scalar scalar_neg(const Scalar& a) const = 0;
  virtual Scalar scalar_mul(const Scalar& a, const Scalar& b) const = 0;
  /// Inverse modulo q; the zero scalar maps to zero.
  virtual Scalar scalar_inv(const Scalar& a) const = 0;
  bool scalar_is_zero(const Scalar& a) const { return a == Scalar{}; }

  /// Deterministic map to a non-identity element of unknown discrete log.
  virtual GroupElement hash_to_group(ByteSpan input) const = 0;

  /// Parses a fixed-length encoding; malformed or off-subgroup bytes raise MalformedMessage.
  virtual GroupElement decode(ByteSpan bytes) const = 0;
  ByteSpan encode(const GroupElement& e) const { return {e.bytes.data(), element_size()}; }

  bool is_identity(const GroupElement& e) const { return e == identity(); }
  Scalar random_nonzero_scalar(Rng& rng) const;
};

/// Order-q subgroup of Z_p^* with p = 2q + 1 (quadratic residues). Small
/// enough for brute-force oracles; not secure. Elements are 8-byte
/// little-endian residues.
class SafePrimeGroup final : public Group {
 public:
  SafePrimeGroup(std::string name, std::uint64_t p, std::uint64_t q, std::uint64_t g);

  std::string_view name() const override { return name_; }
  std::size_t element_size() const override { return 8; }
  std::string order_string() const override { return std::to_string(q_); }

  GroupElement identity() const override { return make(1); }
  GroupElement generator() const override { return make(g_); }
  GroupElement mul(const GroupElement& a, const GroupElement& b) const override;
  GroupElement div(const GroupElement& a, const GroupElement& b) const override;
  GroupElement exp(const GroupElement& base, const Scalar& s) const override;

  Scalar random_scalar(Rng& rng) const override;
  Scalar scalar_from_u64(std::uint64_t v) const override;
  Scalar scalar_add(const Scalar& a, const Scalar& b) const override;
  Scalar scalar_neg(const Scalar& a) const override;
  Scalar scalar_mul(const Scalar& a, const Scalar& b) const override;
  Scalar scalar_inv(const Scalar& a) const override;

  GroupElement hash_to_group(ByteSpan input) const override;
  GroupElement decode(ByteSpan bytes) const override;

  std::uint64_t p() const { return p_; }
  std::uint64_t q() const { return q_; }
  std::uint64_t value(const GroupElement& e) const { return load_u64_le({e.bytes.data(), 8}); }
  std::uint64_t scalar_value(const Scalar& s) const { return load_u64_le({s.bytes.data(), 8}); }
  GroupElement make(std::uint64_t v) const;

 private:
  std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) const {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
  }
  std::uint64_t powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) const;

  std::string name_;
  std::uint64_t p_, q_, g_;
};

/// ristretto255 (prime order ~2^252) via libsodium; 32-byte compressed encoding.
class RistrettoGroup final : public Group {
 public:
  std::string_view name() const override { return "ristretto255"; }
  std::size_t element_size() const override { return 32; }
  std::string order_string() const override;

  GroupElement identity() const override { return {}; }
  GroupElement generator() const override;
  GroupElement mul(const GroupElement& a, const GroupElement& b) const override;
  GroupElement div(const GroupElement& a, const GroupElement& b) const override;
  GroupElement exp(const GroupElement& base, const Scalar& s) const override;
  GroupElement exp_base(const Scalar& s) const override;

  Scalar random_scalar(Rng& rng) const override;
  Scalar scalar_from_u64(std::uint64_t v) const override;
  Scalar scalar_add(const Scalar& a, const Scalar& b) const override;
  Scalar scalar_neg(const Scalar& a) const override;
  Scalar scalar_mul(const Scalar& a, const Scalar& b) const override;
  Scalar scalar_inv(const Scalar& a) const override;

  GroupElement hash_to_group(ByteSpan input) const override;
  GroupElement decode(ByteSpan bytes) const override;
};

/// Default test group: q = 2147483543, p = 2q + 1, g = 4.
std::shared_ptr<const Group> test_group();
/// Tiny group (q = 1019) for exhaustive/brute-force checks.
std::shared_ptr<const Group> tiny_test_group();
std::shared_ptr<const Group> production_group();
/// "test", "tiny" or "production"; anything else raises InvalidConfig.
std::shared_ptr<const Group> group_by_name(std::string_view name);

}  // namespace mpsu
