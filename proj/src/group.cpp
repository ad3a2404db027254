#include "mpsu/group.hpp"

#include <sodium.h>

namespace mpsu {

Scalar Group::random_nonzero_scalar(Rng& rng) const {
  for (;;) {
    auto s = random_scalar(rng);
    if (!scalar_is_zero(s)) return s;
  }
}

// ---------------------------------------------------------------------------
// SafePrimeGroup

SafePrimeGroup::SafePrimeGroup(std::string name, std::uint64_t p, std::uint64_t q, std::uint64_t g)
    : name_(std::move(name)), p_(p), q_(q), g_(g) {
  if (p != 2 * q + 1 || p >= (std::uint64_t{1} << 63))
    throw std::invalid_argument("safe-prime group requires p = 2q + 1 < 2^63");
  if (g <= 1 || g >= p || powmod(g, q, p) != 1)
    throw std::invalid_argument("generator is not of order q");
}

std::uint64_t SafePrimeGroup::powmod(std::uint64_t base, std::uint64_t e, std::uint64_t m) const {
  std::uint64_t result = 1 % m;
  base %= m;
  while (e) {
    if (e & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    e >>= 1;
  }
  return result;
}

GroupElement SafePrimeGroup::make(std::uint64_t v) const {
  GroupElement e;
  auto b = u64_le(v);
  std::copy(b.begin(), b.end(), e.bytes.begin());
  return e;
}

GroupElement SafePrimeGroup::mul(const GroupElement& a, const GroupElement& b) const {
  return make(mulmod(value(a), value(b), p_));
}

GroupElement SafePrimeGroup::div(const GroupElement& a, const GroupElement& b) const {
  // b^(q-1) = b^-1 inside the order-q subgroup
  return make(mulmod(value(a), powmod(value(b), q_ - 1, p_), p_));
}

GroupElement SafePrimeGroup::exp(const GroupElement& base, const Scalar& s) const {
  return make(powmod(value(base), scalar_value(s), p_));
}

Scalar SafePrimeGroup::scalar_from_u64(std::uint64_t v) const {
  Scalar s;
  auto b = u64_le(v % q_);
  std::copy(b.begin(), b.end(), s.bytes.begin());
  return s;
}

Scalar SafePrimeGroup::random_scalar(Rng& rng) const { return scalar_from_u64(rng.uniform(q_)); }

Scalar SafePrimeGroup::scalar_add(const Scalar& a, const Scalar& b) const {
  return scalar_from_u64((scalar_value(a) + scalar_value(b)) % q_);
}

Scalar SafePrimeGroup::scalar_neg(const Scalar& a) const {
  return scalar_from_u64((q_ - scalar_value(a) % q_) % q_);
}

Scalar SafePrimeGroup::scalar_mul(const Scalar& a, const Scalar& b) const {
  return scalar_from_u64(mulmod(scalar_value(a), scalar_value(b), q_));
}

Scalar SafePrimeGroup::scalar_inv(const Scalar& a) const {
  return scalar_from_u64(powmod(scalar_value(a), q_ - 2, q_));
}

GroupElement SafePrimeGroup::hash_to_group(ByteSpan input) const {
  // try-and-increment: square a hashed residue to land in the QR subgroup
  for (std::uint32_t ctr = 0;; ++ctr) {
    std::array<std::uint8_t, 16> h{};
    auto c = u32_le(ctr);
    blake2b(h, {as_bytes("mpsu.h2g.safeprime"), c, input});
    auto v = static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(load_u64_le({h.data(), 8})) << 64 |
         load_u64_le({h.data() + 8, 8})) %
        p_);
    if (v <= 1 || v == p_ - 1) continue;
    return make(mulmod(v, v, p_));
  }
}

GroupElement SafePrimeGroup::decode(ByteSpan bytes) const {
  if (bytes.size() != element_size()) fail(Errc::MalformedMessage, "group element length");
  auto v = load_u64_le(bytes);
  if (v == 0 || v >= p_ || powmod(v, q_, p_) != 1)
    fail(Errc::MalformedMessage, "not an element of the order-q subgroup");
  return make(v);
}

// ---------------------------------------------------------------------------
// RistrettoGroup

namespace {

GroupElement from_raw(const unsigned char* p) {
  GroupElement e;
  std::copy_n(p, 32, e.bytes.begin());
  return e;
}

}  // namespace

std::string RistrettoGroup::order_string() const {
  return "7237005577332262213973186563042994240857116359379907606001950938285454250989";
}

GroupElement RistrettoGroup::generator() const {
  Scalar one = scalar_from_u64(1);
  return exp_base(one);
}

GroupElement RistrettoGroup::mul(const GroupElement& a, const GroupElement& b) const {
  GroupElement r;
  if (crypto_core_ristretto255_add(r.bytes.data(), a.bytes.data(), b.bytes.data()) != 0)
    fail(Errc::MalformedMessage, "invalid ristretto255 point");
  return r;
}

GroupElement RistrettoGroup::div(const GroupElement& a, const GroupElement& b) const {
  GroupElement r;
  if (crypto_core_ristretto255_sub(r.bytes.data(), a.bytes.data(), b.bytes.data()) != 0)
    fail(Errc::MalformedMessage, "invalid ristretto255 point");
  return r;
}

GroupElement RistrettoGroup::exp(const GroupElement& base, const Scalar& s) const {
  GroupElement r;
  // A -1 return with an all-zero output only signals an identity result.
  if (crypto_scalarmult_ristretto255(r.bytes.data(), s.bytes.data(), base.bytes.data()) != 0 &&
      !is_zero(r.bytes))
    fail(Errc::MalformedMessage, "invalid ristretto255 point");
  return r;
}

GroupElement RistrettoGroup::exp_base(const Scalar& s) const {
  GroupElement r;
  crypto_scalarmult_ristretto255_base(r.bytes.data(), s.bytes.data());
  return r;
}

Scalar RistrettoGroup::random_scalar(Rng& rng) const {
  std::array<std::uint8_t, crypto_core_ristretto255_NONREDUCEDSCALARBYTES> wide{};
  rng.fill(wide);
  Scalar s;
  crypto_core_ristretto255_scalar_reduce(s.bytes.data(), wide.data());
  return s;
}

Scalar RistrettoGroup::scalar_from_u64(std::uint64_t v) const {
  Scalar s;
  auto b = u64_le(v);
  std::copy(b.begin(), b.end(), s.bytes.begin());
  return s;
}

Scalar RistrettoGroup::scalar_add(const Scalar& a, const Scalar& b) const {
  Scalar r;
  crypto_core_ristretto255_scalar_add(r.bytes.data(), a.bytes.data(), b.bytes.data());
  return r;
}

Scalar RistrettoGroup::scalar_neg(const Scalar& a) const {
  Scalar r;
  crypto_core_ristretto255_scalar_negate(r.bytes.data(), a.bytes.data());
  return r;
}

Scalar RistrettoGroup::scalar_mul(const Scalar& a, const Scalar& b) const {
  Scalar r;
  crypto_core_ristretto255_scalar_mul(r.bytes.data(), a.bytes.data(), b.bytes.data());
  return r;
}

Scalar RistrettoGroup::scalar_inv(const Scalar& a) const {
  Scalar r;
  if (crypto_core_ristretto255_scalar_invert(r.bytes.data(), a.bytes.data()) != 0) return Scalar{};
  return r;
}

GroupElement RistrettoGroup::hash_to_group(ByteSpan input) const {
  for (std::uint32_t ctr = 0;; ++ctr) {
    std::array<std::uint8_t, crypto_core_ristretto255_HASHBYTES> h{};
    auto c = u32_le(ctr);
    blake2b(h, {as_bytes("mpsu.h2g.ristretto255"), c, input});
    GroupElement r;
    crypto_core_ristretto255_from_hash(r.bytes.data(), h.data());
    if (!is_identity(r)) return r;
  }
}

GroupElement RistrettoGroup::decode(ByteSpan bytes) const {
  if (bytes.size() != element_size()) fail(Errc::MalformedMessage, "group element length");
  if (is_zero(bytes)) return identity();
  if (crypto_core_ristretto255_is_valid_point(bytes.data()) != 1)
    fail(Errc::MalformedMessage, "invalid ristretto255 encoding");
  return from_raw(bytes.data());
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Group> test_group() {
  static auto g = std::make_shared<const SafePrimeGroup>("test", 4294967087ull, 2147483543ull, 4);
  return g;
}

std::shared_ptr<const Group> tiny_test_group() {
  static auto g = std::make_shared<const SafePrimeGroup>("tiny", 2039, 1019, 4);
  return g;
}

std::shared_ptr<const Group> production_group() {
  if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
  static auto g = std::make_shared<const RistrettoGroup>();
  return g;
}

std::shared_ptr<const Group> group_by_name(std::string_view name) {
  if (name == "test") return test_group();
  if (name == "tiny") return tiny_test_group();
  if (name == "production" || name == "ristretto255") return production_group();
  fail(Errc::InvalidConfig, "unknown group '" + std::string(name) + "'");
}

}  // namespace mpsu
