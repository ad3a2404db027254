#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <unordered_map>

#include "mpsu/group.hpp"

namespace mpsu {

struct KeyPair {
  Scalar sk;
  GroupElement pk;
};

/// ElGamal ciphertext (g^r, x * pk^r).
struct Ciphertext {
  GroupElement c1;
  GroupElement c2;
  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

// Multi-key rerandomizable ElGamal. The identity element is the dummy
// plaintext (bottom) and is never a legal set element.

KeyPair keygen(const Group& g, Rng& rng);
KeyPair keypair_from_secret(const Group& g, const Scalar& sk);
/// Product of public keys: the key for the sum of the secret shares.
GroupElement aggregate_public_key(const Group& g, std::span<const GroupElement> pks);

Ciphertext encrypt(const Group& g, const GroupElement& pk, const GroupElement& x, Rng& rng);
Ciphertext encrypt_with_randomness(const Group& g, const GroupElement& pk, const GroupElement& x,
                                   const Scalar& r);
/// Strips one key share: (c1, c2 * c1^-sk).
Ciphertext partial_decrypt(const Group& g, const Scalar& sk_share, const Ciphertext& ct);
GroupElement decrypt(const Group& g, const Scalar& sk, const Ciphertext& ct);
Ciphertext rerandomize(const Group& g, const GroupElement& pk, const Ciphertext& ct, Rng& rng);
Ciphertext rerandomize_with_randomness(const Group& g, const GroupElement& pk,
                                       const Ciphertext& ct, const Scalar& r);

inline bool is_bottom(const Group& g, const GroupElement& pt) { return g.is_identity(pt); }

std::size_t ciphertext_size(const Group& g);
Bytes serialize_ciphertext(const Group& g, const Ciphertext& ct);
Ciphertext deserialize_ciphertext(const Group& g, ByteSpan bytes);

/// Invertible embedding of small integers: x -> g^(x+1), decoded by table
/// lookup. The +1 offset keeps the identity (bottom) out of the image.
class ElementDictionary {
 public:
  static constexpr std::uint64_t kDefaultBound = std::uint64_t{1} << 20;

  ElementDictionary(std::shared_ptr<const Group> group, std::uint64_t bound = kDefaultBound);

  std::uint64_t bound() const { return bound_; }
  GroupElement encode(std::uint64_t x) const;
  /// Throws OutOfDictionary when `e` is not g^(x+1) for some x < bound.
  std::uint64_t decode(const GroupElement& e) const;

  /// Process-wide cached dictionary (tables are costly to build).
  static const ElementDictionary& shared(const std::shared_ptr<const Group>& group,
                                         std::uint64_t bound = kDefaultBound);

 private:
  std::shared_ptr<const Group> group_;
  std::uint64_t bound_;
  std::unordered_map<GroupElement, std::uint32_t, GroupElementHash> table_;
};

/// Big-endian integer value of an element bit string (at most 8 bytes used).
std::uint64_t element_to_u64(ByteSpan element);
Bytes u64_to_element(std::uint64_t v, std::size_t width);

}  // namespace mpsu
