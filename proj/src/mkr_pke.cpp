#include "mpsu/mkr_pke.hpp"

#include <map>
#include <mutex>

namespace mpsu {

KeyPair keygen(const Group& g, Rng& rng) { return keypair_from_secret(g, g.random_scalar(rng)); }

KeyPair keypair_from_secret(const Group& g, const Scalar& sk) { return {sk, g.exp_base(sk)}; }

GroupElement aggregate_public_key(const Group& g, std::span<const GroupElement> pks) {
  GroupElement acc = g.identity();
  for (const auto& pk : pks) acc = g.mul(acc, pk);
  return acc;
}

Ciphertext encrypt(const Group& g, const GroupElement& pk, const GroupElement& x, Rng& rng) {
  return encrypt_with_randomness(g, pk, x, g.random_scalar(rng));
}

Ciphertext encrypt_with_randomness(const Group& g, const GroupElement& pk, const GroupElement& x,
                                   const Scalar& r) {
  return {g.exp_base(r), g.mul(x, g.exp(pk, r))};
}

Ciphertext partial_decrypt(const Group& g, const Scalar& sk_share, const Ciphertext& ct) {
  return {ct.c1, g.div(ct.c2, g.exp(ct.c1, sk_share))};
}

GroupElement decrypt(const Group& g, const Scalar& sk, const Ciphertext& ct) {
  return g.div(ct.c2, g.exp(ct.c1, sk));
}

Ciphertext rerandomize(const Group& g, const GroupElement& pk, const Ciphertext& ct, Rng& rng) {
  return rerandomize_with_randomness(g, pk, ct, g.random_scalar(rng));
}

Ciphertext rerandomize_with_randomness(const Group& g, const GroupElement& pk,
                                       const Ciphertext& ct, const Scalar& r) {
  return {g.mul(ct.c1, g.exp_base(r)), g.mul(ct.c2, g.exp(pk, r))};
}

std::size_t ciphertext_size(const Group& g) { return 2 * g.element_size(); }

Bytes serialize_ciphertext(const Group& g, const Ciphertext& ct) {
  Bytes out;
  out.reserve(ciphertext_size(g));
  auto a = g.encode(ct.c1);
  auto b = g.encode(ct.c2);
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Ciphertext deserialize_ciphertext(const Group& g, ByteSpan bytes) {
  if (bytes.size() != ciphertext_size(g)) fail(Errc::MalformedMessage, "ciphertext length");
  const auto n = g.element_size();
  return {g.decode(bytes.first(n)), g.decode(bytes.subspan(n, n))};
}

ElementDictionary::ElementDictionary(std::shared_ptr<const Group> group, std::uint64_t bound)
    : group_(std::move(group)), bound_(bound) {
  if (bound_ == 0 || bound_ > (std::uint64_t{1} << 32))
    fail(Errc::InvalidConfig, "dictionary bound must be in [1, 2^32]");
  table_.reserve(bound_);
  const auto& g = *group_;
  GroupElement cur = g.generator();
  for (std::uint64_t x = 0; x < bound_; ++x) {
    table_.emplace(cur, static_cast<std::uint32_t>(x));
    cur = g.mul(cur, g.generator());
  }
}

GroupElement ElementDictionary::encode(std::uint64_t x) const {
  if (x >= bound_) fail(Errc::OutOfDictionary, "value exceeds dictionary bound");
  return group_->exp_base(group_->scalar_from_u64(x + 1));
}

std::uint64_t ElementDictionary::decode(const GroupElement& e) const {
  auto it = table_.find(e);
  if (it == table_.end()) fail(Errc::OutOfDictionary, "element not in dictionary");
  return it->second;
}

const ElementDictionary& ElementDictionary::shared(const std::shared_ptr<const Group>& group,
                                                   std::uint64_t bound) {
  static std::mutex mu;
  static std::map<std::pair<std::string, std::uint64_t>, std::unique_ptr<ElementDictionary>> cache;
  std::lock_guard lock(mu);
  auto key = std::make_pair(std::string(group->name()), bound);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<ElementDictionary>(group, bound);
  return *slot;
}

std::uint64_t element_to_u64(ByteSpan element) {
  std::uint64_t v = 0;
  for (auto b : element) v = v << 8 | b;
  return v;
}

Bytes u64_to_element(std::uint64_t v, std::size_t width) {
  Bytes out(width);
  for (std::size_t i = 0; i < width && i < 8; ++i) out[width - 1 - i] = static_cast<std::uint8_t>(v >> (8 * i));
  return out;
}

}  // namespace mpsu
