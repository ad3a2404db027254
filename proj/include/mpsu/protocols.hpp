#pragma once

#include <memory>
#include <vector>

#include "mpsu/binning.hpp"
#include "mpsu/group.hpp"
#include "mpsu/mkr_pke.hpp"
#include "mpsu/runtime.hpp"

namespace mpsu {

/// Public parameters every party of an MPSU run agrees on.
struct MpsuSetup {
  std::shared_ptr<const Group> group;
  ProtocolParams params;
  HashParams hash;
};

/// Setup for l-bit string elements (SK-MPSU).
MpsuSetup make_string_setup(std::shared_ptr<const Group> group, std::size_t m, std::size_t n, std::size_t l,
                            const std::array<std::uint8_t, 16>& hash_seed);
/// Setup for group-element inputs (PK-MPSU, private-ID): elements are encodings.
MpsuSetup make_group_setup(std::shared_ptr<const Group> group, std::size_t m, std::size_t n,
                           const std::array<std::uint8_t, 16>& hash_seed);

/// kappa-byte payload check value H(x) appended to elements in SK-MPSU.
Bytes payload_hash(ByteSpan x, std::size_t kappa_bytes);

/// Symmetric-key MPSU. Every party calls this with its own set (distinct
/// elements, at most n, each element_bytes long). Returns the sorted union
/// at party 0 and an empty vector elsewhere.
std::vector<Bytes> sk_mpsu(Party& p, const MpsuSetup& setup, const std::vector<Bytes>& set);

/// Public-key MPSU over group elements (identity is reserved for the dummy).
/// Returns the union at party 0, sorted by encoding.
std::vector<GroupElement> pk_mpsu(Party& p, const MpsuSetup& setup, const std::vector<GroupElement>& set);

struct PrivateIdOutput {
  std::vector<GroupElement> all;   // identifiers of the union, sorted by encoding
  std::vector<GroupElement> mine;  // identifiers of this party's elements, in input order
};

/// Multi-party private-ID: a distributed DH PRF over the ring, then PK-MPSU
/// on the PRF values; the leader broadcasts the union.
PrivateIdOutput private_id(Party& p, const MpsuSetup& setup, const std::vector<Bytes>& set);

/// Collusion attack on a cOPRF-based MPSU design with three parties where
/// P1 and P3 hold the same single element. P1 obtains F_k2(x1) through a
/// real OPRF with P2; P3's cOPRF output w (ideal functionality: F_k2(x3) if
/// x3 is not in X2, random otherwise) is compared against it.
struct AttackTrial {
  bool truth = false;     // x3 in X2
  bool inferred = false;  // F_k2(x1) != w
};
AttackTrial gnt_leakage_demo(const std::shared_ptr<const Group>& group, ByteSpan x1, const std::vector<Bytes>& X2,
                             ByteSpan x3, std::uint64_t seed, std::size_t gamma_bytes = 8);

}  // namespace mpsu
