#pragma once

#include <functional>
#include <vector>

#include "mpsu/common.hpp"
#include "mpsu/runtime.hpp"

namespace mpsu {

using Permutation = std::vector<std::size_t>;  // out[i] = in[perm[i]]

bool is_permutation(const Permutation& perm);
Permutation compose(const Permutation& outer, const Permutation& inner);  // apply inner, then outer
Permutation identity_permutation(std::size_t n);
std::size_t next_pow2(std::size_t n);

// Waksman network on n = 2^k wires. Switch order: input column, top
// subnetwork, bottom subnetwork, output column (its first switch is fixed).

std::size_t waksman_switch_count(std::size_t n);
/// Switch settings realising `perm` (size a power of two).
std::vector<std::uint8_t> waksman_route(const Permutation& perm);

using SwitchFn = std::function<void(std::size_t index, ByteSpan in0, ByteSpan in1, MutByteSpan out0,
                                    MutByteSpan out1)>;
/// Pushes rows through the network topology; `fn` decides every switch.
RowVec waksman_eval(const RowVec& in, const SwitchFn& fn);
/// Plain evaluation with the given switch bits.
RowVec waksman_apply(const RowVec& in, const std::vector<std::uint8_t>& bits);

/// Two-party Permute+Share. The permuter's result a and the holder's result
/// b satisfy a xor b = perm(x). Dealer mode uses a share-translation
/// correlation; interactive mode an oblivious switching network with one
/// chosen-bit OT per switch.
RowVec permute_share_permuter(Party& p, PartyId holder, const Permutation& perm, std::size_t width);
RowVec permute_share_holder(Party& p, PartyId permuter, const RowVec& x);

/// Multi-party secret-shared shuffle over all parties of the session: party k
/// permutes in round k, so the composed permutation is hidden from any
/// coalition missing one party. Every party passes its share vector.
RowVec ms_shuffle(Party& p, const RowVec& shares);

}  // namespace mpsu
