#pragma once

#include "mpsu/binning.hpp"
#include "mpsu/group.hpp"
#include "mpsu/ot.hpp"
#include "mpsu/runtime.hpp"

namespace mpsu {

/// AND gates needed to compare one pair of gamma-bit strings.
inline std::size_t sspeqt_triples_per_test(std::size_t gamma_bits) { return gamma_bits - 1; }
/// Depth of the balanced AND tree, i.e. communication rounds of sspeqt.
inline std::size_t sspeqt_layers(std::size_t gamma_bits) { return ceil_log2(gamma_bits); }

/// Secret-shared equality of many string pairs. Row i of `inputs` holds this
/// party's string (first gamma_bits bits used). Returns this party's share of
/// [x_i = y_i]. Exactly one of the two parties passes first = true.
BitVec sspeqt_batch(Party& p, PartyId peer, bool first, const RowVec& inputs, std::size_t gamma_bits,
                    TripleShares& triples);

/// OKVS/OPRF query key of a Cuckoo or Simple table entry, and the placeholder
/// queried for an empty Cuckoo bin (never programmed by any sender).
Bytes sspmt_item_key(const TaggedItem& item);
Bytes sspmt_empty_key();

/// Batch ssPMT, sender side: per bin, shares of [receiver's item in sender's bin].
BitVec sspmt_send(Party& p, PartyId receiver, const Group& g, const SimpleTable& table,
                  const ProtocolParams& params, TripleShares& triples);
BitVec sspmt_recv(Party& p, PartyId sender, const Group& g, const CuckooTable& table,
                  const ProtocolParams& params, TripleShares& triples);

}  // namespace mpsu
