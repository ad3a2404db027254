#pragma once

#include <vector>

#include "mpsu/common.hpp"
#include "mpsu/group.hpp"
#include "mpsu/okvs.hpp"
#include "mpsu/runtime.hpp"

namespace mpsu {

/// Per-bin PRF keys held by the OPRF sender.
struct OprfKeyBatch {
  std::vector<Scalar> keys;
};

/// F(k, x) = H(x, H2G(x)^k), truncated to out_bytes.
Bytes oprf_eval(const Group& g, const Scalar& k, ByteSpan x, std::size_t out_bytes);

/// Blinded-exponentiation OPRF, one key per query position. The receiver
/// learns F(k_i, queries[i]); the sender learns the keys.
OprfKeyBatch batch_oprf_send(Party& p, PartyId receiver, const Group& g, std::size_t batch);
RowVec batch_oprf_recv(Party& p, PartyId sender, const Group& g, const std::vector<Bytes>& queries,
                       std::size_t out_bytes);

struct ProgrammedPoint {
  std::size_t bin = 0;
  Bytes key;
  Bytes value;
};

/// OKVS key for a programmed point: u32 bin || key.
Bytes opprf_okvs_key(std::size_t bin, ByteSpan key);

/// Batch OPPRF: OPRF per bin plus one OKVS over all bins encoding
/// key -> value xor F(k_bin, key). Keys must be distinct within a bin.
void batch_opprf_send(Party& p, PartyId receiver, const Group& g, std::size_t bins,
                      const std::vector<ProgrammedPoint>& points, std::size_t out_bytes,
                      const OkvsParams& okvs = {});
/// t_i = programmed value if queries[i] was programmed in bin i, else pseudorandom.
RowVec batch_opprf_recv(Party& p, PartyId sender, const Group& g, const std::vector<Bytes>& queries,
                        std::size_t out_bytes);

}  // namespace mpsu
