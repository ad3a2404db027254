#include "mpsu/sspmt.hpp"

#include "mpsu/opprf.hpp"

namespace mpsu {

BitVec sspeqt_batch(Party& p, PartyId peer, bool first, const RowVec& inputs, std::size_t gamma_bits,
                    TripleShares& triples) {
  const std::size_t count = inputs.size();
  if (gamma_bits == 0 || gamma_bits > inputs.width() * 8)
    fail(Errc::DimensionMismatch, "sspeqt width");
  if (triples.remaining() < count * sspeqt_triples_per_test(gamma_bits))
    fail(Errc::TriplesExhausted, "not enough Beaver triples for sspeqt");

  // XNOR: the first party flips its bits, so shares reconstruct to [x_k = y_k]
  std::size_t width = gamma_bits;
  BitVec wires(count * width);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t k = 0; k < width; ++k)
      wires[i * width + k] = static_cast<std::uint8_t>(((inputs[i][k / 8] >> (k % 8)) & 1) ^ (first ? 1 : 0));

  while (width > 1) {
    const std::size_t pairs = width / 2;
    const std::size_t next_width = width - pairs;
    const std::size_t gates = count * pairs;
    const std::size_t t0 = triples.take(gates);
    const auto& A = triples.a();
    const auto& Bt = triples.b();
    const auto& C = triples.c();

    BitVec de(2 * gates);
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t k = 0; k < pairs; ++k) {
        const std::size_t gate = i * pairs + k;
        de[gate] = wires[i * width + 2 * k] ^ A[t0 + gate];
        de[gates + gate] = wires[i * width + 2 * k + 1] ^ Bt[t0 + gate];
      }
    p.send(peer, Tag::GmwAndLayer, pack_bits(de));
    auto msg = p.recv(peer, Tag::GmwAndLayer);
    if (msg.size() != bits_to_bytes(2 * gates)) fail(Errc::MalformedMessage, "GMW layer length");
    BitVec other = unpack_bits(msg, 2 * gates);

    BitVec next(count * next_width);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t k = 0; k < pairs; ++k) {
        const std::size_t gate = i * pairs + k;
        const std::uint8_t d = de[gate] ^ other[gate];
        const std::uint8_t e = de[gates + gate] ^ other[gates + gate];
        std::uint8_t z = C[t0 + gate] ^ (d & Bt[t0 + gate]) ^ (e & A[t0 + gate]);
        if (first) z ^= d & e;
        next[i * next_width + k] = z;
      }
      if (width % 2) next[i * next_width + pairs] = wires[i * width + width - 1];
    }
    wires = std::move(next);
    width = next_width;
  }
  return wires;
}

Bytes sspmt_item_key(const TaggedItem& item) {
  Bytes k;
  k.reserve(item.element.size() + 2);
  k.push_back(0x01);
  k.push_back(item.tag);
  k.insert(k.end(), item.element.begin(), item.element.end());
  return k;
}

Bytes sspmt_empty_key() { return Bytes{0x00}; }

BitVec sspmt_send(Party& p, PartyId receiver, const Group& g, const SimpleTable& table,
                  const ProtocolParams& params, TripleShares& triples) {
  const std::size_t bins = table.size();
  const std::size_t gb = params.gamma_bytes();
  RowVec s = RowVec::random(bins, gb, p.rng());
  std::vector<ProgrammedPoint> points;
  points.reserve(table.total_entries());
  for (std::size_t b = 0; b < bins; ++b)
    for (const auto& item : table[b]) {
      auto v = s[b];
      points.push_back({b, sspmt_item_key(item), Bytes(v.begin(), v.end())});
    }
  batch_opprf_send(p, receiver, g, bins, points, gb);
  std::string prev = p.phase();
  p.set_phase("sspeqt");
  auto out = sspeqt_batch(p, receiver, true, s, params.gamma, triples);
  p.restore_phase(prev);
  return out;
}

BitVec sspmt_recv(Party& p, PartyId sender, const Group& g, const CuckooTable& table,
                  const ProtocolParams& params, TripleShares& triples) {
  const std::size_t bins = table.size();
  std::vector<Bytes> queries;
  queries.reserve(bins);
  for (std::size_t b = 0; b < bins; ++b)
    queries.push_back(table[b] ? sspmt_item_key(*table[b]) : sspmt_empty_key());
  auto t = batch_opprf_recv(p, sender, g, queries, params.gamma_bytes());
  std::string prev = p.phase();
  p.set_phase("sspeqt");
  auto out = sspeqt_batch(p, sender, false, t, params.gamma, triples);
  p.restore_phase(prev);
  return out;
}

}  // namespace mpsu
