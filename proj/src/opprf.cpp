#include "mpsu/opprf.hpp"

namespace mpsu {

namespace {

void finish_prf(const Group& g, ByteSpan x, const GroupElement& y, MutByteSpan out) {
  hash_expand(out, {as_bytes("mpsu.oprf"), u64_le(x.size()), x, g.encode(y)});
}

}  // namespace

Bytes oprf_eval(const Group& g, const Scalar& k, ByteSpan x, std::size_t out_bytes) {
  Bytes out(out_bytes);
  finish_prf(g, x, g.exp(g.hash_to_group(x), k), out);
  return out;
}

OprfKeyBatch batch_oprf_send(Party& p, PartyId receiver, const Group& g, std::size_t batch) {
  OprfKeyBatch kb;
  kb.keys.reserve(batch);
  for (std::size_t i = 0; i < batch; ++i) kb.keys.push_back(g.random_nonzero_scalar(p.rng()));

  auto msg = p.recv(receiver, Tag::OprfQuery);
  const std::size_t es = g.element_size();
  if (msg.size() != batch * es) fail(Errc::MalformedMessage, "OPRF query length");
  Writer w;
  for (std::size_t i = 0; i < batch; ++i) {
    auto blinded = g.decode(ByteSpan(msg).subspan(i * es, es));
    w.raw(g.encode(g.exp(blinded, kb.keys[i])));
  }
  p.send(receiver, Tag::OprfResponse, w.take());
  return kb;
}

namespace {

struct Blinding {
  std::vector<Scalar> r;
};

Blinding send_queries(Party& p, PartyId sender, const Group& g, const std::vector<Bytes>& queries) {
  Blinding bl;
  Writer w;
  for (const auto& q : queries) {
    const Scalar r = g.random_nonzero_scalar(p.rng());
    bl.r.push_back(r);
    w.raw(g.encode(g.exp(g.hash_to_group(q), r)));
  }
  p.send(sender, Tag::OprfQuery, w.take());
  return bl;
}

RowVec finish_queries(Party& p, PartyId sender, const Group& g, const std::vector<Bytes>& queries,
                      const Blinding& bl, std::size_t out_bytes) {
  auto msg = p.recv(sender, Tag::OprfResponse);
  const std::size_t es = g.element_size();
  if (msg.size() != queries.size() * es) fail(Errc::MalformedMessage, "OPRF response length");
  RowVec out(queries.size(), out_bytes);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    auto resp = g.decode(ByteSpan(msg).subspan(i * es, es));
    finish_prf(g, queries[i], g.exp(resp, g.scalar_inv(bl.r[i])), out[i]);
  }
  return out;
}

}  // namespace

RowVec batch_oprf_recv(Party& p, PartyId sender, const Group& g, const std::vector<Bytes>& queries,
                       std::size_t out_bytes) {
  auto bl = send_queries(p, sender, g, queries);
  return finish_queries(p, sender, g, queries, bl, out_bytes);
}

Bytes opprf_okvs_key(std::size_t bin, ByteSpan key) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(bin)).raw(key);
  return w.take();
}

void batch_opprf_send(Party& p, PartyId receiver, const Group& g, std::size_t bins,
                      const std::vector<ProgrammedPoint>& points, std::size_t out_bytes,
                      const OkvsParams& okvs) {
  auto kb = batch_oprf_send(p, receiver, g, bins);
  std::vector<Bytes> keys;
  keys.reserve(points.size());
  RowVec values(points.size(), out_bytes);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& pt = points[i];
    if (pt.bin >= bins) fail(Errc::DimensionMismatch, "programmed bin out of range");
    if (pt.value.size() != out_bytes) fail(Errc::DimensionMismatch, "programmed value width");
    keys.push_back(opprf_okvs_key(pt.bin, pt.key));
    auto f = oprf_eval(g, kb.keys[pt.bin], pt.key, out_bytes);
    auto row = values[i];
    std::copy(pt.value.begin(), pt.value.end(), row.begin());
    xor_into(row, f);
  }
  auto table = okvs_encode(keys, values, out_bytes, p.rng(), okvs);
  p.send(receiver, Tag::OkvsTable, table.serialize());
}

RowVec batch_opprf_recv(Party& p, PartyId sender, const Group& g, const std::vector<Bytes>& queries,
                        std::size_t out_bytes) {
  auto prf = batch_oprf_recv(p, sender, g, queries, out_bytes);
  auto table = OkvsTable::deserialize(p.recv(sender, Tag::OkvsTable));
  if (table.value_bytes() != out_bytes) fail(Errc::MalformedMessage, "OKVS value width");
  for (std::size_t i = 0; i < queries.size(); ++i) xor_into(prf[i], table.decode(opprf_okvs_key(i, queries[i])));
  return prf;
}

}  // namespace mpsu
