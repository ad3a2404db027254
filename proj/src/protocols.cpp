#include "mpsu/protocols.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "mpsu/mssrot.hpp"
#include "mpsu/opprf.hpp"
#include "mpsu/ot.hpp"
#include "mpsu/shuffle.hpp"
#include "mpsu/sspmt.hpp"

namespace mpsu {

MpsuSetup make_string_setup(std::shared_ptr<const Group> group, std::size_t m, std::size_t n, std::size_t l,
                            const std::array<std::uint8_t, 16>& hash_seed) {
  MpsuSetup s;
  s.group = std::move(group);
  s.params = derive_params(m, n, l);
  s.hash.seed = hash_seed;
  s.hash.bins = s.params.bins;
  s.hash.element_bytes = s.params.element_bytes();
  return s;
}

MpsuSetup make_group_setup(std::shared_ptr<const Group> group, std::size_t m, std::size_t n,
                           const std::array<std::uint8_t, 16>& hash_seed) {
  const std::size_t l = 8 * group->element_size();
  return make_string_setup(std::move(group), m, n, l, hash_seed);
}

Bytes payload_hash(ByteSpan x, std::size_t kappa_bytes) {
  Bytes h(kappa_bytes);
  blake2b(h, {as_bytes("mpsu.sk.payload"), x});
  return h;
}

namespace {

void check_input(const MpsuSetup& s, const std::vector<Bytes>& set, std::size_t m_parties) {
  if (m_parties != s.params.m) fail(Errc::InvalidConfig, "party count differs from parameters");
  if (set.size() > s.params.n) fail(Errc::InvalidConfig, "input set larger than n");
  std::set<Bytes> seen;
  for (const auto& x : set) {
    if (x.size() != s.hash.element_bytes) fail(Errc::InvalidConfig, "element width mismatch");
    if (!seen.insert(x).second) fail(Errc::InvalidConfig, "duplicate input element");
  }
}

struct Membership {
  std::optional<CuckooTable> cuckoo;
  std::vector<BitVec> e;  // e[k]: share of the ssPMT bits shared with party k
};

// Hashing to bins, then batch ssPMT for every pair i < j (i sender, j receiver).
Membership membership_phase(Party& p, const MpsuSetup& s, const std::vector<Bytes>& set) {
  const std::size_t m = p.num_parties();
  const PartyId me = p.id();
  const auto& params = s.params;
  Membership out;
  out.e.resize(m);

  std::optional<SimpleTable> simple;
  {
    PhaseScope ph(p, "binning");
    if (me + 1 < m) simple = simple_insert(s.hash, set);
    if (me > 0) out.cuckoo = cuckoo_insert(s.hash, set);
  }

  std::vector<TripleShares> triples(m);
  const std::size_t need = params.bins * sspeqt_triples_per_test(params.gamma);
  {
    PhaseScope ph(p, "triples");
    for (PartyId j = 1; j < m; ++j)
      for (PartyId i = 0; i < j; ++i) {
        if (me == i) triples[j] = triple_gen(p, j, need);
        if (me == j) triples[i] = triple_gen(p, i, need);
      }
  }
  {
    PhaseScope ph(p, "sspmt");
    for (PartyId j = 1; j < m; ++j)
      for (PartyId i = 0; i < j; ++i) {
        if (me == i) out.e[j] = sspmt_send(p, j, *s.group, *simple, params, triples[j]);
        if (me == j) out.e[i] = sspmt_recv(p, i, *s.group, *out.cuckoo, params, triples[i]);
      }
  }
  return out;
}

}  // namespace

std::vector<Bytes> sk_mpsu(Party& p, const MpsuSetup& s, const std::vector<Bytes>& set) {
  const std::size_t m = p.num_parties();
  const PartyId me = p.id();
  check_input(s, set, m);
  const auto& params = s.params;
  const std::size_t B = params.bins;
  const std::size_t lb = params.element_bytes();
  const std::size_t w = params.payload_bytes();

  auto mem = membership_phase(p, s, set);

  // u[j]: this party's share of the payloads of P_j's bins
  std::vector<RowVec> u(m);
  {
    PhaseScope ph(p, "mssrot");
    for (PartyId j = 1; j < m; ++j)
      for (PartyId i = 0; i < j; ++i) {
        const PartyId lo = std::min<PartyId>(1, i);
        if (me < lo || me > j) continue;
        MssRotConfig cfg;
        for (PartyId d = lo; d <= j; ++d) cfg.members.push_back(d);
        cfg.ch0 = i;
        cfg.ch1 = j;
        for (PartyId d = 1; d <= j; ++d) cfg.J.push_back(d);
        cfg.width = w;
        const BitVec* bits = me == i ? &mem.e[j] : me == j ? &mem.e[i] : nullptr;
        std::optional<RowVec> delta;
        if (me >= 1) delta = RowVec::random(B, w, p.rng());
        auto r = mss_rot_batch(p, cfg, B, bits, delta ? &*delta : nullptr);
        if (u[j].empty()) u[j] = RowVec(B, w);
        u[j] ^= r;
      }
    if (me >= 1) {
      for (std::size_t b = 0; b < B; ++b) {
        auto row = u[me][b];
        if (const auto& slot = (*mem.cuckoo)[b]) {
          xor_into(row.first(lb), slot->element);
          xor_into(row.subspan(lb), payload_hash(slot->element, params.kappa_bytes()));
        } else {
          p.rng().fill(row);
        }
      }
    }
  }

  RowVec sh((m - 1) * B, w);
  for (PartyId j = std::max<PartyId>(1, me); j < m; ++j)
    std::copy(u[j].bytes().begin(), u[j].bytes().end(), sh.bytes().begin() + static_cast<std::ptrdiff_t>((j - 1) * B * w));
#ifdef MPSU_TEST_HOOKS
  if (auto* h = p.hooks(); h && h->pre_shuffle_shares) h->pre_shuffle_shares(me, sh);
#endif

  RowVec shuffled;
  {
    PhaseScope ph(p, "shuffle");
    shuffled = ms_shuffle(p, sh);
  }

  PhaseScope ph(p, "reconstruct");
  if (me != 0) {
    p.send(0, Tag::ReconShares, std::move(shuffled.bytes()));
    return {};
  }
  for (PartyId j = 1; j < m; ++j) {
    auto msg = p.recv(j, Tag::ReconShares);
    if (msg.size() != shuffled.bytes().size()) fail(Errc::MalformedMessage, "share vector length");
    shuffled ^= RowVec::from_bytes(std::move(msg), w);
  }
#ifdef MPSU_TEST_HOOKS
  if (auto* h = p.hooks(); h && h->leader_reconstructed) h->leader_reconstructed(shuffled);
#endif
  std::set<Bytes> result(set.begin(), set.end());
  for (std::size_t k = 0; k < shuffled.size(); ++k) {
    auto row = shuffled[k];
    auto x = row.first(lb);
    auto tag = payload_hash(x, params.kappa_bytes());
    if (std::equal(tag.begin(), tag.end(), row.subspan(lb).begin())) result.emplace(x.begin(), x.end());
  }
  return {result.begin(), result.end()};
}

namespace {

bool element_less(const GroupElement& a, const GroupElement& b) { return a.bytes < b.bytes; }

std::vector<GroupElement> sorted_unique(std::vector<GroupElement> v) {
  std::sort(v.begin(), v.end(), element_less);
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

Bytes encode_cts(const Group& g, const std::vector<Ciphertext>& cts) {
  Writer w;
  for (const auto& c : cts) w.raw(serialize_ciphertext(g, c));
  return w.take();
}

std::vector<Ciphertext> decode_cts(const Group& g, ByteSpan bytes, std::size_t expected) {
  const std::size_t cs = ciphertext_size(g);
  if (bytes.size() != expected * cs) fail(Errc::DimensionMismatch, "unexpected ciphertext count");
  std::vector<Ciphertext> out;
  out.reserve(expected);
  for (std::size_t i = 0; i < expected; ++i) out.push_back(deserialize_ciphertext(g, bytes.subspan(i * cs, cs)));
  return out;
}

// Sender half of the oblivious replacement: messages arranged by the
// sender's own share so the receiver's share selects c or Enc(bottom).
void pk_replace_send(Party& p, PartyId receiver, const Group& g, const GroupElement& pk,
                     const std::vector<Ciphertext>& c, const BitVec& e_share) {
  const std::size_t B = c.size();
  const std::size_t cs = ciphertext_size(g);
  auto rot = rot_send(p, receiver, B, cs);
  derand_send(p, receiver, rot);
  RowVec msgs(B, 2 * cs);
  for (std::size_t b = 0; b < B; ++b) {
    auto row = msgs[b];
    const auto real = serialize_ciphertext(g, c[b]);
    const auto dummy = serialize_ciphertext(g, encrypt(g, pk, g.identity(), p.rng()));
    const std::uint8_t e = e_share[b] & 1;
    auto slot_real = row.subspan(e * cs, cs);
    auto slot_dummy = row.subspan((1 - e) * cs, cs);
    std::copy(real.begin(), real.end(), slot_real.begin());
    std::copy(dummy.begin(), dummy.end(), slot_dummy.begin());
    xor_into(row.first(cs), rot.r0[b]);
    xor_into(row.subspan(cs), rot.r1[b]);
  }
  p.send(receiver, Tag::PkOtMessages, std::move(msgs.bytes()));
}

std::vector<Ciphertext> pk_replace_recv(Party& p, PartyId sender, const Group& g, const BitVec& e_share) {
  const std::size_t B = e_share.size();
  const std::size_t cs = ciphertext_size(g);
  auto rot = rot_recv(p, sender, B, cs);
  derand_recv(p, sender, rot, e_share);
  auto msg = p.recv(sender, Tag::PkOtMessages);
  if (msg.size() != B * 2 * cs) fail(Errc::MalformedMessage, "replacement message length");
  RowVec msgs = RowVec::from_bytes(std::move(msg), 2 * cs);
  std::vector<Ciphertext> out;
  out.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    Bytes v(cs);
    auto chosen = msgs[b].subspan((e_share[b] & 1) * cs, cs);
    std::copy(chosen.begin(), chosen.end(), v.begin());
    xor_into(v, rot.rb[b]);
    out.push_back(deserialize_ciphertext(g, v));
  }
  return out;
}

}  // namespace

std::vector<GroupElement> pk_mpsu(Party& p, const MpsuSetup& s, const std::vector<GroupElement>& set) {
  const Group& g = *s.group;
  const std::size_t m = p.num_parties();
  const PartyId me = p.id();
  const std::size_t B = s.params.bins;
  if (s.hash.element_bytes != g.element_size()) fail(Errc::InvalidConfig, "setup is not for group elements");

  std::vector<Bytes> encoded;
  encoded.reserve(set.size());
  for (const auto& x : set) {
    if (g.is_identity(x)) fail(Errc::InvalidConfig, "the identity element is reserved");
    auto e = g.encode(x);
    encoded.emplace_back(e.begin(), e.end());
  }
  check_input(s, encoded, m);

  // distributed key generation
  const KeyPair kp = keypair_from_secret(g, g.random_nonzero_scalar(p.rng()));
  std::vector<GroupElement> pks(m);
  pks[me] = kp.pk;
  {
    PhaseScope ph(p, "setup");
    const auto enc = g.encode(kp.pk);
    for (PartyId k = 0; k < m; ++k)
      if (k != me) p.send(k, Tag::PkPublicKey, Bytes(enc.begin(), enc.end()));
    for (PartyId k = 0; k < m; ++k)
      if (k != me) {
        pks[k] = g.decode(p.recv(k, Tag::PkPublicKey));
        if (g.is_identity(pks[k])) fail(Errc::MalformedMessage, "identity public key");
      }
  }
  const GroupElement pk = aggregate_public_key(g, pks);
#ifdef MPSU_TEST_HOOKS
  if (auto* h = p.hooks(); h && h->pk_secret_key) h->pk_secret_key(me, kp.sk.bytes);
#endif

  auto mem = membership_phase(p, s, encoded);

  std::vector<Ciphertext> c;
  std::vector<Ciphertext> leader_cts;
  {
    PhaseScope ph(p, "ot_rerand");
    if (me >= 1) {
      c.reserve(B);
      for (std::size_t b = 0; b < B; ++b) {
        const auto& slot = (*mem.cuckoo)[b];
        const GroupElement x = slot ? g.decode(slot->element) : g.identity();
        c.push_back(encrypt(g, pk, x, p.rng()));
      }
    }
    for (PartyId j = 1; j < m; ++j)
      for (PartyId i = 1; i < j; ++i) {
        if (me == j) {
          pk_replace_send(p, i, g, pk, c, mem.e[i]);
          c = decode_cts(g, p.recv(i, Tag::PkRerand), B);
          for (auto& ct : c) ct = rerandomize(g, pk, ct, p.rng());
#ifdef MPSU_TEST_HOOKS
          if (auto* h = p.hooks(); h && h->pk_after_pass) h->pk_after_pass(j, i, c);
#endif
        } else if (me == i) {
          auto v = pk_replace_recv(p, j, g, mem.e[j]);
          for (auto& ct : v) ct = rerandomize(g, pk, ct, p.rng());
          p.send(j, Tag::PkRerand, encode_cts(g, v));
        }
      }
    for (PartyId j = 1; j < m; ++j) {
      if (me == j) pk_replace_send(p, 0, g, pk, c, mem.e[0]);
      if (me == 0) {
        auto v = pk_replace_recv(p, j, g, mem.e[j]);
        for (auto& ct : v) leader_cts.push_back(rerandomize(g, pk, ct, p.rng()));
      }
    }
  }

  PhaseScope ph(p, "mix");
  const std::size_t total = (m - 1) * B;
  if (me == 0) {
    auto perm = random_permutation(total, p.rng());
    std::vector<Ciphertext> shuffled(total);
    for (std::size_t k = 0; k < total; ++k) shuffled[k] = leader_cts[perm[k]];
    p.send(1, Tag::PkCiphertexts, encode_cts(g, shuffled));
    auto final_cts = decode_cts(g, p.recv(m - 1, Tag::PkCiphertexts), total);
    p.set_phase("reconstruct");
    std::vector<GroupElement> out(set.begin(), set.end());
    for (const auto& ct : final_cts) {
      const GroupElement pt = decrypt(g, kp.sk, ct);
      if (!is_bottom(g, pt)) out.push_back(pt);
    }
    return sorted_unique(std::move(out));
  }

  auto cts = decode_cts(g, p.recv(me - 1, Tag::PkCiphertexts), total);
  std::vector<GroupElement> rest{pks[0]};
  for (PartyId d = me + 1; d < m; ++d) rest.push_back(pks[d]);
  const GroupElement pk_rest = aggregate_public_key(g, rest);
  for (auto& ct : cts) ct = rerandomize(g, pk_rest, partial_decrypt(g, kp.sk, ct), p.rng());
  auto perm = random_permutation(total, p.rng());
  std::vector<Ciphertext> shuffled(total);
  for (std::size_t k = 0; k < total; ++k) shuffled[k] = cts[perm[k]];
  p.send((me + 1) % m, Tag::PkCiphertexts, encode_cts(g, shuffled));
  return {};
}

PrivateIdOutput private_id(Party& p, const MpsuSetup& s, const std::vector<Bytes>& set) {
  const Group& g = *s.group;
  const std::size_t m = p.num_parties();
  const PartyId me = p.id();
  const std::size_t es = g.element_size();
  if (s.hash.element_bytes != es) fail(Errc::InvalidConfig, "setup is not for group elements");

  const Scalar a = g.random_nonzero_scalar(p.rng());
  const Scalar k = g.random_nonzero_scalar(p.rng());
#ifdef MPSU_TEST_HOOKS
  if (auto* h = p.hooks(); h && h->pid_key) h->pid_key(me, k.bytes);
#endif

  PrivateIdOutput out;
  {
    PhaseScope ph(p, "pid_ring");
    const PartyId next = (me + 1) % m;
    const PartyId prev = (me + m - 1) % m;
    Writer w;
    for (const auto& x : set) w.raw(g.encode(g.exp(g.hash_to_group(x), a)));
    p.send(next, Tag::PidRing, w.take());
    // m - 1 foreign vectors pass through, then our own comes back
    for (std::size_t hop = 1; hop <= m; ++hop) {
      auto msg = p.recv(prev, Tag::PidRing);
      if (msg.size() % es != 0) fail(Errc::MalformedMessage, "ring vector length");
      const std::size_t cnt = msg.size() / es;
      if (hop < m) {
        Writer fw;
        for (std::size_t t = 0; t < cnt; ++t) fw.raw(g.encode(g.exp(g.decode(ByteSpan(msg).subspan(t * es, es)), k)));
        p.send(next, Tag::PidRing, fw.take());
      } else {
        if (cnt != set.size()) fail(Errc::MalformedMessage, "own ring vector changed size");
        const Scalar unmask = g.scalar_mul(g.scalar_inv(a), k);
        for (std::size_t t = 0; t < cnt; ++t)
          out.mine.push_back(g.exp(g.decode(ByteSpan(msg).subspan(t * es, es)), unmask));
      }
    }
  }

  auto uni = pk_mpsu(p, s, out.mine);
  PhaseScope ph(p, "broadcast");
  if (me == 0) {
    Writer w;
    for (const auto& r : uni) w.raw(g.encode(r));
    auto payload = w.take();
    for (PartyId d = 1; d < m; ++d) p.send(d, Tag::UnionBroadcast, payload);
    out.all = std::move(uni);
  } else {
    auto msg = p.recv(0, Tag::UnionBroadcast);
    if (msg.size() % es != 0) fail(Errc::MalformedMessage, "union broadcast length");
    for (std::size_t t = 0; t < msg.size() / es; ++t) out.all.push_back(g.decode(ByteSpan(msg).subspan(t * es, es)));
  }
  return out;
}

AttackTrial gnt_leakage_demo(const std::shared_ptr<const Group>& group, ByteSpan x1, const std::vector<Bytes>& X2,
                             ByteSpan x3, std::uint64_t seed, std::size_t gamma_bytes) {
  Rng master(seed);
  std::vector<Rng::Seed> seeds(2);
  for (auto& sd : seeds) master.fill(sd);
  PartyOptions opts;
  master.fill(opts.dealer_seed);
  auto parties = make_memory_parties(2, seeds, opts);

  // P1 (id 0) queries P2 (id 1) on x1 through the real OPRF
  Bytes f1;
  Scalar k2;
  const Bytes q(x1.begin(), x1.end());
  auto errors = run_parties(parties, [&](Party& p) {
    if (p.id() == 0) {
      auto out = batch_oprf_recv(p, 1, *group, {q}, gamma_bytes);
      f1.assign(out[0].begin(), out[0].end());
    } else {
      k2 = batch_oprf_send(p, 0, *group, 1).keys[0];
    }
  });
  rethrow_root_cause(errors);

  // cOPRF between P2 and P3 as an ideal functionality on (k2, X2) and x3
  AttackTrial t;
  t.truth = std::any_of(X2.begin(), X2.end(), [&](const Bytes& y) { return std::equal(y.begin(), y.end(), x3.begin(), x3.end()); });
  const Bytes w = t.truth ? master.bytes(gamma_bytes) : oprf_eval(*group, k2, x3, gamma_bytes);
  t.inferred = f1 != w;
  return t;
}

}  // namespace mpsu
