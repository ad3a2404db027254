#include "mpsu/ot.hpp"

#include "mpsu/group.hpp"

namespace mpsu {

namespace {

constexpr std::uint8_t kModeDealer = 1;
constexpr std::uint8_t kModeInteractive = 2;

std::uint8_t mode_byte(const Party& p) {
  return p.resources() == ResourceMode::Dealer ? kModeDealer : kModeInteractive;
}

void send_setup(Party& p, PartyId peer, Tag tag, std::size_t count, std::size_t width) {
  Writer w;
  w.u8(mode_byte(p)).u32(static_cast<std::uint32_t>(count)).u32(static_cast<std::uint32_t>(width));
  p.send(peer, tag, w.take());
}

void check_setup(Party& p, PartyId peer, Tag tag, std::size_t count, std::size_t width) {
  auto msg = p.recv(peer, tag);
  Reader r(msg);
  const auto mode = r.u8();
  const std::size_t c = r.u32();
  const std::size_t w = r.u32();
  r.expect_end();
  if (mode != mode_byte(p)) fail(Errc::ModeMismatch, "peer uses a different resource mode");
  if (c != count || w != width) fail(Errc::DimensionMismatch, "peer expects a different OT batch shape");
}

// Dealer: both ends expand the same stream and keep their own half.
struct DealtRot {
  RowVec r0, r1;
  BitVec choice;
};

DealtRot deal_rot(Party& p, PartyId sender, PartyId receiver, std::size_t count, std::size_t width) {
  Rng s = p.dealer_stream("rot", sender, receiver);
  DealtRot d;
  d.r0 = RowVec::random(count, width, s);
  d.r1 = RowVec::random(count, width, s);
  d.choice.resize(count);
  for (auto& c : d.choice) c = s.bit();
  return d;
}

void ro_hash(MutByteSpan out, std::string_view label, std::size_t index, ByteSpan a, ByteSpan b = {}) {
  hash_expand(out, {as_bytes(label), u64_le(index), a, b});
}

// Chou-Orlandi "simplest" OT over ristretto255. The base sender publishes
// A = g^a; the receiver answers B_i = g^x_i (choice 0) or A g^x_i (choice 1).

RotSender base_send(Party& p, PartyId receiver, std::size_t count, std::size_t width) {
  const Group& g = *production_group();
  const Scalar a = g.random_nonzero_scalar(p.rng());
  const GroupElement A = g.exp_base(a);
  p.send(receiver, Tag::OtBaseS1, Bytes(g.encode(A).begin(), g.encode(A).end()));

  auto msg = p.recv(receiver, Tag::OtBaseS2);
  const std::size_t es = g.element_size();
  if (msg.size() != count * es) fail(Errc::MalformedMessage, "base OT reply length");
  RotSender out{RowVec(count, width), RowVec(count, width)};
  const GroupElement Aa = g.exp(A, a);
  for (std::size_t i = 0; i < count; ++i) {
    const GroupElement B = g.decode(ByteSpan(msg).subspan(i * es, es));
    const GroupElement k0 = g.exp(B, a);
    const GroupElement k1 = g.div(k0, Aa);  // (B / A)^a
    ro_hash(out.r0[i], "mpsu.ot.base", i, g.encode(B), g.encode(k0));
    ro_hash(out.r1[i], "mpsu.ot.base", i, g.encode(B), g.encode(k1));
  }
  return out;
}

RotReceiver base_recv(Party& p, PartyId sender, std::size_t count, std::size_t width) {
  const Group& g = *production_group();
  auto msg = p.recv(sender, Tag::OtBaseS1);
  const GroupElement A = g.decode(msg);
  RotReceiver out{BitVec(count), RowVec(count, width)};
  Writer w;
  std::vector<GroupElement> keys(count);
  std::vector<GroupElement> Bs(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.choice[i] = p.rng().bit();
    const Scalar x = g.random_scalar(p.rng());
    GroupElement B = g.exp_base(x);
    if (out.choice[i]) B = g.mul(A, B);
    Bs[i] = B;
    keys[i] = g.exp(A, x);
    w.raw(g.encode(B));
  }
  p.send(sender, Tag::OtBaseS2, w.take());
  for (std::size_t i = 0; i < count; ++i)
    ro_hash(out.rb[i], "mpsu.ot.base", i, g.encode(Bs[i]), g.encode(keys[i]));
  return out;
}

// IKNP extension. Roles flip for the base OTs: the extension sender picks
// s in {0,1}^128 and receives one seed per column.

constexpr std::size_t kSeedBytes = 16;

Bytes prg_column(ByteSpan seed, std::size_t column, std::size_t nbytes) {
  Rng r = Rng::from_parts({as_bytes("mpsu.ot.iknp.prg"), seed, u64_le(column)});
  return r.bytes(nbytes);
}

// column-major (128 columns of count bits) -> row-major (count rows of 16 bytes)
RowVec transpose(const std::vector<Bytes>& cols, std::size_t count) {
  RowVec rows(count, kIknpBaseCount / 8);
  for (std::size_t j = 0; j < kIknpBaseCount; ++j) {
    const auto& col = cols[j];
    const std::uint8_t mask = static_cast<std::uint8_t>(1u << (j % 8));
    for (std::size_t i = 0; i < count; ++i)
      if ((col[i / 8] >> (i % 8)) & 1) rows[i][j / 8] |= mask;
  }
  return rows;
}

RotSender iknp_send(Party& p, PartyId receiver, std::size_t count, std::size_t width) {
  auto base = base_recv(p, receiver, kIknpBaseCount, kSeedBytes);
  const std::size_t nbytes = bits_to_bytes(count);
  auto msg = p.recv(receiver, Tag::OtExtMatrix);
  if (msg.size() != kIknpBaseCount * nbytes) fail(Errc::MalformedMessage, "IKNP matrix length");

  std::vector<Bytes> cols(kIknpBaseCount);
  Bytes s(kIknpBaseCount / 8, 0);
  for (std::size_t j = 0; j < kIknpBaseCount; ++j) {
    cols[j] = prg_column(base.rb[j], j, nbytes);
    if (base.choice[j]) {
      s[j / 8] |= static_cast<std::uint8_t>(1u << (j % 8));
      xor_into(cols[j], ByteSpan(msg).subspan(j * nbytes, nbytes));
    }
  }
  RowVec q = transpose(cols, count);
  RotSender out{RowVec(count, width), RowVec(count, width)};
  Bytes qs(kIknpBaseCount / 8);
  for (std::size_t i = 0; i < count; ++i) {
    ro_hash(out.r0[i], "mpsu.ot.iknp", i, q[i]);
    std::copy(q[i].begin(), q[i].end(), qs.begin());
    xor_into(qs, s);
    ro_hash(out.r1[i], "mpsu.ot.iknp", i, qs);
  }
  return out;
}

RotReceiver iknp_recv(Party& p, PartyId sender, std::size_t count, std::size_t width) {
  auto base = base_send(p, sender, kIknpBaseCount, kSeedBytes);
  const std::size_t nbytes = bits_to_bytes(count);
  RotReceiver out{BitVec(count), RowVec(count, width)};
  for (auto& c : out.choice) c = p.rng().bit();
  Bytes r = pack_bits(out.choice);

  std::vector<Bytes> t(kIknpBaseCount);
  Writer w;
  for (std::size_t j = 0; j < kIknpBaseCount; ++j) {
    t[j] = prg_column(base.r0[j], j, nbytes);
    Bytes u = prg_column(base.r1[j], j, nbytes);
    xor_into(u, t[j]);
    xor_into(u, r);
    w.raw(u);
  }
  p.send(sender, Tag::OtExtMatrix, w.take());
  RowVec rows = transpose(t, count);
  for (std::size_t i = 0; i < count; ++i) ro_hash(out.rb[i], "mpsu.ot.iknp", i, rows[i]);
  return out;
}

}  // namespace

RotSender rot_send(Party& p, PartyId receiver, std::size_t count, std::size_t width) {
  check_setup(p, receiver, Tag::OtSetup, count, width);
  if (p.resources() == ResourceMode::Dealer) {
    auto d = deal_rot(p, p.id(), receiver, count, width);
    return RotSender{std::move(d.r0), std::move(d.r1)};
  }
  if (count == 0) return RotSender{RowVec(0, width), RowVec(0, width)};
  return count >= kIknpThreshold ? iknp_send(p, receiver, count, width) : base_send(p, receiver, count, width);
}

RotReceiver rot_recv(Party& p, PartyId sender, std::size_t count, std::size_t width) {
  send_setup(p, sender, Tag::OtSetup, count, width);
  if (p.resources() == ResourceMode::Dealer) {
    auto d = deal_rot(p, sender, p.id(), count, width);
    RotReceiver out{std::move(d.choice), RowVec(count, width)};
    for (std::size_t i = 0; i < count; ++i) {
      auto src = out.choice[i] ? d.r1[i] : d.r0[i];
      std::copy(src.begin(), src.end(), out.rb[i].begin());
    }
    return out;
  }
  if (count == 0) return RotReceiver{BitVec{}, RowVec(0, width)};
  return count >= kIknpThreshold ? iknp_recv(p, sender, count, width) : base_recv(p, sender, count, width);
}

BitVec derand_message(RotReceiver& rot, const BitVec& chosen) {
  if (rot.derandomized) fail(Errc::ReusedCorrelation, "OT batch already derandomized");
  if (chosen.size() != rot.size()) fail(Errc::DimensionMismatch, "derandomization length");
  BitVec d(chosen.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = (rot.choice[i] ^ chosen[i]) & 1;
  rot.choice = chosen;
  rot.derandomized = true;
  return d;
}

void apply_derand(RotSender& rot, const BitVec& d) {
  if (rot.derandomized) fail(Errc::ReusedCorrelation, "OT batch already derandomized");
  if (d.size() != rot.size()) fail(Errc::DimensionMismatch, "derandomization length");
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i]) {
      auto a = rot.r0[i];
      auto b = rot.r1[i];
      std::swap_ranges(a.begin(), a.end(), b.begin());
    }
  rot.derandomized = true;
}

void derand_recv(Party& p, PartyId sender, RotReceiver& rot, const BitVec& chosen) {
  p.send(sender, Tag::OtDerand, pack_bits(derand_message(rot, chosen)));
}

void derand_send(Party& p, PartyId receiver, RotSender& rot) {
  if (rot.derandomized) fail(Errc::ReusedCorrelation, "OT batch already derandomized");
  auto msg = p.recv(receiver, Tag::OtDerand);
  if (msg.size() != bits_to_bytes(rot.size())) fail(Errc::MalformedMessage, "derandomization length");
  apply_derand(rot, unpack_bits(msg, rot.size()));
}

std::size_t TripleShares::take(std::size_t k) {
  if (remaining() < k) fail(Errc::TriplesExhausted, "not enough Beaver triples");
  const std::size_t at = used_;
  used_ += k;
  return at;
}

TripleShares triple_gen(Party& p, PartyId peer, std::size_t count) {
  const bool low = p.id() < peer;
  // the higher id announces the request so both sides agree on mode and size
  if (low)
    check_setup(p, peer, Tag::TripleSetup, count, 1);
  else
    send_setup(p, peer, Tag::TripleSetup, count, 1);

  if (p.resources() == ResourceMode::Dealer) {
    Rng s = p.dealer_stream("triple", std::min(p.id(), peer), std::max(p.id(), peer));
    BitVec a0(count), b0(count), c0(count), a1(count), b1(count), c1(count);
    for (std::size_t i = 0; i < count; ++i) {
      a0[i] = s.bit();
      b0[i] = s.bit();
      c0[i] = s.bit();
      a1[i] = s.bit();
      b1[i] = s.bit();
      c1[i] = static_cast<std::uint8_t>(((a0[i] ^ a1[i]) & (b0[i] ^ b1[i])) ^ c0[i]);
    }
    return low ? TripleShares(std::move(a0), std::move(b0), std::move(c0))
               : TripleShares(std::move(a1), std::move(b1), std::move(c1));
  }

  // Cross terms via random OT: a sender's a-share is lsb(r0 xor r1), the
  // receiver's b-share is its random choice, and lsb(r0) / lsb(r_c) share
  // their product. Lower id sends first, so the two batches never cross.
  RotSender snd;
  RotReceiver rcv;
  if (low) {
    snd = rot_send(p, peer, count, 1);
    rcv = rot_recv(p, peer, count, 1);
  } else {
    rcv = rot_recv(p, peer, count, 1);
    snd = rot_send(p, peer, count, 1);
  }
  BitVec a(count), b(count), c(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t s0 = snd.r0[i][0] & 1;
    const std::uint8_t s1 = snd.r1[i][0] & 1;
    a[i] = s0 ^ s1;
    b[i] = rcv.choice[i] & 1;
    c[i] = static_cast<std::uint8_t>((a[i] & b[i]) ^ s0 ^ (rcv.rb[i][0] & 1));
  }
  return TripleShares(std::move(a), std::move(b), std::move(c));
}

}  // namespace mpsu
