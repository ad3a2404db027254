#include "mpsu/mssrot.hpp"

#include <algorithm>

#include "mpsu/ot.hpp"

namespace mpsu {

bool MssRotConfig::is_member(PartyId id) const {
  return std::find(members.begin(), members.end(), id) != members.end();
}

bool MssRotConfig::in_J(PartyId id) const { return std::find(J.begin(), J.end(), id) != J.end(); }

std::vector<PartyId> MssRotConfig::padded() const {
  std::vector<PartyId> out;
  for (auto id : members)
    if (id != ch0 && id != ch1 && !in_J(id)) out.push_back(id);
  std::sort(out.begin(), out.end());
  return out;
}

void MssRotConfig::validate() const {
  if (ch0 == ch1) fail(Errc::InvalidConfig, "mss-ROT choice holders must differ");
  if (J.empty()) fail(Errc::InvalidConfig, "mss-ROT needs at least one delta holder");
  if (width == 0) fail(Errc::InvalidConfig, "mss-ROT payload width");
  if (!is_member(ch0) || !is_member(ch1)) fail(Errc::InvalidConfig, "choice holder not a member");
  for (auto j : J)
    if (!is_member(j)) fail(Errc::InvalidConfig, "delta holder not a member");
  auto sorted = members;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(Errc::InvalidConfig, "duplicate mss-ROT member");
}

RowVec mss_rot_batch(Party& p, const MssRotConfig& cfg, std::size_t count, const BitVec* bits,
                     const RowVec* deltas) {
  cfg.validate();
  const PartyId me = p.id();
  if (!cfg.is_member(me)) fail(Errc::InvalidConfig, "party is not an mss-ROT member");
  const bool holder = me == cfg.ch0 || me == cfg.ch1;
  const bool contributes = cfg.in_J(me);
  if (holder && (!bits || bits->size() != count)) fail(Errc::DimensionMismatch, "mss-ROT choice bits");
  if (contributes && (!deltas || deltas->size() != count || deltas->width() != cfg.width))
    fail(Errc::DimensionMismatch, "mss-ROT delta shares");

  RowVec r(count, cfg.width);
  auto add_masked = [&](const RowVec& v, const BitVec& mask) {
    for (std::size_t t = 0; t < count; ++t)
      if (mask[t]) xor_into(r[t], v[t]);
  };

  if (holder && contributes) add_masked(*deltas, *bits);

  std::vector<PartyId> J = cfg.J;
  std::sort(J.begin(), J.end());
  for (PartyId c : {cfg.ch0, cfg.ch1}) {
    for (PartyId j : J) {
      if (j == c) continue;
      if (me == j) {
        auto rot = rot_send(p, c, count, cfg.width);
        RowVec masked = rot.r0 ^ rot.r1;
        masked ^= *deltas;
        p.send(c, Tag::MssrotDelta, std::move(masked.bytes()));
        derand_send(p, c, rot);
        r ^= rot.r0;
      } else if (me == c) {
        auto rot = rot_recv(p, j, count, cfg.width);
        derand_recv(p, j, rot, *bits);
        auto msg = p.recv(j, Tag::MssrotDelta);
        if (msg.size() != count * cfg.width) fail(Errc::MalformedMessage, "mss-ROT delta length");
        r ^= rot.rb;
        add_masked(RowVec::from_bytes(std::move(msg), cfg.width), *bits);
      }
    }
  }

  const auto pads = cfg.padded();
  if (!pads.empty()) {
    std::vector<PartyId> active;
    for (auto id : cfg.members)
      if (std::find(pads.begin(), pads.end(), id) == pads.end()) active.push_back(id);
    std::sort(active.begin(), active.end());
    if (std::find(pads.begin(), pads.end(), me) == pads.end()) {
      for (auto to : pads) {
        RowVec pad = RowVec::random(count, cfg.width, p.rng());
        r ^= pad;
        p.send(to, Tag::MssrotPad, std::move(pad.bytes()));
      }
    } else {
      for (auto from : active) {
        auto msg = p.recv(from, Tag::MssrotPad);
        if (msg.size() != count * cfg.width) fail(Errc::MalformedMessage, "mss-ROT pad length");
        r ^= RowVec::from_bytes(std::move(msg), cfg.width);
      }
    }
  }
  return r;
}

}  // namespace mpsu
