#include "mpsu/shuffle.hpp"

#include <algorithm>
#include <numeric>

#include "mpsu/ot.hpp"

namespace mpsu {

bool is_permutation(const Permutation& perm) {
  std::vector<bool> seen(perm.size(), false);
  for (auto v : perm) {
    if (v >= perm.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

Permutation compose(const Permutation& outer, const Permutation& inner) {
  if (outer.size() != inner.size()) fail(Errc::DimensionMismatch, "permutation sizes differ");
  Permutation out(outer.size());
  // (outer after inner)(x)[i] = inner(x)[outer[i]] = x[inner[outer[i]]]
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = inner[outer[i]];
  return out;
}

Permutation identity_permutation(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), 0);
  return p;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::size_t waksman_switch_count(std::size_t n) {
  if (n <= 1) return 0;
  if (n == 2) return 1;
  return n - 1 + 2 * waksman_switch_count(n / 2);
}

namespace {

void route_rec(const Permutation& perm, std::vector<std::uint8_t>& bits) {
  const std::size_t n = perm.size();
  if (n <= 1) return;
  if (n == 2) {
    bits.push_back(perm[0] == 1 ? 1 : 0);
    return;
  }
  Permutation inv(n);
  for (std::size_t o = 0; o < n; ++o) inv[perm[o]] = o;

  // side[x]: subnetwork carrying input x (0 top, 1 bottom). Inputs sharing an
  // input switch, and the sources of outputs sharing an output switch, must
  // take different sides; output 0 is wired to the top.
  std::vector<int> side(n, -1);
  for (std::size_t t = 0; t < n / 2; ++t) {
    std::size_t o = 2 * t;
    if (side[perm[o]] != -1) continue;
    const int s = 0;
    for (;;) {
      const std::size_t x = perm[o];
      side[x] = s;
      const std::size_t xp = x ^ 1;
      if (side[xp] != -1) break;
      side[xp] = 1 - s;
      o = inv[xp] ^ 1;
      if (side[perm[o]] != -1) break;
    }
  }

  Permutation top(n / 2), bottom(n / 2);
  std::vector<std::uint8_t> out_bits(n / 2, 0);
  for (std::size_t t = 0; t < n / 2; ++t) {
    const std::size_t a = perm[2 * t], b = perm[2 * t + 1];
    const bool a_top = side[a] == 0;
    const std::size_t via_top = a_top ? a : b;
    const std::size_t via_bottom = a_top ? b : a;
    top[t] = via_top / 2;
    bottom[t] = via_bottom / 2;
    out_bits[t] = a_top ? 0 : 1;
  }
  for (std::size_t t = 0; t < n / 2; ++t) bits.push_back(static_cast<std::uint8_t>(side[2 * t]));
  route_rec(top, bits);
  route_rec(bottom, bits);
  for (std::size_t t = 1; t < n / 2; ++t) bits.push_back(out_bits[t]);
}

void eval_rec(RowVec& v, std::size_t& counter, const SwitchFn& fn) {
  const std::size_t n = v.size();
  const std::size_t w = v.width();
  if (n <= 1) return;
  if (n == 2) {
    RowVec out(2, w);
    fn(counter++, v[0], v[1], out[0], out[1]);
    v = std::move(out);
    return;
  }
  RowVec top(n / 2, w), bottom(n / 2, w);
  for (std::size_t t = 0; t < n / 2; ++t) fn(counter++, v[2 * t], v[2 * t + 1], top[t], bottom[t]);
  eval_rec(top, counter, fn);
  eval_rec(bottom, counter, fn);
  RowVec out(n, w);
  std::copy(top[0].begin(), top[0].end(), out[0].begin());
  std::copy(bottom[0].begin(), bottom[0].end(), out[1].begin());
  for (std::size_t t = 1; t < n / 2; ++t) fn(counter++, top[t], bottom[t], out[2 * t], out[2 * t + 1]);
  v = std::move(out);
}

void copy_row(ByteSpan src, MutByteSpan dst) { std::copy(src.begin(), src.end(), dst.begin()); }

}  // namespace

std::vector<std::uint8_t> waksman_route(const Permutation& perm) {
  if (perm.size() != next_pow2(perm.size())) fail(Errc::DimensionMismatch, "Waksman size must be a power of two");
  if (!is_permutation(perm)) fail(Errc::InvalidConfig, "not a permutation");
  std::vector<std::uint8_t> bits;
  bits.reserve(waksman_switch_count(perm.size()));
  route_rec(perm, bits);
  return bits;
}

RowVec waksman_eval(const RowVec& in, const SwitchFn& fn) {
  if (in.size() != next_pow2(in.size())) fail(Errc::DimensionMismatch, "Waksman size must be a power of two");
  RowVec v = in;
  std::size_t counter = 0;
  eval_rec(v, counter, fn);
  return v;
}

RowVec waksman_apply(const RowVec& in, const std::vector<std::uint8_t>& bits) {
  if (bits.size() != waksman_switch_count(in.size())) fail(Errc::DimensionMismatch, "switch count");
  return waksman_eval(in, [&](std::size_t i, ByteSpan a, ByteSpan b, MutByteSpan o0, MutByteSpan o1) {
    copy_row(bits[i] ? b : a, o0);
    copy_row(bits[i] ? a : b, o1);
  });
}

namespace {

Permutation padded_permutation(const Permutation& perm, std::size_t size) {
  Permutation out = identity_permutation(size);
  std::copy(perm.begin(), perm.end(), out.begin());
  return out;
}

RowVec pad_rows(const RowVec& x, std::size_t size) {
  RowVec out(size, x.width());
  std::copy(x.bytes().begin(), x.bytes().end(), out.bytes().begin());
  return out;
}

RowVec truncate_rows(const RowVec& x, std::size_t size) {
  Bytes b(x.bytes().begin(), x.bytes().begin() + static_cast<std::ptrdiff_t>(size * x.width()));
  return RowVec::from_bytes(std::move(b), x.width());
}

// Dealer correlation: holder gets (a, b); permuter gets delta = perm(a) xor b.
struct ShareTranslation {
  RowVec a, b;
};

ShareTranslation deal_translation(Party& p, PartyId permuter, PartyId holder, std::size_t n, std::size_t w) {
  Rng s = p.dealer_stream("shuffle", permuter, holder);
  ShareTranslation st;
  st.a = RowVec::random(n, w, s);
  st.b = RowVec::random(n, w, s);
  return st;
}

}  // namespace

RowVec permute_share_permuter(Party& p, PartyId holder, const Permutation& perm, std::size_t width) {
  if (!is_permutation(perm)) fail(Errc::InvalidConfig, "not a permutation");
  const std::size_t n = perm.size();

  if (p.resources() == ResourceMode::Dealer) {
    auto st = deal_translation(p, p.id(), holder, n, width);
    RowVec delta = st.a.permuted(perm) ^ st.b;
    auto msg = p.recv(holder, Tag::ShufMask);
    if (msg.size() != n * width) fail(Errc::DimensionMismatch, "shuffle vector shape differs");
    return RowVec::from_bytes(std::move(msg), width).permuted(perm) ^ delta;
  }

  const std::size_t size = next_pow2(n);
  const auto bits = waksman_route(padded_permutation(perm, size));
  const std::size_t switches = bits.size();
  auto rot = rot_recv(p, holder, switches, 2 * width);
  derand_recv(p, holder, rot, bits);

  auto masked = p.recv(holder, Tag::ShufMask);
  auto ot = p.recv(holder, Tag::ShufSwitchOt);
  if (masked.size() != size * width || ot.size() != switches * 4 * width)
    fail(Errc::DimensionMismatch, "shuffle vector shape differs");
  RowVec cipher = RowVec::from_bytes(std::move(ot), 4 * width);
  auto out = waksman_eval(RowVec::from_bytes(std::move(masked), width),
                          [&](std::size_t i, ByteSpan a, ByteSpan b, MutByteSpan o0, MutByteSpan o1) {
                            auto chosen = cipher[i].subspan(bits[i] ? 2 * width : 0, 2 * width);
                            Bytes msg(chosen.begin(), chosen.end());
                            xor_into(msg, rot.rb[i]);
                            copy_row(bits[i] ? b : a, o0);
                            copy_row(bits[i] ? a : b, o1);
                            xor_into(o0, ByteSpan(msg).first(width));
                            xor_into(o1, ByteSpan(msg).subspan(width));
                          });
  return truncate_rows(out, n);
}

RowVec permute_share_holder(Party& p, PartyId permuter, const RowVec& x) {
  const std::size_t n = x.size();
  const std::size_t width = x.width();

  if (p.resources() == ResourceMode::Dealer) {
    auto st = deal_translation(p, permuter, p.id(), n, width);
    p.send(permuter, Tag::ShufMask, std::move((x ^ st.a).bytes()));
    return st.b;
  }

  const std::size_t size = next_pow2(n);
  const std::size_t switches = waksman_switch_count(size);
  auto rot = rot_send(p, permuter, switches, 2 * width);
  derand_send(p, permuter, rot);

  // Fresh mask on every wire. Per switch, OT message c holds the mask
  // corrections for switch setting c; both go out encrypted under the ROT pads.
  RowVec in_mask = RowVec::random(size, width, p.rng());
  RowVec msgs(switches, 4 * width);
  auto out_mask = waksman_eval(in_mask, [&](std::size_t i, ByteSpan a, ByteSpan b, MutByteSpan o0, MutByteSpan o1) {
    p.rng().fill(o0);
    p.rng().fill(o1);
    auto row = msgs[i];
    for (std::size_t k = 0; k < width; ++k) {
      row[k] = a[k] ^ o0[k];
      row[width + k] = b[k] ^ o1[k];
      row[2 * width + k] = b[k] ^ o0[k];
      row[3 * width + k] = a[k] ^ o1[k];
    }
    xor_into(row.first(2 * width), rot.r0[i]);
    xor_into(row.subspan(2 * width), rot.r1[i]);
  });
  p.send(permuter, Tag::ShufMask, std::move((pad_rows(x, size) ^ in_mask).bytes()));
  p.send(permuter, Tag::ShufSwitchOt, std::move(msgs.bytes()));
  return truncate_rows(out_mask, n);
}

RowVec ms_shuffle(Party& p, const RowVec& shares) {
  const std::size_t m = p.num_parties();
  const std::size_t n = shares.size();
  const std::size_t w = shares.width();
  RowVec cur = shares;
  for (PartyId k = 0; k < m; ++k) {
    if (p.id() == k) {
      const Permutation perm = random_permutation(n, p.rng());
#ifdef MPSU_TEST_HOOKS
      if (auto* h = p.hooks(); h && h->shuffle_permutation) h->shuffle_permutation(k, perm);
#endif
      RowVec next = cur.permuted(perm);
      for (PartyId h = 0; h < m; ++h)
        if (h != k) next ^= permute_share_permuter(p, h, perm, w);
      cur = std::move(next);
    } else {
      cur = permute_share_holder(p, k, cur);
    }
  }
  return cur;
}

}  // namespace mpsu
