#include "mpsu/okvs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace mpsu {

namespace {

using Band = unsigned __int128;

thread_local std::size_t last_attempts = 0;

struct KeyHash {
  std::size_t start;
  Band band;
};

KeyHash hash_key(const OkvsTable::Seed& seed, std::size_t rows, std::size_t width, ByteSpan key) {
  std::array<std::uint8_t, 24> h{};
  blake2b(h, {as_bytes("mpsu.okvs"), key}, seed);
  const std::size_t span = rows - width + 1;
  KeyHash kh;
  kh.start = static_cast<std::size_t>(load_u64_le({h.data(), 8}) % span);
  Band band = static_cast<Band>(load_u64_le({h.data() + 16, 8})) << 64 | load_u64_le({h.data() + 8, 8});
  if (width < 128) band &= (Band{1} << width) - 1;
  kh.band = band | 1;  // leading coefficient fixed to 1
  return kh;
}

int lowest_bit(Band b) {
  auto lo = static_cast<std::uint64_t>(b);
  if (lo) return __builtin_ctzll(lo);
  return 64 + __builtin_ctzll(static_cast<std::uint64_t>(b >> 64));
}

std::size_t band_for(std::size_t rows, const OkvsParams& params) {
  return std::max<std::size_t>(1, std::min(params.band_width, rows));
}

struct Pivot {
  Band band;  // relative to the pivot column
  std::size_t value_row;
};

std::optional<RowVec> try_solve(const OkvsTable::Seed& seed, std::size_t rows, std::size_t width,
                                const std::vector<Bytes>& keys, const RowVec& values,
                                std::size_t value_bytes, Rng& rng) {
  const std::size_t n = keys.size();
  std::vector<KeyHash> hashes(n);
  for (std::size_t i = 0; i < n; ++i) hashes[i] = hash_key(seed, rows, width, keys[i]);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return hashes[a].start < hashes[b].start; });

  RowVec work = values;  // reduced right-hand sides
  std::vector<std::optional<Pivot>> pivot_of(rows);

  for (auto idx : order) {
    Band band = hashes[idx].band;
    const std::size_t start = hashes[idx].start;
    auto rhs = work[idx];
    bool placed = false;
    while (band != 0) {
      const int lsb = lowest_bit(band);
      const std::size_t col = start + static_cast<std::size_t>(lsb);
      auto& piv = pivot_of[col];
      if (!piv) {
        piv = Pivot{band >> lsb, idx};
        placed = true;
        break;
      }
      band ^= piv->band << lsb;
      xor_into(rhs, work[piv->value_row]);
    }
    if (!placed && !is_zero(rhs)) return std::nullopt;
  }

  RowVec sol(rows, value_bytes);
  for (std::size_t c = 0; c < rows; ++c)
    if (!pivot_of[c]) rng.fill(sol[c]);
  for (std::size_t c = rows; c-- > 0;) {
    if (!pivot_of[c]) continue;
    auto out = sol[c];
    auto src = work[pivot_of[c]->value_row];
    std::copy(src.begin(), src.end(), out.begin());
    Band rest = pivot_of[c]->band >> 1;
    std::size_t k = 1;
    while (rest != 0) {
      if (rest & 1) xor_into(out, sol[c + k]);
      rest >>= 1;
      ++k;
    }
  }
  return sol;
}

}  // namespace

std::size_t okvs_rows_for(std::size_t num_pairs, const OkvsParams& params) {
  auto scaled = static_cast<std::size_t>(std::ceil(params.expansion * static_cast<double>(num_pairs)));
  return std::max(scaled, num_pairs + params.min_slack);
}

OkvsTable okvs_encode(const std::vector<Bytes>& keys, const RowVec& values, std::size_t value_bytes,
                      Rng& rng, const OkvsParams& params) {
  if (values.size() != keys.size()) fail(Errc::DimensionMismatch, "okvs keys/values count");
  if (!keys.empty() && values.width() != value_bytes)
    fail(Errc::DimensionMismatch, "okvs value width");
  if (params.band_width == 0 || params.band_width > 128)
    fail(Errc::InvalidConfig, "okvs band width must be in [1, 128]");
  const std::size_t rows = okvs_rows_for(keys.size(), params);
  const std::size_t width = band_for(rows, params);
  RowVec vals = keys.empty() ? RowVec(0, value_bytes) : values;

  for (std::size_t attempt = 1; attempt <= params.max_retries; ++attempt) {
    OkvsTable::Seed seed{};
    rng.fill(seed);
    if (auto sol = try_solve(seed, rows, width, keys, vals, value_bytes, rng)) {
      last_attempts = attempt;
      return OkvsTable(seed, std::move(*sol), width);
    }
  }
  fail(Errc::EncodeSingular, "okvs system singular after retries");
}

std::size_t okvs_last_attempts() { return last_attempts; }

Bytes OkvsTable::decode(ByteSpan key) const {
  Bytes out(value_bytes(), 0);
  if (num_rows() == 0) return out;
  auto kh = hash_key(seed_, num_rows(), band_width_, key);
  Band band = kh.band;
  std::size_t k = 0;
  while (band != 0) {
    if (band & 1) xor_into(out, rows_[kh.start + k]);
    band >>= 1;
    ++k;
  }
  return out;
}

Bytes OkvsTable::serialize() const {
  Writer w;
  w.raw(seed_)
      .u32(static_cast<std::uint32_t>(num_rows()))
      .u16(static_cast<std::uint16_t>(value_bytes() * 8))
      .u16(static_cast<std::uint16_t>(band_width_))
      .raw(rows_.bytes());
  return w.take();
}

OkvsTable OkvsTable::deserialize(ByteSpan bytes) {
  Reader r(bytes);
  Seed seed{};
  auto s = r.raw(seed.size());
  std::copy(s.begin(), s.end(), seed.begin());
  const std::size_t rows = r.u32();
  const std::size_t value_bits = r.u16();
  const std::size_t band = r.u16();
  if (value_bits == 0 || value_bits % 8 != 0) fail(Errc::MalformedMessage, "okvs value width");
  if (band == 0 || band > 128 || band > rows) fail(Errc::MalformedMessage, "okvs band width");
  const std::size_t vb = value_bits / 8;
  if (r.remaining() != rows * vb) fail(Errc::MalformedMessage, "okvs row payload length");
  auto payload = r.raw(rows * vb);
  return OkvsTable(seed, RowVec::from_bytes(Bytes(payload.begin(), payload.end()), vb), band);
}

}  // namespace mpsu
