#include "mpsu/binning.hpp"

#include <cmath>

namespace mpsu {

std::size_t bins_for(std::size_t n) {
  // integer form of ceil(1.27 n)
  std::size_t scaled = (127 * n + 99) / 100;
  return std::max(scaled, n + 3);
}

ProtocolParams derive_params(std::size_t m, std::size_t n, std::size_t l, std::size_t sigma,
                             std::size_t lambda) {
  if (m < 3) fail(Errc::InvalidConfig, "at least three parties are required");
  if (n < 1) fail(Errc::InvalidConfig, "set size must be positive");
  if (l < 1 || l > 512) fail(Errc::InvalidConfig, "element bit length out of range");
  ProtocolParams p;
  p.m = m;
  p.n = n;
  p.l = l;
  p.sigma = sigma;
  p.lambda = lambda;
  p.bins = bins_for(n);
  std::size_t pairs = (m * m - m) / 2;
  std::size_t gamma = sigma + ceil_log2(pairs) + ceil_log2(p.bins);
  std::size_t kappa = sigma + ceil_log2(m - 1) + ceil_log2(n);
  p.gamma = bits_to_bytes(gamma) * 8;
  p.kappa = bits_to_bytes(kappa) * 8;
  return p;
}

std::size_t bin_hash(const HashParams& hp, std::size_t index, ByteSpan element) {
  std::array<std::uint8_t, 16> h{};
  std::uint8_t idx = static_cast<std::uint8_t>(index);
  blake2b(h, {ByteSpan(&idx, 1), element}, hp.seed);
  auto wide = static_cast<unsigned __int128>(load_u64_le({h.data() + 8, 8})) << 64 |
              load_u64_le({h.data(), 8});
  return static_cast<std::size_t>(wide % hp.bins);
}

std::size_t CuckooTable::occupied() const {
  std::size_t c = 0;
  for (const auto& b : bins_) c += b.has_value();
  return c;
}

std::size_t SimpleTable::total_entries() const {
  std::size_t c = 0;
  for (const auto& b : bins_) c += b.size();
  return c;
}

std::size_t max_evictions(std::size_t n) { return 128 * ceil_log2(n + 2); }

CuckooTable cuckoo_insert(const HashParams& hp, const std::vector<Bytes>& set) {
  if (hp.bins == 0) fail(Errc::InvalidConfig, "zero bins");
  CuckooTable table(hp.bins);
  // eviction choices are pseudorandom but derived from the public seed, so
  // the table is a deterministic function of (seed, set)
  Rng walk = Rng::from_parts({as_bytes("mpsu.cuckoo.walk"), hp.seed});
  const std::size_t limit = max_evictions(set.size());

  for (const auto& x : set) {
    if (x.size() != hp.element_bytes) fail(Errc::InvalidConfig, "element width mismatch");
    TaggedItem cur{x, 0};
    std::size_t evictions = 0;
    std::optional<std::size_t> last_slot;
    for (;;) {
      std::array<std::size_t, kNumHashes> pos{};
      for (std::size_t i = 0; i < kNumHashes; ++i) pos[i] = bin_hash(hp, i + 1, cur.element);
      bool placed = false;
      for (std::size_t i = 0; i < kNumHashes && !placed; ++i) {
        if (!table[pos[i]]) {
          cur.tag = static_cast<std::uint8_t>(i + 1);
          table[pos[i]] = std::move(cur);
          placed = true;
        }
      }
      if (placed) break;
      if (evictions++ >= limit) fail(Errc::CuckooFailure, "eviction limit exceeded");
      // never kick straight back into the slot we were just evicted from
      std::size_t choice = walk.uniform(kNumHashes);
      for (std::size_t k = 0; k < kNumHashes && last_slot && pos[choice] == *last_slot; ++k)
        choice = (choice + 1) % kNumHashes;
      cur.tag = static_cast<std::uint8_t>(choice + 1);
      std::swap(cur, *table[pos[choice]]);
      last_slot = pos[choice];
    }
  }
  return table;
}

SimpleTable simple_insert(const HashParams& hp, const std::vector<Bytes>& set) {
  if (hp.bins == 0) fail(Errc::InvalidConfig, "zero bins");
  SimpleTable table(hp.bins);
  for (const auto& x : set) {
    if (x.size() != hp.element_bytes) fail(Errc::InvalidConfig, "element width mismatch");
    for (std::size_t i = 1; i <= kNumHashes; ++i)
      table[bin_hash(hp, i, x)].push_back({x, static_cast<std::uint8_t>(i)});
  }
  return table;
}

}  // namespace mpsu
