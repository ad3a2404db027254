#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "mpsu/common.hpp"

namespace mpsu {

/// Random band-matrix OKVS over GF(2). Each key hashes to a start row and a
/// w-bit band; the table is the solution of the banded linear system.
struct OkvsParams {
  double expansion = 1.30;
  std::size_t band_width = 128;  // at most 128
  std::size_t max_retries = 8;
  /// Extra rows for tiny N, where a 30% margin alone leaves the system
  /// singular too often.
  std::size_t min_slack = 40;
};

class OkvsTable {
 public:
  using Seed = std::array<std::uint8_t, 16>;

  OkvsTable() = default;
  OkvsTable(Seed seed, RowVec rows, std::size_t band_width)
      : seed_(seed), rows_(std::move(rows)), band_width_(band_width) {}

  const Seed& seed() const { return seed_; }
  const RowVec& rows() const { return rows_; }
  std::size_t num_rows() const { return rows_.size(); }
  std::size_t value_bytes() const { return rows_.width(); }
  std::size_t band_width() const { return band_width_; }

  Bytes decode(ByteSpan key) const;

  /// seed || u32 row count || u16 value bits || u16 band width || rows
  Bytes serialize() const;
  static OkvsTable deserialize(ByteSpan bytes);

 private:
  Seed seed_{};
  RowVec rows_;
  std::size_t band_width_ = 0;
};

std::size_t okvs_rows_for(std::size_t num_pairs, const OkvsParams& params = {});

/// Keys must be pairwise distinct; values.size() == keys.size(). Retries
/// with a fresh seed on a singular system; EncodeSingular after
/// params.max_retries attempts.
OkvsTable okvs_encode(const std::vector<Bytes>& keys, const RowVec& values, std::size_t value_bytes,
                      Rng& rng, const OkvsParams& params = {});

/// Number of attempts the last successful okvs_encode on this thread needed.
std::size_t okvs_last_attempts();

inline Bytes okvs_decode(const OkvsTable& table, ByteSpan key) { return table.decode(key); }

}  // namespace mpsu
