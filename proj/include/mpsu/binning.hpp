#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "mpsu/common.hpp"

namespace mpsu {

inline constexpr std::size_t kNumHashes = 3;

struct ProtocolParams {
  std::size_t m = 3;          // parties
  std::size_t n = 0;          // set size
  std::size_t l = 64;         // element bits
  std::size_t sigma = 40;     // statistical security
  std::size_t lambda = 128;   // computational security
  std::size_t gamma = 64;     // OPPRF output bits (whole bytes)
  std::size_t kappa = 56;     // payload hash bits (whole bytes)
  std::size_t bins = 0;       // B

  std::size_t element_bytes() const { return bits_to_bytes(l); }
  std::size_t gamma_bytes() const { return gamma / 8; }
  std::size_t kappa_bytes() const { return kappa / 8; }
  std::size_t payload_bytes() const { return element_bytes() + kappa_bytes(); }
};

/// B = max(ceil(1.27 n), n + 3); gamma and kappa from the failure-probability
/// bounds, rounded up to whole bytes. m < 3 raises InvalidConfig.
ProtocolParams derive_params(std::size_t m, std::size_t n, std::size_t l = 64,
                             std::size_t sigma = 40, std::size_t lambda = 128);

std::size_t bins_for(std::size_t n);

struct HashParams {
  std::array<std::uint8_t, 16> seed{};
  std::size_t bins = 0;
  std::size_t element_bytes = 8;
};

/// h_i(x) for i in {1, 2, 3}.
std::size_t bin_hash(const HashParams& hp, std::size_t index, ByteSpan element);

struct TaggedItem {
  Bytes element;
  std::uint8_t tag = 0;  // hash index 1..3
  friend bool operator==(const TaggedItem&, const TaggedItem&) = default;
};

class CuckooTable {
 public:
  explicit CuckooTable(std::size_t bins) : bins_(bins) {}
  std::size_t size() const { return bins_.size(); }
  const std::optional<TaggedItem>& operator[](std::size_t b) const { return bins_[b]; }
  std::optional<TaggedItem>& operator[](std::size_t b) { return bins_[b]; }
  std::size_t occupied() const;

 private:
  std::vector<std::optional<TaggedItem>> bins_;
};

class SimpleTable {
 public:
  explicit SimpleTable(std::size_t bins) : bins_(bins) {}
  std::size_t size() const { return bins_.size(); }
  const std::vector<TaggedItem>& operator[](std::size_t b) const { return bins_[b]; }
  std::vector<TaggedItem>& operator[](std::size_t b) { return bins_[b]; }
  std::size_t total_entries() const;

 private:
  std::vector<std::vector<TaggedItem>> bins_;
};

std::size_t max_evictions(std::size_t n);

/// Stash-less 3-hash Cuckoo insertion. Elements must be distinct; raises
/// CuckooFailure when an eviction chain exceeds max_evictions(n).
CuckooTable cuckoo_insert(const HashParams& hp, const std::vector<Bytes>& set);
SimpleTable simple_insert(const HashParams& hp, const std::vector<Bytes>& set);

}  // namespace mpsu
