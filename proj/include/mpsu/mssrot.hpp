#pragma once

#include <vector>

#include "mpsu/common.hpp"
#include "mpsu/runtime.hpp"

namespace mpsu {

/// One batch of two-choice-bit multi-party secret-shared random OT.
/// `members` are the parties receiving an output share; ch0 and ch1 hold the
/// choice-bit shares; J holds the delta shares. All are party ids.
struct MssRotConfig {
  std::vector<PartyId> members;
  PartyId ch0 = 0;
  PartyId ch1 = 1;
  std::vector<PartyId> J;
  std::size_t width = 1;  // payload bytes

  /// InvalidConfig unless ch0 != ch1, J non-empty, and ch0, ch1, J within members.
  void validate() const;
  bool is_member(PartyId id) const;
  bool in_J(PartyId id) const;
  /// Members outside {ch0, ch1} and J: they only receive padding.
  std::vector<PartyId> padded() const;
};

/// Runs `count` instances. `bits` is required for ch0/ch1, `deltas`
/// (count x width) for members of J. Returns this party's shares r, such that
/// the XOR over members equals (b0 xor b1) * (XOR of deltas), row-wise.
RowVec mss_rot_batch(Party& p, const MssRotConfig& cfg, std::size_t count, const BitVec* bits,
                     const RowVec* deltas);

}  // namespace mpsu
