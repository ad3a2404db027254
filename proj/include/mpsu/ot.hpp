#pragma once

#include <cstddef>

#include "mpsu/common.hpp"
#include "mpsu/runtime.hpp"

namespace mpsu {

/// Batches at or above this size use IKNP extension in interactive mode.
inline constexpr std::size_t kIknpThreshold = 512;
inline constexpr std::size_t kIknpBaseCount = 128;

struct RotSender {
  RowVec r0, r1;
  bool derandomized = false;
  std::size_t size() const { return r0.size(); }
};

struct RotReceiver {
  BitVec choice;
  RowVec rb;  // rb[i] = choice[i] ? r1[i] : r0[i]
  bool derandomized = false;
  std::size_t size() const { return rb.size(); }
};

/// Batch of `count` random OTs with `width`-byte strings against `peer`.
/// The mode (dealer or interactive) comes from the party's options; the
/// receiver announces mode and dimensions first so mismatches are detected.
RotSender rot_send(Party& p, PartyId receiver, std::size_t count, std::size_t width);
RotReceiver rot_recv(Party& p, PartyId sender, std::size_t count, std::size_t width);

// Derandomization: the receiver reveals d = c xor b for the wanted choice b;
// the sender swaps (r0, r1) wherever d = 1. Each batch is consumed once.

BitVec derand_message(RotReceiver& rot, const BitVec& chosen);
void apply_derand(RotSender& rot, const BitVec& d);

void derand_recv(Party& p, PartyId sender, RotReceiver& rot, const BitVec& chosen);
void derand_send(Party& p, PartyId receiver, RotSender& rot);

/// One party's XOR shares of Beaver triples (bit per entry).
class TripleShares {
 public:
  TripleShares() = default;
  TripleShares(BitVec a, BitVec b, BitVec c) : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}

  std::size_t size() const { return a_.size(); }
  std::size_t remaining() const { return a_.size() - used_; }
  /// Hands out the next k triples as offsets into a(), b(), c().
  std::size_t take(std::size_t k);

  const BitVec& a() const { return a_; }
  const BitVec& b() const { return b_; }
  const BitVec& c() const { return c_; }

 private:
  BitVec a_, b_, c_;
  std::size_t used_ = 0;
};

/// Triples shared with `peer`. Dealer mode draws them from the shared dealer
/// stream; interactive mode builds each from two random OTs (one per
/// direction), so the only traffic is the OT itself.
TripleShares triple_gen(Party& p, PartyId peer, std::size_t count);

}  // namespace mpsu
