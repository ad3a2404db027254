#pragma once

#include <chrono>
#include <exception>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <sodium.h>

#include "mpsu/common.hpp"
#include "mpsu/transport.hpp"
#ifdef MPSU_TEST_HOOKS
#include "mpsu/mkr_pke.hpp"
#endif

namespace mpsu {

enum class ResourceMode { Dealer, Interactive };

const char* resource_mode_name(ResourceMode mode);
ResourceMode parse_resource_mode(std::string_view s);

struct PhaseStats {
  std::uint64_t sent_bytes = 0;
  std::uint64_t recv_bytes = 0;
  std::uint64_t rounds = 0;
};

struct PartyStats {
  std::map<std::string, PhaseStats> phases;
  /// (phase, peer) -> bytes; rounds are only tracked per phase.
  std::map<std::pair<std::string, PartyId>, PhaseStats> per_peer;

  std::uint64_t sent_bytes() const;
  std::uint64_t recv_bytes() const;
  std::uint64_t rounds() const;
};

/// One frame in a party's program order, kept for critical-path metering.
struct MessageEvent {
  bool sent = false;
  PartyId peer = 0;
  std::string phase;
};

#ifdef MPSU_TEST_HOOKS
/// Observation points and fault injection for tests. Insecure by design;
/// absent from regular builds. Callbacks run on party threads.
struct TestHooks {
  std::function<void(PartyId, const RowVec&)> pre_shuffle_shares;
  std::function<void(const RowVec&)> leader_reconstructed;
  std::function<void(PartyId, const std::vector<std::size_t>&)> shuffle_permutation;
  std::function<void(PartyId, ByteSpan sk)> pk_secret_key;
  std::function<void(PartyId j, PartyId i, const std::vector<Ciphertext>&)> pk_after_pass;
  std::function<void(PartyId, ByteSpan k)> pid_key;
  std::optional<PartyId> crash_party;
  std::string crash_phase;
};
#endif

struct PartyOptions {
  ResourceMode resources = ResourceMode::Dealer;
  /// Shared by all parties; seeds the co-located correlation dealer.
  Rng::Seed dealer_seed{};
  std::chrono::milliseconds timeout{30000};
#ifdef MPSU_TEST_HOOKS
  std::shared_ptr<TestHooks> hooks;
#endif
};

/// One logical protocol participant: links to every peer, a private random
/// stream, and communication meters.
class Party {
 public:
  Party(PartyId id, ChannelSet links, const Rng::Seed& seed, PartyOptions options);
  ~Party();
  Party(const Party&) = delete;
  Party& operator=(const Party&) = delete;

  PartyId id() const { return id_; }
  std::size_t num_parties() const { return links_.size(); }
  Rng& rng() { return rng_; }
  const PartyOptions& options() const { return options_; }
  ResourceMode resources() const { return options_.resources; }

  void send(PartyId peer, Tag tag, Bytes payload);
  /// Receives the next frame from `peer`; a different tag is MalformedMessage.
  Bytes recv(PartyId peer, Tag tag);

  const std::string& phase() const { return phase_; }
  /// The first flight sent in a phase counts as a round of that phase.
  /// Entering a phase is also where injected crashes fire.
  void set_phase(std::string phase);
  void restore_phase(std::string phase);

  const PartyStats& stats() const { return stats_; }
  const std::vector<MessageEvent>& events() const { return events_; }
  /// Digest of every frame sent or received, in program order.
  Bytes transcript_digest() const;

  /// Correlation stream shared with the peer(s) that request the same
  /// (kind, a, b) sequence. Dealer mode only: both ends derive it locally.
  Rng dealer_stream(std::string_view kind, PartyId a, PartyId b);

  /// Tears down every link; peers observe PeerCrash.
  void close_all();

#ifdef MPSU_TEST_HOOKS
  const TestHooks* hooks() const { return options_.hooks.get(); }
#endif

 private:
  void absorb(std::uint8_t dir, PartyId peer, Tag tag, ByteSpan payload);

  PartyId id_;
  ChannelSet links_;
  Rng rng_;
  PartyOptions options_;
  std::string phase_ = "setup";
  bool last_was_recv_ = true;
  PartyStats stats_;
  std::vector<MessageEvent> events_;
  crypto_generichash_state transcript_;
  std::map<std::tuple<std::string, PartyId, PartyId>, std::uint64_t> dealer_counters_;
};

/// Sets the phase for a scope and restores the previous one afterwards.
class PhaseScope {
 public:
  PhaseScope(Party& p, std::string phase) : p_(p), prev_(p.phase()) { p.set_phase(std::move(phase)); }
  ~PhaseScope() { p_.restore_phase(prev_); }

 private:
  Party& p_;
  std::string prev_;
};

using PartyList = std::vector<std::unique_ptr<Party>>;

PartyList make_memory_parties(std::size_t m, const std::vector<Rng::Seed>& seeds, const PartyOptions& options);

/// Runs fn on every party in its own thread. A party that throws closes its
/// links so peers fail fast instead of hanging. Returns per-party errors.
std::vector<std::exception_ptr> run_parties(PartyList& parties, const std::function<void(Party&)>& fn);

/// Critical-path rounds of a finished session whose parties are all local.
/// Replays the message logs with logical clocks: a message sent after
/// receiving one stamped s is stamped s + 1, sends without a receive in
/// between share a stamp. Per phase: the number of distinct stamps; "total":
/// the highest stamp.
std::map<std::string, std::uint64_t> critical_path_rounds(const PartyList& parties);

/// Rethrows the most informative error: the first one that is not a
/// consequence of another party failing.
void rethrow_root_cause(const std::vector<std::exception_ptr>& errors);

}  // namespace mpsu
