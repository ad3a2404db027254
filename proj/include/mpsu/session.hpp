#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpsu/protocols.hpp"
#include "mpsu/runtime.hpp"
#include "mpsu/transport.hpp"

namespace mpsu {

enum class ProtocolKind { Sk, Pk, Pid };
enum class TransportKind { Memory, Tcp };

const char* protocol_name(ProtocolKind k);
ProtocolKind parse_protocol(std::string_view s);
const char* transport_name(TransportKind k);
TransportKind parse_transport(std::string_view s);

/// Everything the parties of a session must agree on. Per-party, dealer and
/// hash seeds are all derived from `seed`.
struct SessionConfig {
  ProtocolKind protocol = ProtocolKind::Sk;
  std::size_t m = 3;
  std::size_t n = 16;
  std::size_t l = 64;  // element bits
  std::string group = "test";
  std::uint64_t seed = 0;
  ResourceMode resources = ResourceMode::Dealer;
  TransportKind transport = TransportKind::Memory;
  std::chrono::milliseconds timeout{30000};
#ifdef MPSU_TEST_HOOKS
  std::shared_ptr<TestHooks> hooks;
#endif
};

/// Digest over the agreed fields, exchanged in the HELLO frame.
Bytes config_digest(const SessionConfig& cfg);

Rng::Seed party_seed(const SessionConfig& cfg, PartyId id);
Rng::Seed dealer_seed(const SessionConfig& cfg);
std::array<std::uint8_t, 16> hash_seed(const SessionConfig& cfg);

struct PartyReport {
  PartyStats stats;
  Bytes transcript;
  // private-ID only, as group element encodings
  std::vector<Bytes> pid_all;
  std::vector<Bytes> pid_mine;
};

struct SessionResult {
  std::vector<Bytes> union_set;  // leader output (sorted); PID: R*
  std::vector<PartyReport> parties;
  /// Critical-path rounds per phase plus "total"; empty for single-party runs.
  std::map<std::string, std::uint64_t> rounds;
  double wall_ms = 0;
};

/// Protocol body for one party once its links are up: HELLO check, then the
/// configured protocol. Inputs are element_bytes-wide strings.
PartyReport run_party_protocol(Party& p, const SessionConfig& cfg, const std::vector<Bytes>& input,
                               std::vector<Bytes>* union_out);

/// All m parties in this process, over the configured transport (TCP uses
/// loopback with ephemeral ports).
SessionResult run_session(const SessionConfig& cfg, const std::vector<std::vector<Bytes>>& inputs);

/// A single party of a multi-process TCP session. `peers[i]` is party i's
/// listen address; this party listens on peers[id].port.
SessionResult run_single_party(const SessionConfig& cfg, PartyId id, const std::vector<PeerAddress>& peers,
                               const std::vector<Bytes>& input);

/// {protocol, m, n, per_party: [{sent_bytes, recv_bytes, rounds, phase_breakdown}], wall_ms,
/// leader_bytes_total, critical_path_rounds}. Per-party rounds count send flights.
nlohmann::json stats_json(const SessionConfig& cfg, const SessionResult& r);

/// Plaintext union of element strings, sorted.
std::vector<Bytes> plain_union(const std::vector<std::vector<Bytes>>& sets);

/// m sets of n distinct l-bit elements; each element of party i > 0 is, with
/// probability `overlap`, drawn from the earlier parties' elements. `max_value`
/// bounds elements as integers (0 = no bound beyond l bits).
std::vector<std::vector<Bytes>> synth_sets(std::size_t m, std::size_t n, std::size_t l, double overlap,
                                           std::uint64_t seed, std::uint64_t max_value = 0);

/// Newline-separated hex, one element per line.
std::vector<Bytes> read_set_file(const std::string& path, std::size_t element_bytes);
void write_set_file(const std::string& path, const std::vector<Bytes>& set);

}  // namespace mpsu
