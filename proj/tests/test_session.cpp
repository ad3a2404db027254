#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include "helpers.hpp"
#include "mpsu/session.hpp"

using namespace mpsu;
using namespace mpsu::testing;

namespace {

SessionConfig config(ProtocolKind k, std::size_t m, std::size_t n, std::uint64_t seed) {
  SessionConfig cfg;
  cfg.protocol = k;
  cfg.m = m;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

std::uint64_t bound_for(const SessionConfig& cfg) {
  return cfg.protocol == ProtocolKind::Pk ? ElementDictionary::kDefaultBound : 0;
}

}  // namespace

TEST_CASE("sessions compute the union") {
  for (auto k : {ProtocolKind::Sk, ProtocolKind::Pk}) {
    auto cfg = config(k, 3, 20, 1);
    auto sets = synth_sets(3, 20, 64, 0.3, 1, bound_for(cfg));
    auto res = run_session(cfg, sets);
    CHECK(res.union_set == plain_union(sets));
    CHECK(res.parties.size() == 3);
  }
}

TEST_CASE("parties with different configurations refuse to run") {
  auto cfg = config(ProtocolKind::Sk, 3, 8, 1);
  auto other = cfg;
  other.n = 9;
  CHECK(config_digest(cfg) != config_digest(other));
  CHECK(config_digest(cfg) == config_digest(config(ProtocolKind::Sk, 3, 8, 1)));
  other = cfg;
  other.resources = ResourceMode::Interactive;
  CHECK(config_digest(cfg) != config_digest(other));

  auto mesh = make_memory_mesh(3);
  PartyList parties;
  for (PartyId i = 0; i < 3; ++i)
    parties.push_back(std::make_unique<Party>(i, std::move(mesh[i]), party_seed(cfg, i), PartyOptions{}));
  auto sets = synth_sets(3, 8, 64, 0.3, 1);
  auto errors = run_parties(parties, [&](Party& p) {
    auto c = cfg;
    if (p.id() == 2) c.l = 32;
    run_party_protocol(p, c, sets[p.id()], nullptr);
  });
  CHECK(error_code([&] { rethrow_root_cause(errors); }) == Errc::ConfigMismatch);
}

TEST_CASE("fixed seeds give identical transcripts") {
  for (auto k : {ProtocolKind::Sk, ProtocolKind::Pk, ProtocolKind::Pid}) {
    auto cfg = config(k, 3, 12, 5);
    auto sets = synth_sets(3, 12, 64, 0.3, 5, bound_for(cfg));
    auto a = run_session(cfg, sets), b = run_session(cfg, sets);
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.parties[i].transcript == b.parties[i].transcript);
    cfg.seed = 6;
    auto c = run_session(cfg, sets);
    CHECK(c.parties[0].transcript != a.parties[0].transcript);
    // private-ID identifiers depend on the session keys
    if (k != ProtocolKind::Pid) CHECK(c.union_set == a.union_set);
  }
}

TEST_CASE("TCP and memory transports agree") {
  auto cfg = config(ProtocolKind::Sk, 3, 32, 7);
  auto sets = synth_sets(3, 32, 64, 0.3, 7);
  auto mem = run_session(cfg, sets);
  cfg.transport = TransportKind::Tcp;
  auto tcp = run_session(cfg, sets);
  CHECK(tcp.union_set == mem.union_set);
  CHECK(tcp.parties[1].transcript == mem.parties[1].transcript);
}

TEST_CASE("separate single-party runs over TCP") {
  auto cfg = config(ProtocolKind::Sk, 3, 16, 8);
  cfg.transport = TransportKind::Tcp;
  auto sets = synth_sets(3, 16, 64, 0.3, 8);
  std::vector<PeerAddress> peers(3);
  for (auto& a : peers) {
    TcpListener probe(0);
    a.port = probe.port();
  }
  std::vector<SessionResult> res(3);
  std::vector<std::exception_ptr> errors(3);
  std::vector<std::thread> threads;
  for (PartyId i = 0; i < 3; ++i)
    threads.emplace_back([&, i] {
      try {
        res[i] = run_single_party(cfg, i, peers, sets[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  for (auto& t : threads) t.join();
  rethrow_root_cause(errors);
  CHECK(res[0].union_set == plain_union(sets));
  CHECK(res[1].union_set.empty());
}

TEST_CASE("stats JSON layout") {
  auto cfg = config(ProtocolKind::Sk, 3, 16, 9);
  auto res = run_session(cfg, synth_sets(3, 16, 64, 0.3, 9));
  auto j = stats_json(cfg, res);
  CHECK(j["protocol"] == "sk");
  CHECK(j["m"] == 3);
  CHECK(j["n"] == 16);
  REQUIRE(j["per_party"].size() == 3);
  std::uint64_t sent = 0, recv = 0;
  for (const auto& pp : j["per_party"]) {
    CHECK(pp.contains("rounds"));
    std::uint64_t phase_sum = 0;
    for (const auto& [name, ph] : pp["phase_breakdown"].items()) phase_sum += ph["sent_bytes"].get<std::uint64_t>();
    CHECK(phase_sum == pp["sent_bytes"].get<std::uint64_t>());
    sent += pp["sent_bytes"].get<std::uint64_t>();
    recv += pp["recv_bytes"].get<std::uint64_t>();
  }
  CHECK(sent == recv);
  for (const char* ph : {"binning", "triples", "sspmt", "mssrot", "shuffle", "reconstruct"})
    CHECK(j["per_party"][0]["phase_breakdown"].contains(ph));
  CHECK(j["leader_bytes_total"].get<std::uint64_t>() ==
        j["per_party"][0]["sent_bytes"].get<std::uint64_t>() + j["per_party"][0]["recv_bytes"].get<std::uint64_t>());
  CHECK(j["wall_ms"].get<double>() > 0);
}

TEST_CASE("PK strings must fit the dictionary") {
  auto cfg = config(ProtocolKind::Pk, 3, 2, 10);
  std::vector<std::vector<Bytes>> sets{{u64_to_element(1, 8)}, {u64_to_element(1ull << 40, 8)}, {}};
  CHECK(error_code([&] { run_session(cfg, sets); }) == Errc::OutOfDictionary);
}

TEST_CASE("synthetic sets") {
  auto sets = synth_sets(4, 50, 20, 0.5, 3);
  std::set<Bytes> pool;
  std::size_t shared = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(sets[i].size() == 50);
    CHECK(std::set<Bytes>(sets[i].begin(), sets[i].end()).size() == 50);
    for (const auto& x : sets[i]) {
      CHECK(x.size() == 3);
      CHECK(x[0] < 16);  // 20 bits
      shared += pool.count(x);
    }
    pool.insert(sets[i].begin(), sets[i].end());
  }
  CHECK(shared > 40);
  CHECK(synth_sets(3, 0, 64, 0.5, 1)[0].empty());
  for (const auto& s : synth_sets(3, 100, 64, 0.3, 2, 1000))
    for (const auto& x : s) CHECK(element_to_u64(x) < 1000);
}

TEST_CASE("set files") {
  const std::string path = "mpsu_set_file_test.txt";
  auto sets = synth_sets(3, 10, 24, 0.0, 4);
  write_set_file(path, sets[0]);
  CHECK(read_set_file(path, 3) == sets[0]);
  CHECK(error_code([&] { read_set_file(path, 4); }) == Errc::InvalidConfig);
  {
    std::ofstream out(path);
    out << "0a0b0c\n\n0a0b0c\n";
  }
  CHECK(error_code([&] { read_set_file(path, 3); }) == Errc::InvalidConfig);
  std::remove(path.c_str());
  CHECK(error_code([&] { read_set_file("/nonexistent/x", 3); }) == Errc::InvalidConfig);
}

TEST_CASE("protocol and transport names") {
  CHECK(parse_protocol(protocol_name(ProtocolKind::Pid)) == ProtocolKind::Pid);
  CHECK(parse_transport("tcp") == TransportKind::Tcp);
  CHECK(error_code([] { parse_protocol("x"); }) == Errc::InvalidConfig);
  CHECK(error_code([] { run_session(config(ProtocolKind::Sk, 2, 4, 1), {{}, {}}); }) == Errc::InvalidConfig);
}
