#include "mpsu/session.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <thread>

#include <spdlog/spdlog.h>

namespace mpsu {

const char* protocol_name(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::Sk: return "sk";
    case ProtocolKind::Pk: return "pk";
    case ProtocolKind::Pid: return "pid";
  }
  return "?";
}

ProtocolKind parse_protocol(std::string_view s) {
  if (s == "sk") return ProtocolKind::Sk;
  if (s == "pk") return ProtocolKind::Pk;
  if (s == "pid") return ProtocolKind::Pid;
  fail(Errc::InvalidConfig, "unknown protocol: " + std::string(s));
}

const char* transport_name(TransportKind k) { return k == TransportKind::Memory ? "memory" : "tcp"; }

TransportKind parse_transport(std::string_view s) {
  if (s == "memory") return TransportKind::Memory;
  if (s == "tcp") return TransportKind::Tcp;
  fail(Errc::InvalidConfig, "unknown transport: " + std::string(s));
}

Bytes config_digest(const SessionConfig& cfg) {
  Writer w;
  w.u32(1);  // hello version
  w.u8(static_cast<std::uint8_t>(cfg.protocol));
  w.u64(cfg.m);
  w.u64(cfg.n);
  w.u64(cfg.l);
  w.u32(static_cast<std::uint32_t>(cfg.group.size())).raw(as_bytes(cfg.group));
  w.u8(static_cast<std::uint8_t>(cfg.resources));
  w.raw(hash_seed(cfg));
  w.raw(dealer_seed(cfg));
  Bytes out(32);
  const Bytes body = w.take();
  blake2b(out, {as_bytes("mpsu.hello"), body});
  return out;
}

Rng::Seed party_seed(const SessionConfig& cfg, PartyId id) {
  Rng::Seed s;
  blake2b(s, {as_bytes("mpsu.party"), u64_le(cfg.seed), u64_le(id)});
  return s;
}

Rng::Seed dealer_seed(const SessionConfig& cfg) {
  Rng::Seed s;
  blake2b(s, {as_bytes("mpsu.dealer"), u64_le(cfg.seed)});
  return s;
}

std::array<std::uint8_t, 16> hash_seed(const SessionConfig& cfg) {
  std::array<std::uint8_t, 16> s;
  blake2b(s, {as_bytes("mpsu.hash"), u64_le(cfg.seed)});
  return s;
}

namespace {

PartyOptions party_options(const SessionConfig& cfg) {
  PartyOptions o;
  o.resources = cfg.resources;
  o.dealer_seed = dealer_seed(cfg);
  o.timeout = cfg.timeout;
#ifdef MPSU_TEST_HOOKS
  o.hooks = cfg.hooks;
#endif
  return o;
}

void hello(Party& p, const SessionConfig& cfg) {
  PhaseScope ph(p, "setup");
  const Bytes digest = config_digest(cfg);
  for (PartyId k = 0; k < p.num_parties(); ++k)
    if (k != p.id()) p.send(k, Tag::Hello, digest);
  for (PartyId k = 0; k < p.num_parties(); ++k)
    if (k != p.id() && p.recv(k, Tag::Hello) != digest)
      fail(Errc::ConfigMismatch, "party " + std::to_string(k) + " runs a different configuration");
}

Bytes encoding(const Group& g, const GroupElement& e) {
  auto b = g.encode(e);
  return {b.begin(), b.end()};
}

void check_config(const SessionConfig& cfg) {
  if (cfg.m < 3) fail(Errc::InvalidConfig, "at least three parties are required");
  if (cfg.l == 0 || cfg.l > 256) fail(Errc::InvalidConfig, "element bits must be in [1, 256]");
}

}  // namespace

PartyReport run_party_protocol(Party& p, const SessionConfig& cfg, const std::vector<Bytes>& input,
                               std::vector<Bytes>* union_out) {
  check_config(cfg);
  auto group = group_by_name(cfg.group);
  hello(p, cfg);
  spdlog::debug("party {}: hello ok, running {}", p.id(), protocol_name(cfg.protocol));

  PartyReport rep;
  std::vector<Bytes> result;
  switch (cfg.protocol) {
    case ProtocolKind::Sk: {
      auto setup = make_string_setup(group, cfg.m, cfg.n, cfg.l, hash_seed(cfg));
      result = sk_mpsu(p, setup, input);
      break;
    }
    case ProtocolKind::Pk: {
      // strings are embedded through the small-integer dictionary
      auto setup = make_group_setup(group, cfg.m, cfg.n, hash_seed(cfg));
      const auto& dict = ElementDictionary::shared(group);
      const std::size_t eb = bits_to_bytes(cfg.l);
      std::vector<GroupElement> elems;
      for (const auto& x : input) {
        if (x.size() != eb) fail(Errc::InvalidConfig, "element width mismatch");
        const auto v = element_to_u64(x);
        if (v >= dict.bound()) fail(Errc::OutOfDictionary, "element exceeds the PK dictionary bound");
        elems.push_back(dict.encode(v));
      }
      for (const auto& e : pk_mpsu(p, setup, elems)) result.push_back(u64_to_element(dict.decode(e), eb));
      std::sort(result.begin(), result.end());
      break;
    }
    case ProtocolKind::Pid: {
      auto setup = make_group_setup(group, cfg.m, cfg.n, hash_seed(cfg));
      auto out = private_id(p, setup, input);
      for (const auto& e : out.all) rep.pid_all.push_back(encoding(*group, e));
      for (const auto& e : out.mine) rep.pid_mine.push_back(encoding(*group, e));
      if (p.id() == 0) result = rep.pid_all;
      break;
    }
  }
  rep.stats = p.stats();
  rep.transcript = p.transcript_digest();
  if (union_out && p.id() == 0) *union_out = std::move(result);
  spdlog::debug("party {}: done, sent {} bytes", p.id(), rep.stats.sent_bytes());
  return rep;
}

namespace {

std::vector<ChannelSet> tcp_meshes(const SessionConfig& cfg) {
  std::vector<std::unique_ptr<TcpListener>> listeners;
  std::vector<PeerAddress> addrs(cfg.m);
  for (std::size_t i = 0; i < cfg.m; ++i) {
    listeners.push_back(std::make_unique<TcpListener>(0));
    addrs[i].port = listeners.back()->port();
  }
  std::vector<ChannelSet> meshes(cfg.m);
  std::vector<std::exception_ptr> errors(cfg.m);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < cfg.m; ++i)
    threads.emplace_back([&, i] {
      try {
        meshes[i] = tcp_connect_mesh(i, addrs, *listeners[i], cfg.timeout);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  for (auto& t : threads) t.join();
  rethrow_root_cause(errors);
  return meshes;
}

}  // namespace

SessionResult run_session(const SessionConfig& cfg, const std::vector<std::vector<Bytes>>& inputs) {
  check_config(cfg);
  if (inputs.size() != cfg.m) fail(Errc::InvalidConfig, "one input set per party required");
  const auto start = std::chrono::steady_clock::now();

  std::vector<ChannelSet> meshes =
      cfg.transport == TransportKind::Memory ? make_memory_mesh(cfg.m) : tcp_meshes(cfg);
  PartyList parties;
  const auto opts = party_options(cfg);
  for (std::size_t i = 0; i < cfg.m; ++i)
    parties.push_back(std::make_unique<Party>(i, std::move(meshes[i]), party_seed(cfg, i), opts));

  SessionResult res;
  res.parties.resize(cfg.m);
  auto errors = run_parties(parties, [&](Party& p) {
    res.parties[p.id()] = run_party_protocol(p, cfg, inputs[p.id()], &res.union_set);
  });
  rethrow_root_cause(errors);
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  res.rounds = critical_path_rounds(parties);
  return res;
}

SessionResult run_single_party(const SessionConfig& cfg, PartyId id, const std::vector<PeerAddress>& peers,
                               const std::vector<Bytes>& input) {
  check_config(cfg);
  if (peers.size() != cfg.m || id >= cfg.m) fail(Errc::InvalidConfig, "peer list does not match m");
  const auto start = std::chrono::steady_clock::now();
  TcpListener listener(peers[id].port, peers[id].host);
  Party party(id, tcp_connect_mesh(id, peers, listener, cfg.timeout), party_seed(cfg, id), party_options(cfg));
  SessionResult res;
  try {
    res.parties.push_back(run_party_protocol(party, cfg, input, &res.union_set));
  } catch (...) {
    party.close_all();
    throw;
  }
  res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return res;
}

nlohmann::json stats_json(const SessionConfig& cfg, const SessionResult& r) {
  nlohmann::json per_party = nlohmann::json::array();
  for (const auto& rep : r.parties) {
    nlohmann::json phases = nlohmann::json::object();
    for (const auto& [name, st] : rep.stats.phases)
      phases[name] = {{"sent_bytes", st.sent_bytes}, {"recv_bytes", st.recv_bytes}, {"rounds", st.rounds}};
    per_party.push_back({{"sent_bytes", rep.stats.sent_bytes()},
                         {"recv_bytes", rep.stats.recv_bytes()},
                         {"rounds", rep.stats.rounds()},
                         {"phase_breakdown", phases}});
  }
  std::uint64_t leader = 0;
  if (!r.parties.empty()) leader = r.parties[0].stats.sent_bytes() + r.parties[0].stats.recv_bytes();
  return {{"protocol", protocol_name(cfg.protocol)},
          {"m", cfg.m},
          {"n", cfg.n},
          {"per_party", per_party},
          {"wall_ms", r.wall_ms},
          {"leader_bytes_total", leader},
          {"critical_path_rounds", r.rounds}};
}

std::vector<Bytes> plain_union(const std::vector<std::vector<Bytes>>& sets) {
  std::set<Bytes> u;
  for (const auto& s : sets) u.insert(s.begin(), s.end());
  return {u.begin(), u.end()};
}

std::vector<std::vector<Bytes>> synth_sets(std::size_t m, std::size_t n, std::size_t l, double overlap,
                                           std::uint64_t seed, std::uint64_t max_value) {
  const std::size_t eb = bits_to_bytes(l);
  Rng rng(seed);
  auto fresh = [&] {
    Bytes x = rng.bytes(eb);
    if (l % 8) x[0] &= static_cast<std::uint8_t>((1u << (l % 8)) - 1);
    if (max_value) {
      std::fill(x.begin(), x.end(), 0);
      auto v = u64_to_element(rng.uniform(max_value), std::min<std::size_t>(eb, 8));
      std::copy(v.begin(), v.end(), x.end() - static_cast<std::ptrdiff_t>(v.size()));
    }
    return x;
  };
  std::vector<Bytes> pool;
  std::vector<std::vector<Bytes>> out(m);
  const std::uint64_t threshold = static_cast<std::uint64_t>(overlap * 1e6);
  for (std::size_t i = 0; i < m; ++i) {
    std::set<Bytes> mine;
    while (mine.size() < n) {
      Bytes x = (i > 0 && !pool.empty() && rng.uniform(1000000) < threshold) ? pool[rng.uniform(pool.size())] : fresh();
      if (mine.insert(x).second) out[i].push_back(std::move(x));
    }
    pool.insert(pool.end(), out[i].begin(), out[i].end());
  }
  return out;
}

std::vector<Bytes> read_set_file(const std::string& path, std::size_t element_bytes) {
  std::ifstream in(path);
  if (!in) fail(Errc::InvalidConfig, "cannot open " + path);
  std::vector<Bytes> out;
  std::set<Bytes> seen;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    Bytes x = from_hex(line);
    if (x.size() != element_bytes) fail(Errc::InvalidConfig, path + ": element width mismatch: " + line);
    if (!seen.insert(x).second) fail(Errc::InvalidConfig, path + ": duplicate element " + line);
    out.push_back(std::move(x));
  }
  return out;
}

void write_set_file(const std::string& path, const std::vector<Bytes>& set) {
  std::ofstream out(path);
  if (!out) fail(Errc::InvalidConfig, "cannot write " + path);
  for (const auto& x : set) out << to_hex(x) << '\n';
}

}  // namespace mpsu
