// mpsu command-line driver: run, bench, demo-attack, gen-sets, selftest.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "mpsu/mssrot.hpp"
#include "mpsu/okvs.hpp"
#include "mpsu/session.hpp"
#include "mpsu/shuffle.hpp"

using namespace mpsu;

namespace {

struct CommonOpts {
  std::string protocol = "sk";
  std::string group = "test";
  std::string resources = "dealer";
  std::string transport = "memory";
  std::uint64_t seed = 1;
  std::size_t element_bits = 64;
  double overlap = 0.3;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--protocol", o.protocol, "sk | pk | pid")->check(CLI::IsMember({"sk", "pk", "pid"}));
  cmd->add_option("--group", o.group, "test | production")->check(CLI::IsMember({"test", "production"}));
  cmd->add_option("--resource-mode", o.resources, "dealer | interactive")
      ->check(CLI::IsMember({"dealer", "interactive"}));
  cmd->add_option("--transport", o.transport, "memory | tcp")->check(CLI::IsMember({"memory", "tcp"}));
  cmd->add_option("--seed", o.seed, "session seed");
  cmd->add_option("--element-bits", o.element_bits, "element length l in bits")->check(CLI::Range(1, 256));
  cmd->add_option("--overlap", o.overlap, "fraction of synthetic elements shared with earlier parties")
      ->check(CLI::Range(0.0, 1.0));
}

SessionConfig make_config(const CommonOpts& o, std::size_t m, std::size_t n) {
  SessionConfig cfg;
  cfg.protocol = parse_protocol(o.protocol);
  cfg.group = o.group;
  cfg.resources = parse_resource_mode(o.resources);
  cfg.transport = parse_transport(o.transport);
  cfg.seed = o.seed;
  cfg.m = m;
  cfg.n = n;
  cfg.l = o.element_bits;
  return cfg;
}

// PK strings go through the small-integer dictionary.
std::uint64_t value_bound(const SessionConfig& cfg) {
  return cfg.protocol == ProtocolKind::Pk ? ElementDictionary::kDefaultBound : 0;
}

std::vector<std::vector<Bytes>> synth_for(const SessionConfig& cfg, double overlap) {
  return synth_sets(cfg.m, cfg.n, cfg.l, overlap, cfg.seed ^ 0x5e75ull, value_bound(cfg));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(Errc::InvalidConfig, "cannot write " + path);
  out << text;
}

std::vector<PeerAddress> parse_peers(const std::vector<std::string>& specs) {
  std::vector<PeerAddress> out;
  for (const auto& s : specs) {
    const auto colon = s.rfind(':');
    if (colon == std::string::npos) fail(Errc::InvalidConfig, "peer must be host:port: " + s);
    PeerAddress a;
    a.host = s.substr(0, colon);
    a.port = static_cast<std::uint16_t>(std::stoul(s.substr(colon + 1)));
    out.push_back(a);
  }
  return out;
}

int cmd_run(const CommonOpts& o, std::size_t m, std::size_t n, const std::vector<std::string>& input_files,
            const std::string& out_path, const std::string& stats_out, int party_id,
            const std::vector<std::string>& peers) {
  SessionConfig cfg = make_config(o, m, n);
  const std::size_t eb = bits_to_bytes(cfg.l);
  std::vector<std::vector<Bytes>> inputs;
  if (!input_files.empty()) {
    for (const auto& f : input_files) inputs.push_back(read_set_file(f, eb));
  } else {
    inputs = synth_for(cfg, o.overlap);
  }

  SessionResult res;
  std::optional<std::size_t> oracle;
  if (party_id >= 0) {
    // one process per party: --input-file holds this party's set only
    if (inputs.size() != 1 && !input_files.empty())
      fail(Errc::InvalidConfig, "a single-party run takes exactly one --input-file");
    const auto& mine = input_files.empty() ? inputs.at(static_cast<std::size_t>(party_id)) : inputs[0];
    cfg.transport = TransportKind::Tcp;
    res = run_single_party(cfg, static_cast<PartyId>(party_id), parse_peers(peers), mine);
    if (input_files.empty()) oracle = plain_union(inputs).size();
  } else {
    if (inputs.size() != m) fail(Errc::InvalidConfig, "need one --input-file per party");
    res = run_session(cfg, inputs);
    oracle = plain_union(inputs).size();
  }

  const bool leader = party_id <= 0;
  if (leader) {
    std::cout << "union size: " << res.union_set.size();
    if (oracle && cfg.protocol != ProtocolKind::Pid) std::cout << " (plaintext union: " << *oracle << ")";
    std::cout << "\n";
    if (!out_path.empty()) write_set_file(out_path, res.union_set);
  }
  const auto stats = stats_json(cfg, res);
  if (!stats_out.empty()) write_text(stats_out, stats.dump(2) + "\n");
  std::cout << stats.dump(2) << "\n";
  return 0;
}

int cmd_bench(const CommonOpts& o, const std::vector<std::size_t>& parties, const std::vector<std::size_t>& sizes,
              const std::string& out_path) {
  nlohmann::json cells = nlohmann::json::array();
  std::ostringstream csv;
  csv << "protocol,m,n,leader_bytes_total,max_party_bytes,max_rounds,wall_ms,error\n";
  int failed = 0;
  for (auto m : parties)
    for (auto n : sizes) {
      SessionConfig cfg = make_config(o, m, n);
      SessionResult res;
      try {
        res = run_session(cfg, synth_for(cfg, o.overlap));
      } catch (const Error& e) {
        // a failed cell (e.g. a Cuckoo abort at tiny n) is recorded, not fatal to the sweep
        spdlog::warn("bench {} m={} n={}: {}", o.protocol, m, n, e.what());
        csv << o.protocol << ',' << m << ',' << n << ",,,,," << e.what() << '\n';
        cells.push_back({{"protocol", o.protocol}, {"m", m}, {"n", n}, {"error", e.what()}});
        ++failed;
        continue;
      }
      auto j = stats_json(cfg, res);
      std::uint64_t max_bytes = 0, max_rounds = 0;
      for (const auto& pp : j["per_party"]) {
        max_bytes = std::max<std::uint64_t>(max_bytes, pp["sent_bytes"].get<std::uint64_t>() + pp["recv_bytes"].get<std::uint64_t>());
        max_rounds = std::max<std::uint64_t>(max_rounds, pp["rounds"].get<std::uint64_t>());
      }
      csv << o.protocol << ',' << m << ',' << n << ',' << j["leader_bytes_total"].get<std::uint64_t>() << ','
          << max_bytes << ',' << max_rounds << ',' << res.wall_ms << ",\n";
      spdlog::info("bench {} m={} n={}: leader {} bytes, {:.1f} ms", o.protocol, m, n,
                   j["leader_bytes_total"].get<std::uint64_t>(), res.wall_ms);
      cells.push_back(std::move(j));
    }
  const bool as_csv = out_path.size() >= 4 && out_path.substr(out_path.size() - 4) == ".csv";
  const std::string text = as_csv ? csv.str() : cells.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_text(out_path, text);
  return failed ? 1 : 0;
}

int cmd_demo_attack(std::size_t trials, std::uint64_t seed, const std::string& group_name, bool verbose) {
  auto group = group_by_name(group_name);
  Rng rng(seed);
  std::size_t correct = 0, members = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const Bytes x = rng.bytes(8);
    std::vector<Bytes> X2;
    for (int k = 0; k < 7; ++k) X2.push_back(rng.bytes(8));
    const bool member = rng.bit();
    if (member) X2.insert(X2.begin() + static_cast<std::ptrdiff_t>(rng.uniform(X2.size() + 1)), x);
    auto trial = gnt_leakage_demo(group, x, X2, x, rng.next_u64());
    members += trial.truth;
    correct += trial.truth == trial.inferred;
    if (verbose)
      std::cout << "trial " << t << ": x3 in X2 = " << trial.truth << ", inferred = " << trial.inferred << "\n";
  }
  std::cout << "correct inferences: " << correct << "/" << trials << " (" << members << " trials with x3 in X2)\n";
  return 0;
}

int cmd_gen_sets(std::size_t m, std::size_t n, std::size_t bits, double overlap, std::uint64_t seed,
                 std::uint64_t max_value, const std::string& prefix) {
  auto sets = synth_sets(m, n, bits, overlap, seed, max_value);
  for (std::size_t i = 0; i < m; ++i) write_set_file(prefix + std::to_string(i) + ".txt", sets[i]);
  std::cout << "wrote " << m << " sets; plaintext union size " << plain_union(sets).size() << "\n";
  return 0;
}

// Quick invariant checks on small instances.
int cmd_selftest(std::uint64_t seed) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "ok    " : "FAIL  ") << name << "\n";
    failures += !ok;
  };
  auto guarded = [&](const std::string& name, const std::function<bool()>& fn) {
    try {
      check(name, fn());
    } catch (const std::exception& e) {
      check(name + " (" + e.what() + ")", false);
    }
  };

  for (auto proto : {ProtocolKind::Sk, ProtocolKind::Pk})
    for (std::size_t m : {3, 4}) {
      SessionConfig cfg;
      cfg.protocol = proto;
      cfg.m = m;
      cfg.n = 16;
      cfg.seed = seed + m;
      guarded(std::string(protocol_name(proto)) + " union m=" + std::to_string(m), [&] {
        auto sets = synth_sets(m, cfg.n, cfg.l, 0.3, cfg.seed, value_bound(cfg));
        return run_session(cfg, sets).union_set == plain_union(sets);
      });
    }

  guarded("private-ID identifiers agree", [&] {
    SessionConfig cfg;
    cfg.protocol = ProtocolKind::Pid;
    cfg.n = 16;
    cfg.seed = seed;
    auto sets = synth_sets(3, 16, 64, 0.5, seed, 0);
    auto res = run_session(cfg, sets);
    std::map<Bytes, Bytes> id_of;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < sets[i].size(); ++k) {
        auto [it, fresh] = id_of.emplace(sets[i][k], res.parties[i].pid_mine[k]);
        if (!fresh && it->second != res.parties[i].pid_mine[k]) return false;
      }
    return res.union_set.size() == plain_union(sets).size();
  });

  guarded("okvs round trip", [&] {
    Rng rng(seed);
    std::vector<Bytes> keys;
    for (int i = 0; i < 512; ++i) keys.push_back(rng.bytes(12));
    RowVec vals = RowVec::random(keys.size(), 8, rng);
    auto t = okvs_encode(keys, vals, 8, rng);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      auto d = t.decode(keys[i]);
      if (!std::equal(d.begin(), d.end(), vals[i].begin())) return false;
    }
    return true;
  });

  guarded("waksman routes random permutations", [&] {
    Rng rng(seed);
    for (std::size_t n : {2, 4, 8, 16, 64}) {
      auto perm = random_permutation(n, rng);
      RowVec in(n, 4);
      for (std::size_t i = 0; i < n; ++i) in[i][0] = static_cast<std::uint8_t>(i);
      if (waksman_apply(in, waksman_route(perm)).bytes() != in.permuted(perm).bytes()) return false;
    }
    return true;
  });

  guarded("mss-ROT relation (d=3)", [&] {
    std::vector<Rng::Seed> seeds(3);
    Rng rng(seed);
    for (auto& s : seeds) rng.fill(s);
    auto parties = make_memory_parties(3, seeds, {});
    const std::size_t count = 32;
    std::vector<BitVec> bits(3, BitVec(count));
    std::vector<RowVec> deltas(3);
    std::vector<RowVec> out(3);
    for (auto& b : bits)
      for (auto& v : b) v = rng.bit();
    for (auto& d : deltas) d = RowVec::random(count, 2, rng);
    MssRotConfig cfg;
    cfg.members = {0, 1, 2};
    cfg.ch0 = 0;
    cfg.ch1 = 2;
    cfg.J = {1, 2};
    cfg.width = 2;
    auto errors = run_parties(parties, [&](Party& p) {
      const auto i = p.id();
      out[i] = mss_rot_batch(p, cfg, count, (i == 0 || i == 2) ? &bits[i] : nullptr,
                             cfg.in_J(i) ? &deltas[i] : nullptr);
    });
    rethrow_root_cause(errors);
    RowVec sum = out[0] ^ out[1] ^ out[2];
    RowVec dsum = deltas[1] ^ deltas[2];
    for (std::size_t t = 0; t < count; ++t) {
      const bool on = bits[0][t] ^ bits[2][t];
      for (std::size_t k = 0; k < 2; ++k)
        if (sum[t][k] != (on ? dsum[t][k] : 0)) return false;
    }
    return true;
  });

  std::cout << (failures ? "selftest failed" : "selftest passed") << "\n";
  return failures ? 1 : 0;
}

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_logger_mt("mpsu"));
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("MPSU_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-party private set union toolkit"};
  app.require_subcommand(1);

  CommonOpts common;
  std::size_t parties = 3, set_size = 64, trials = 1000;
  std::vector<std::size_t> party_list{3}, size_list{64};
  std::vector<std::string> input_files, peers;
  std::string out_path, stats_out, prefix = "set_";
  int party_id = -1;
  std::uint64_t max_value = 0;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "execute one session");
  add_common(run, common);
  run->add_option("--parties", parties, "number of parties m")->check(CLI::Range(3, 64));
  run->add_option("--set-size", set_size, "elements per party n")->check(CLI::Range(1, 1 << 20));
  run->add_option("--input-file", input_files, "newline-separated hex set, one file per party (repeat)");
  run->add_option("--out", out_path, "write the union here");
  run->add_option("--stats-out", stats_out, "write stats JSON here");
  run->add_option("--party-id", party_id, "run only this party over TCP (multi-process)");
  run->add_option("--peers", peers, "host:port of every party, in id order (with --party-id)");

  auto* bench = app.add_subcommand("bench", "sweep an m x n grid");
  add_common(bench, common);
  bench->add_option("--parties", party_list, "comma-separated m values")->delimiter(',');
  bench->add_option("--set-sizes", size_list, "comma-separated n values")->delimiter(',');
  bench->add_option("--out", out_path, "JSON, or CSV when the name ends in .csv");

  auto* demo = app.add_subcommand("demo-attack", "membership leakage of a cOPRF-based design under collusion");
  demo->add_option("--trials", trials, "number of random scenarios");
  demo->add_option("--seed", common.seed, "seed");
  demo->add_option("--group", common.group, "test | production")->check(CLI::IsMember({"test", "production"}));
  demo->add_flag("--verbose", verbose, "print every trial");

  auto* gen = app.add_subcommand("gen-sets", "write synthetic input files");
  gen->add_option("--parties", parties, "number of parties")->check(CLI::Range(1, 64));
  gen->add_option("--set-size", set_size, "elements per party");
  gen->add_option("--element-bits", common.element_bits, "element bits")->check(CLI::Range(1, 256));
  gen->add_option("--overlap", common.overlap, "shared fraction")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--seed", common.seed, "seed");
  gen->add_option("--max-value", max_value, "exclusive bound on element values (0: none)");
  gen->add_option("--out-prefix", prefix, "files are <prefix><i>.txt");

  auto* self = app.add_subcommand("selftest", "invariant suite on small instances");
  self->add_option("--seed", common.seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  configure_logging();

  try {
    if (*run) return cmd_run(common, parties, set_size, input_files, out_path, stats_out, party_id, peers);
    if (*bench) return cmd_bench(common, party_list, size_list, out_path);
    if (*demo) return cmd_demo_attack(trials, common.seed, common.group, verbose);
    if (*gen) return cmd_gen_sets(parties, set_size, common.element_bits, common.overlap, common.seed, max_value, prefix);
    if (*self) return cmd_selftest(common.seed);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
