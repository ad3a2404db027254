#include <map>
#include <mutex>
#include <set>

#include "helpers.hpp"
#include "mpsu/protocols.hpp"
#include "mpsu/session.hpp"

using namespace mpsu;
using namespace mpsu::testing;

namespace {

std::array<std::uint8_t, 16> seed16(std::uint8_t v) {
  std::array<std::uint8_t, 16> s;
  s.fill(v);
  return s;
}

std::vector<Bytes> sk_run(const MpsuSetup& setup, const std::vector<std::vector<Bytes>>& sets, std::uint64_t seed,
                          PartyOptions opts = {}) {
  auto parties = memory_parties(sets.size(), seed, opts);
  std::vector<Bytes> out;
  run_all(parties, [&](Party& p) {
    auto r = sk_mpsu(p, setup, sets[p.id()]);
    if (p.id() == 0) out = r;
    else CHECK(r.empty());
  });
  return out;
}

Bytes elem(std::uint64_t v) { return u64_to_element(v, 4); }

Scalar scalar_of(ByteSpan b) {
  Scalar s;
  std::copy(b.begin(), b.end(), s.bytes.begin());
  return s;
}

}  // namespace

TEST_CASE("SK-MPSU: identical sets") {
  auto setup = make_string_setup(test_group(), 3, 10, 32, seed16(1));
  std::vector<Bytes> X;
  for (std::uint64_t v = 100; v < 110; ++v) X.push_back(elem(v));
  CHECK(sk_run(setup, {X, X, X}, 1) == plain_union({X}));
}

TEST_CASE("SK-MPSU: disjoint sets") {
  auto setup = make_string_setup(test_group(), 3, 8, 32, seed16(2));
  std::vector<std::vector<Bytes>> sets(3);
  for (std::uint64_t i = 0; i < 3; ++i)
    for (std::uint64_t k = 0; k < 8; ++k) sets[i].push_back(elem(1000 * i + k));
  auto u = sk_run(setup, sets, 2);
  CHECK(u.size() == 24);
  CHECK(u == plain_union(sets));
}

TEST_CASE("SK-MPSU: empty and short sets") {
  auto setup = make_string_setup(test_group(), 4, 6, 32, seed16(3));
  std::vector<std::vector<Bytes>> sets{{}, {elem(1), elem(2)}, {}, {elem(2), elem(9)}};
  CHECK(sk_run(setup, sets, 3) == plain_union(sets));
}

TEST_CASE("SK-MPSU in interactive mode") {
  auto setup = make_string_setup(test_group(), 3, 30, 64, seed16(4));
  auto sets = synth_sets(3, 30, 64, 0.4, 4);
  CHECK(sk_run(setup, sets, 4, with_mode(ResourceMode::Interactive)) == plain_union(sets));
}

TEST_CASE("SK-MPSU rejects bad inputs") {
  auto setup = make_string_setup(test_group(), 3, 2, 32, seed16(5));
  auto parties = memory_parties(3, 5);
  std::vector<std::vector<Bytes>> bad{{elem(1), elem(1)}, {elem(2)}, {elem(3)}};
  auto errors = run_parties(parties, [&](Party& p) { sk_mpsu(p, setup, bad[p.id()]); });
  CHECK(error_code([&] { rethrow_root_cause(errors); }) == Errc::InvalidConfig);

  auto parties2 = memory_parties(3, 6);
  std::vector<std::vector<Bytes>> too_many{{elem(1), elem(2), elem(3)}, {}, {}};
  errors = run_parties(parties2, [&](Party& p) { sk_mpsu(p, setup, too_many[p.id()]); });
  CHECK(error_code([&] { rethrow_root_cause(errors); }) == Errc::InvalidConfig);
}

TEST_CASE("SK-MPSU masked slots before the shuffle") {
  const std::size_t m = 4, n = 12;
  auto setup = make_string_setup(test_group(), m, n, 32, seed16(6));
  auto sets = synth_sets(m, n, 32, 0.5, 6);
  auto hooks = std::make_shared<TestHooks>();
  std::mutex mu;
  std::map<PartyId, RowVec> pre;
  hooks->pre_shuffle_shares = [&](PartyId id, const RowVec& sh) {
    std::lock_guard lock(mu);
    pre[id] = sh;
  };
  PartyOptions opts;
  opts.hooks = hooks;
  CHECK(sk_run(setup, sets, 6, opts) == plain_union(sets));

  REQUIRE(pre.size() == m);
  RowVec v = pre[0];
  for (PartyId i = 1; i < m; ++i) v ^= pre[i];
  const std::size_t B = setup.params.bins, lb = setup.params.element_bytes();
  std::set<Bytes> earlier(sets[0].begin(), sets[0].end());
  std::size_t fresh = 0, dup = 0;
  for (PartyId j = 1; j < m; ++j) {
    auto cuckoo = cuckoo_insert(setup.hash, sets[j]);
    for (std::size_t b = 0; b < B; ++b) {
      auto row = v[(j - 1) * B + b];
      Bytes x(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(lb));
      auto tag = payload_hash(x, setup.params.kappa_bytes());
      const bool valid = std::equal(tag.begin(), tag.end(), row.begin() + static_cast<std::ptrdiff_t>(lb));
      if (cuckoo[b] && !earlier.count(cuckoo[b]->element)) {
        CHECK(valid);
        CHECK(x == cuckoo[b]->element);
        ++fresh;
      } else {
        CHECK_FALSE(valid);
        dup += cuckoo[b].has_value();
      }
    }
    earlier.insert(sets[j].begin(), sets[j].end());
  }
  CHECK(fresh + n == plain_union(sets).size());
  CHECK(dup > 0);
}

TEST_CASE("PK-MPSU: disjoint singletons and overlap") {
  auto g = test_group();
  auto setup = make_group_setup(g, 3, 1, seed16(7));
  std::vector<std::vector<GroupElement>> sets{{g->exp_base(g->scalar_from_u64(5))},
                                              {g->exp_base(g->scalar_from_u64(6))},
                                              {g->exp_base(g->scalar_from_u64(7))}};
  auto parties = memory_parties(3, 7);
  std::vector<GroupElement> out;
  run_all(parties, [&](Party& p) {
    auto r = pk_mpsu(p, setup, sets[p.id()]);
    if (p.id() == 0) out = r;
  });
  CHECK(out.size() == 3);

  auto parties2 = memory_parties(3, 8);
  sets[2] = sets[1];
  run_all(parties2, [&](Party& p) {
    auto r = pk_mpsu(p, setup, sets[p.id()]);
    if (p.id() == 0) out = r;
  });
  CHECK(out.size() == 2);
}

TEST_CASE("PK-MPSU replacement passes decrypt as expected") {
  const std::size_t m = 5, n = 10;
  auto g = test_group();
  auto setup = make_group_setup(g, m, n, seed16(8));
  const auto& dict = ElementDictionary::shared(g);
  auto strings = synth_sets(m, n, 64, 0.5, 8, 5000);
  std::vector<std::vector<GroupElement>> sets(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& x : strings[i]) sets[i].push_back(dict.encode(element_to_u64(x)));

  auto hooks = std::make_shared<TestHooks>();
  std::mutex mu;
  std::map<PartyId, Scalar> sks;
  std::vector<std::tuple<PartyId, PartyId, std::vector<Ciphertext>>> passes;
  hooks->pk_secret_key = [&](PartyId id, ByteSpan sk) {
    std::lock_guard lock(mu);
    sks[id] = scalar_of(sk);
  };
  hooks->pk_after_pass = [&](PartyId j, PartyId i, const std::vector<Ciphertext>& c) {
    std::lock_guard lock(mu);
    passes.emplace_back(j, i, c);
  };
  PartyOptions opts;
  opts.hooks = hooks;
  auto parties = memory_parties(m, 9, opts);
  std::vector<GroupElement> out;
  run_all(parties, [&](Party& p) {
    auto r = pk_mpsu(p, setup, sets[p.id()]);
    if (p.id() == 0) out = r;
  });
  CHECK(out.size() == plain_union(strings).size());

  Scalar sk = g->scalar_from_u64(0);
  for (auto& [id, s] : sks) sk = g->scalar_add(sk, s);
  // passes (j, i) for 1 <= i < j < m
  CHECK(passes.size() == (m - 1) * (m - 2) / 2);
  std::vector<std::vector<Bytes>> enc(m);
  for (std::size_t i = 0; i < m; ++i)
    for (const auto& e : sets[i]) enc[i].emplace_back(g->encode(e).begin(), g->encode(e).end());
  for (const auto& [j, i, cts] : passes) {
    auto cuckoo = cuckoo_insert(setup.hash, enc[j]);
    std::set<Bytes> seen;
    for (PartyId d = 1; d <= i; ++d) seen.insert(enc[d].begin(), enc[d].end());
    for (std::size_t b = 0; b < cts.size(); ++b) {
      auto pt = decrypt(*g, sk, cts[b]);
      if (cuckoo[b] && !seen.count(cuckoo[b]->element))
        CHECK(pt == g->decode(cuckoo[b]->element));
      else
        CHECK(is_bottom(*g, pt));
    }
  }
}

TEST_CASE("PK-MPSU rejects the identity as an input") {
  auto g = test_group();
  auto setup = make_group_setup(g, 3, 2, seed16(9));
  auto parties = memory_parties(3, 10);
  auto errors = run_parties(parties, [&](Party& p) {
    std::vector<GroupElement> s{p.id() == 1 ? g->identity() : g->generator()};
    pk_mpsu(p, setup, s);
  });
  CHECK(error_code([&] { rethrow_root_cause(errors); }) == Errc::InvalidConfig);
}

TEST_CASE("private-ID agrees with the pooled-key PRF") {
  const std::size_t m = 3, n = 16;
  auto g = test_group();
  auto setup = make_group_setup(g, m, n, seed16(10));
  auto sets = synth_sets(m, n, 64, 0.5, 10);
  auto hooks = std::make_shared<TestHooks>();
  std::mutex mu;
  std::map<PartyId, Scalar> keys;
  hooks->pid_key = [&](PartyId id, ByteSpan k) {
    std::lock_guard lock(mu);
    keys[id] = scalar_of(k);
  };
  PartyOptions opts;
  opts.hooks = hooks;
  auto parties = memory_parties(m, 11, opts);
  std::vector<PrivateIdOutput> outs(m);
  run_all(parties, [&](Party& p) { outs[p.id()] = private_id(p, setup, sets[p.id()]); });

  Scalar k = g->scalar_from_u64(1);
  for (auto& [id, s] : keys) k = g->scalar_mul(k, s);
  auto oracle = [&](const Bytes& x) { return g->exp(g->hash_to_group(x), k); };
  std::set<std::array<std::uint8_t, 32>> want;
  for (const auto& x : plain_union(sets)) want.insert(oracle(x).bytes);
  for (std::size_t i = 0; i < m; ++i) {
    REQUIRE(outs[i].mine.size() == sets[i].size());
    for (std::size_t t = 0; t < sets[i].size(); ++t) CHECK(outs[i].mine[t] == oracle(sets[i][t]));
    std::set<std::array<std::uint8_t, 32>> got;
    for (const auto& r : outs[i].all) got.insert(r.bytes);
    CHECK(got == want);
    CHECK(outs[i].all.size() == want.size());
  }
}

TEST_CASE("private-ID with disjoint sets") {
  const std::size_t m = 4, n = 5;
  auto setup = make_group_setup(test_group(), m, n, seed16(11));
  auto sets = synth_sets(m, n, 64, 0.0, 12);
  auto parties = memory_parties(m, 12);
  std::vector<PrivateIdOutput> outs(m);
  run_all(parties, [&](Party& p) { outs[p.id()] = private_id(p, setup, sets[p.id()]); });
  for (const auto& o : outs) CHECK(o.all.size() == m * n);
}

TEST_CASE("cOPRF leakage demo") {
  auto g = test_group();
  const Bytes x{1, 2, 3, 4};
  const std::vector<Bytes> with{Bytes{9, 9, 9, 9}, x}, without{Bytes{9, 9, 9, 9}};
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto a = gnt_leakage_demo(g, x, with, x, s);
    CHECK(a.truth);
    CHECK(a.inferred);
    auto b = gnt_leakage_demo(g, x, without, x, s);
    CHECK_FALSE(b.truth);
    CHECK_FALSE(b.inferred);
  }
}

TEST_CASE("injected crash reaches every party") {
  for (const char* phase : {"sspmt", "mssrot", "shuffle"}) {
    CAPTURE(phase);
    auto setup = make_string_setup(test_group(), 4, 8, 32, seed16(13));
    auto sets = synth_sets(4, 8, 32, 0.3, 13);
    auto hooks = std::make_shared<TestHooks>();
    hooks->crash_party = 2;
    hooks->crash_phase = phase;
    PartyOptions opts;
    opts.hooks = hooks;
    opts.timeout = std::chrono::milliseconds(5000);
    auto parties = memory_parties(4, 13, opts);
    const auto start = std::chrono::steady_clock::now();
    auto errors = run_parties(parties, [&](Party& p) { sk_mpsu(p, setup, sets[p.id()]); });
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(4));
    for (auto& e : errors) {
      REQUIRE(e);
      CHECK(error_code([&] { std::rethrow_exception(e); }) == Errc::PeerCrash);
    }
  }
}
