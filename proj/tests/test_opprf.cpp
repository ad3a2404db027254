#include "helpers.hpp"
#include "mpsu/okvs.hpp"
#include "mpsu/opprf.hpp"

using namespace mpsu;
using namespace mpsu::testing;

TEST_CASE("OPRF receiver learns F(k, x)") {
  for (auto g : {test_group(), production_group()}) {
    auto parties = memory_parties(3, 1);
    std::vector<Bytes> queries;
    Rng rng(2);
    for (int i = 0; i < 20; ++i) queries.push_back(rng.bytes(9));
    queries[5] = queries[3];
    OprfKeyBatch keys;
    RowVec out;
    run_all(parties, [&](Party& p) {
      if (p.id() == 0) keys = batch_oprf_send(p, 1, *g, queries.size());
      if (p.id() == 1) out = batch_oprf_recv(p, 0, *g, queries, 8);
    });
    REQUIRE(keys.keys.size() == queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) {
      auto want = oprf_eval(*g, keys.keys[i], queries[i], 8);
      CHECK(std::equal(want.begin(), want.end(), out[i].begin()));
    }
    // different keys per position
    CHECK_FALSE(std::equal(out[3].begin(), out[3].end(), out[5].begin()));
  }
}

TEST_CASE("OPPRF returns programmed values only on programmed points") {
  auto g = test_group();
  const std::size_t bins = 40, ob = 8;
  Rng rng(3);
  std::vector<ProgrammedPoint> points;
  std::vector<Bytes> queries(bins);
  std::vector<int> expect(bins, -1);
  for (std::size_t b = 0; b < bins; ++b) {
    for (int k = 0; k < 3; ++k) points.push_back({b, rng.bytes(6), rng.bytes(ob)});
    const auto pick = rng.uniform(4);
    if (pick < 3) {
      queries[b] = points[3 * b + pick].key;
      expect[b] = static_cast<int>(3 * b + pick);
    } else {
      queries[b] = rng.bytes(6);
    }
  }
  // a key programmed in another bin must not match here
  queries[0] = points[3].key;
  expect[0] = -1;

  auto parties = memory_parties(3, 4);
  RowVec out;
  run_all(parties, [&](Party& p) {
    if (p.id() == 2) batch_opprf_send(p, 0, *g, bins, points, ob);
    if (p.id() == 0) out = batch_opprf_recv(p, 2, *g, queries, ob);
  });
  for (std::size_t b = 0; b < bins; ++b) {
    const bool equal_to_programmed = expect[b] >= 0 && std::equal(points[expect[b]].value.begin(),
                                                                   points[expect[b]].value.end(), out[b].begin());
    CHECK(equal_to_programmed == (expect[b] >= 0));
    if (expect[b] < 0)
      for (std::size_t k = 3 * b; k < 3 * b + 3; ++k)
        CHECK_FALSE(std::equal(points[k].value.begin(), points[k].value.end(), out[b].begin()));
  }
}

TEST_CASE("opprf okvs keys separate bins") {
  const Bytes k{1, 2};
  CHECK(opprf_okvs_key(0, k) != opprf_okvs_key(1, k));
  CHECK(opprf_okvs_key(7, k).size() == 4 + k.size());
}
