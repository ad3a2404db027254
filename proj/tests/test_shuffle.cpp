#include <algorithm>
#include <numeric>

#include "helpers.hpp"
#include "mpsu/shuffle.hpp"

using namespace mpsu;
using namespace mpsu::testing;

namespace {

RowVec labelled(std::size_t n, std::size_t w = 2) {
  RowVec v(n, w);
  for (std::size_t i = 0; i < n; ++i) {
    v[i][0] = static_cast<std::uint8_t>(i);
    v[i][1] = static_cast<std::uint8_t>(i >> 8);
  }
  return v;
}

}  // namespace

TEST_CASE("Waksman switch counts") {
  CHECK(waksman_switch_count(1) == 0);
  CHECK(waksman_switch_count(2) == 1);
  CHECK(waksman_switch_count(4) == 5);
  CHECK(waksman_switch_count(8) == 17);
  for (std::size_t n = 2; n <= 1024; n *= 2) {
    // n log2 n - n + 1
    CHECK(waksman_switch_count(n) == n * ceil_log2(n) - n + 1);
  }
}

TEST_CASE("Waksman routes every permutation of 2, 4 and 8 wires") {
  for (std::size_t n : {2, 4, 8}) {
    Permutation perm = identity_permutation(n);
    const RowVec in = labelled(n);
    std::size_t count = 0;
    do {
      auto bits = waksman_route(perm);
      REQUIRE(bits.size() == waksman_switch_count(n));
      CHECK(waksman_apply(in, bits) == in.permuted(perm));
      ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(count == (n == 2 ? 2 : n == 4 ? 24 : 40320));
  }
}

TEST_CASE("Waksman routes random large permutations") {
  Rng rng(3);
  for (std::size_t n : {16, 256, 2048}) {
    auto perm = random_permutation(n, rng);
    CHECK(waksman_apply(labelled(n), waksman_route(perm)) == labelled(n).permuted(perm));
  }
  CHECK(error_code([] { waksman_route({0, 1, 2}); }) == Errc::DimensionMismatch);
  CHECK(error_code([] { waksman_route({0, 0}); }) == Errc::InvalidConfig);
}

TEST_CASE("permutation composition") {
  const Permutation a{1, 2, 0}, b{2, 1, 0};
  const RowVec x = labelled(3);
  CHECK(x.permuted(b).permuted(a) == x.permuted(compose(a, b)));
  CHECK(is_permutation(a));
  CHECK_FALSE(is_permutation({0, 2}));
  CHECK(next_pow2(5) == 8);
  CHECK(next_pow2(8) == 8);
}

TEST_CASE("Permute+Share") {
  for (auto mode : kModes)
    for (std::size_t n : {1, 2, 5, 16, 33}) {
      CAPTURE(n);
      auto parties = memory_parties(3, n, with_mode(mode));
      Rng rng(n);
      const RowVec x = RowVec::random(n, 5, rng);
      const Permutation perm = random_permutation(n, rng);
      RowVec a, b;
      run_all(parties, [&](Party& p) {
        if (p.id() == 2) a = permute_share_permuter(p, 0, perm, 5);
        if (p.id() == 0) b = permute_share_holder(p, 2, x);
      });
      CHECK((a ^ b) == x.permuted(perm));
      if (n > 2) CHECK(b != x.permuted(perm));
    }
}

TEST_CASE("multi-party shuffle applies the composed permutation") {
  for (auto mode : kModes)
    for (std::size_t m : {3, 4}) {
      auto hooks = std::make_shared<TestHooks>();
      std::vector<Permutation> perms(m);
      hooks->shuffle_permutation = [&](PartyId k, const std::vector<std::size_t>& p) { perms[k] = p; };
      PartyOptions opts = with_mode(mode);
      opts.hooks = hooks;
      auto parties = memory_parties(m, 10 + m, opts);
      const std::size_t n = 13;
      Rng rng(m);
      const RowVec secret = labelled(n, 3);
      std::vector<RowVec> shares(m), out(m);
      RowVec acc = secret;
      for (std::size_t i = 1; i < m; ++i) {
        shares[i] = RowVec::random(n, 3, rng);
        acc ^= shares[i];
      }
      shares[0] = acc;
      run_all(parties, [&](Party& p) { out[p.id()] = ms_shuffle(p, shares[p.id()]); });
      RowVec sum(n, 3);
      for (auto& o : out) sum ^= o;
      RowVec want = secret;
      for (std::size_t k = 0; k < m; ++k) want = want.permuted(perms[k]);
      CHECK(sum == want);
      Permutation total = identity_permutation(n);
      for (std::size_t k = 0; k < m; ++k) total = compose(perms[k], total);
      CHECK(secret.permuted(total) == want);
    }
}
