#include <set>

#include "helpers.hpp"
#include "mpsu/group.hpp"

using namespace mpsu;
using namespace mpsu::testing;

namespace {

void group_laws(const Group& g, std::uint64_t seed, int trials) {
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) {
    const Scalar a = g.random_scalar(rng), b = g.random_scalar(rng);
    const GroupElement ga = g.exp_base(a), gb = g.exp_base(b);
    CHECK(g.mul(ga, gb) == g.exp_base(g.scalar_add(a, b)));
    CHECK(g.exp(ga, b) == g.exp(gb, a));
    CHECK(g.div(g.mul(ga, gb), gb) == ga);
    CHECK(g.mul(ga, g.exp_base(g.scalar_neg(a))) == g.identity());
    if (!g.scalar_is_zero(a)) CHECK(g.exp(ga, g.scalar_inv(a)) == g.generator());
    CHECK(g.decode(g.encode(ga)) == ga);
  }
  CHECK(g.mul(g.generator(), g.identity()) == g.generator());
  CHECK(g.exp_base(g.scalar_from_u64(0)) == g.identity());
  const Bytes x{1, 2, 3};
  CHECK(g.hash_to_group(x) == g.hash_to_group(x));
  CHECK(g.hash_to_group(x) != g.hash_to_group(Bytes{1, 2, 4}));
  CHECK_FALSE(g.is_identity(g.hash_to_group(x)));
  CHECK_FALSE(g.scalar_is_zero(g.random_nonzero_scalar(rng)));
}

}  // namespace

TEST_CASE("test group") { group_laws(*test_group(), 1, 200); }
TEST_CASE("tiny group") { group_laws(*tiny_test_group(), 2, 200); }
TEST_CASE("production group") { group_laws(*production_group(), 3, 20); }

TEST_CASE("tiny group generator has order q") {
  auto g = std::dynamic_pointer_cast<const SafePrimeGroup>(tiny_test_group());
  REQUIRE(g);
  CHECK(g->p() == 2 * g->q() + 1);
  CHECK(g->exp_base(g->scalar_from_u64(g->q())) == g->identity());
  // every element of the subgroup is reached exactly once
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < g->q(); ++k) seen.insert(g->value(g->exp_base(g->scalar_from_u64(k))));
  CHECK(seen.size() == g->q());
}

TEST_CASE("decode rejects malformed encodings") {
  auto g = std::dynamic_pointer_cast<const SafePrimeGroup>(test_group());
  // p - 1 is not a quadratic residue for a safe prime with q odd
  CHECK(error_code([&] { g->decode(u64_le(g->p() - 1)); }) == Errc::MalformedMessage);
  CHECK(error_code([&] { g->decode(u64_le(g->p() + 5)); }) == Errc::MalformedMessage);
  CHECK(error_code([&] { g->decode(u64_le(0)); }) == Errc::MalformedMessage);
  CHECK(error_code([&] { g->decode(Bytes(7)); }) == Errc::MalformedMessage);
  auto pg = production_group();
  Bytes bad(32, 0xff);
  CHECK(error_code([&] { pg->decode(bad); }) == Errc::MalformedMessage);
}

TEST_CASE("group_by_name") {
  CHECK(group_by_name("test")->name() == test_group()->name());
  CHECK(group_by_name("production")->element_size() == 32);
  CHECK(error_code([] { group_by_name("nope"); }) == Errc::InvalidConfig);
}
