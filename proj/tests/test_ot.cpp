#include "helpers.hpp"
#include "mpsu/ot.hpp"

using namespace mpsu;
using namespace mpsu::testing;

namespace {

void check_rot(const RotSender& s, const RotReceiver& r) {
  REQUIRE(s.size() == r.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto want = r.choice[i] ? s.r1[i] : s.r0[i];
    const auto other = r.choice[i] ? s.r0[i] : s.r1[i];
    CHECK(std::equal(want.begin(), want.end(), r.rb[i].begin()));
    if (s.r0.width() >= 8) CHECK_FALSE(std::equal(other.begin(), other.end(), r.rb[i].begin()));
  }
}

}  // namespace

TEST_CASE("random OT correlations") {
  for (auto mode : kModes)
    for (std::size_t count : {std::size_t{1}, std::size_t{37}, kIknpThreshold + 3})
      for (std::size_t width : {1, 16, 40}) {
        CAPTURE(resource_mode_name(mode));
        CAPTURE(count);
        auto parties = memory_parties(3, count * 100 + width, with_mode(mode));
        RotSender s;
        RotReceiver r;
        run_all(parties, [&](Party& p) {
          if (p.id() == 2) s = rot_send(p, 0, count, width);
          if (p.id() == 0) r = rot_recv(p, 2, count, width);
        });
        check_rot(s, r);
        if (width >= 16) {
          // choice bits are balanced-ish
          std::size_t ones = 0;
          for (auto b : r.choice) ones += b;
          if (count > 100) CHECK(ones > count / 4);
        }
      }
}

TEST_CASE("derandomized OT delivers the chosen message") {
  for (auto mode : kModes) {
    auto parties = memory_parties(3, 11, with_mode(mode));
    const std::size_t count = 64;
    BitVec chosen(count);
    Rng rng(4);
    for (auto& b : chosen) b = rng.bit();
    RotSender s;
    RotReceiver r;
    run_all(parties, [&](Party& p) {
      if (p.id() == 1) {
        s = rot_send(p, 0, count, 8);
        derand_send(p, 0, s);
      }
      if (p.id() == 0) {
        r = rot_recv(p, 1, count, 8);
        derand_recv(p, 1, r, chosen);
      }
    });
    CHECK(r.choice == chosen);
    check_rot(s, r);
    CHECK(error_code([&] { derand_message(r, chosen); }) == Errc::ReusedCorrelation);
    CHECK(error_code([&] { apply_derand(s, chosen); }) == Errc::ReusedCorrelation);
  }
}

TEST_CASE("dealer and interactive parties do not mix") {
  auto mesh = make_memory_mesh(3);
  PartyOptions dealer, inter;
  inter.resources = ResourceMode::Interactive;
  PartyList parties;
  for (PartyId i = 0; i < 3; ++i)
    parties.push_back(std::make_unique<Party>(i, std::move(mesh[i]), Rng::Seed{static_cast<std::uint8_t>(i)},
                                              i == 0 ? inter : dealer));
  auto errors = run_parties(parties, [](Party& p) {
    if (p.id() == 0) rot_recv(p, 1, 10, 4);
    if (p.id() == 1) rot_send(p, 0, 10, 4);
  });
  CHECK(error_code([&] { rethrow_root_cause(errors); }) == Errc::ModeMismatch);
}

TEST_CASE("mismatched OT dimensions are detected") {
  auto parties = memory_parties(3, 5);
  auto errors = run_parties(parties, [](Party& p) {
    if (p.id() == 0) rot_recv(p, 1, 10, 4);
    if (p.id() == 1) rot_send(p, 0, 11, 4);
  });
  CHECK(error_code([&] { rethrow_root_cause(errors); }) == Errc::DimensionMismatch);
}

TEST_CASE("Beaver triples") {
  for (auto mode : kModes) {
    auto parties = memory_parties(3, 21, with_mode(mode));
    TripleShares t0, t2;
    run_all(parties, [&](Party& p) {
      if (p.id() == 0) t0 = triple_gen(p, 2, 300);
      if (p.id() == 2) t2 = triple_gen(p, 0, 300);
    });
    REQUIRE(t0.size() == 300);
    REQUIRE(t2.size() == 300);
    std::size_t a_ones = 0;
    for (std::size_t i = 0; i < 300; ++i) {
      const int a = t0.a()[i] ^ t2.a()[i], b = t0.b()[i] ^ t2.b()[i], c = t0.c()[i] ^ t2.c()[i];
      CHECK(c == (a & b));
      a_ones += a;
    }
    CHECK(a_ones > 75);
    CHECK(a_ones < 225);
    CHECK(t0.take(200) == 0);
    CHECK(t0.take(100) == 200);
    CHECK(t0.remaining() == 0);
    CHECK(error_code([&] { t0.take(1); }) == Errc::TriplesExhausted);
  }
}
