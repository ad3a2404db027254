#include <thread>

#include "helpers.hpp"
#include "mpsu/transport.hpp"

using namespace mpsu;
using namespace mpsu::testing;
using namespace std::chrono_literals;

TEST_CASE("frame round trip for every tag") {
  Rng rng(1);
  for (std::uint8_t t = 1; t <= kMaxTag; ++t) {
    Frame f{static_cast<Tag>(t), rng.bytes(t * 3)};
    auto wire = encode_frame(f);
    CHECK(wire.size() == f.wire_size());
    CHECK(wire[0] == t);
    CHECK(load_u64_le(Bytes{wire[1], wire[2], wire[3], wire[4], 0, 0, 0, 0}) == f.payload.size());
    CHECK(decode_frame(wire) == f);
    CHECK(std::string(tag_name(f.tag)) != "?");
  }
}

TEST_CASE("malformed frames are rejected") {
  auto wire = encode_frame({Tag::Hello, Bytes{1, 2, 3}});
  auto bad_tag = wire;
  bad_tag[0] = 0;
  CHECK(error_code([&] { decode_frame(bad_tag); }) == Errc::MalformedMessage);
  bad_tag[0] = kMaxTag + 1;
  CHECK(error_code([&] { decode_frame(bad_tag); }) == Errc::MalformedMessage);
  auto short_frame = wire;
  short_frame.pop_back();
  CHECK(error_code([&] { decode_frame(short_frame); }) == Errc::MalformedMessage);
  auto long_frame = wire;
  long_frame.push_back(0);
  CHECK(error_code([&] { decode_frame(long_frame); }) == Errc::MalformedMessage);
  CHECK(error_code([&] { decode_frame(Bytes{1, 0}); }) == Errc::MalformedMessage);
}

TEST_CASE("fuzzed frames never crash") {
  Rng rng(2);
  int accepted = 0;
  for (int i = 0; i < 20000; ++i) {
    Bytes b = rng.bytes(rng.uniform(12));
    if (!b.empty() && rng.bit()) b[0] = static_cast<std::uint8_t>(1 + rng.uniform(kMaxTag));
    if (b.size() >= 5 && rng.bit()) {
      const auto len = static_cast<std::uint32_t>(b.size() - 5);
      auto le = u32_le(len);
      std::copy(le.begin(), le.end(), b.begin() + 1);
    }
    try {
      auto f = decode_frame(b);
      CHECK(encode_frame(f) == b);
      ++accepted;
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MalformedMessage);
    }
  }
  CHECK(accepted > 0);
}

namespace {

void check_ordered_delivery(std::vector<ChannelSet>& mesh) {
  const std::size_t m = mesh.size();
  const int per_pair = 200;
  std::vector<std::thread> threads;
  std::vector<int> ok(m, 1);
  for (std::size_t i = 0; i < m; ++i)
    threads.emplace_back([&, i] {
      for (int k = 0; k < per_pair; ++k)
        for (std::size_t j = 0; j < m; ++j)
          if (j != i) mesh[i][j]->send({Tag::AppData, u32_le(static_cast<std::uint32_t>(k * 16 + i))});
      for (std::size_t j = 0; j < m; ++j)
        if (j != i)
          for (int k = 0; k < per_pair; ++k) {
            auto f = mesh[i][j]->recv(5000ms);
            if (f.payload != u32_le(static_cast<std::uint32_t>(k * 16 + j))) ok[i] = 0;
          }
    });
  for (auto& t : threads) t.join();
  for (auto v : ok) CHECK(v == 1);
}

}  // namespace

TEST_CASE("memory mesh delivers in order") {
  auto mesh = make_memory_mesh(4);
  check_ordered_delivery(mesh);
}

TEST_CASE("tcp mesh delivers in order") {
  const std::size_t m = 3;
  std::vector<std::unique_ptr<TcpListener>> listeners;
  std::vector<PeerAddress> addrs(m);
  for (std::size_t i = 0; i < m; ++i) {
    listeners.push_back(std::make_unique<TcpListener>(0));
    addrs[i].port = listeners[i]->port();
    CHECK(addrs[i].port != 0);
  }
  std::vector<ChannelSet> mesh(m);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < m; ++i)
    threads.emplace_back([&, i] { mesh[i] = tcp_connect_mesh(i, addrs, *listeners[i], 5000ms); });
  for (auto& t : threads) t.join();
  check_ordered_delivery(mesh);

  // large frames survive partial reads
  Rng rng(3);
  Frame big{Tag::OkvsTable, rng.bytes(3 << 20)};
  mesh[0][2]->send(big);
  CHECK(mesh[2][0]->recv(5000ms) == big);

  mesh[1][0]->close();
  CHECK(error_code([&] { mesh[0][1]->recv(5000ms); }) == Errc::PeerCrash);
}

TEST_CASE("memory channel timeout and close") {
  auto mesh = make_memory_mesh(3);
  CHECK(error_code([&] { mesh[0][1]->recv(20ms); }) == Errc::Timeout);
  mesh[1][0]->send({Tag::AppData, {7}});
  mesh[1][0]->close();
  // queued frames are still delivered before the close is observed
  CHECK(mesh[0][1]->recv(100ms).payload == Bytes{7});
  CHECK(error_code([&] { mesh[0][1]->recv(100ms); }) == Errc::PeerCrash);
}

TEST_CASE("party meters bytes per phase and peer") {
  auto parties = memory_parties(3, 1);
  run_all(parties, [](Party& p) {
    if (p.id() == 0) {
      p.set_phase("a");
      p.send(1, Tag::AppData, Bytes(10));
      p.send(2, Tag::AppData, Bytes(20));
      p.set_phase("b");
      p.send(1, Tag::AppData, Bytes(0));
      CHECK(p.recv(1, Tag::AppData).size() == 3);
      p.send(1, Tag::AppData, Bytes(1));
    } else if (p.id() == 1) {
      p.set_phase("a");
      p.recv(0, Tag::AppData);
      p.set_phase("b");
      p.recv(0, Tag::AppData);
      p.send(0, Tag::AppData, Bytes(3));
      p.recv(0, Tag::AppData);
    } else {
      p.set_phase("a");
      p.recv(0, Tag::AppData);
    }
  });
  const auto& s0 = parties[0]->stats();
  CHECK(s0.phases.at("a").sent_bytes == 15 + 25);
  CHECK(s0.phases.at("a").rounds == 1);
  CHECK(s0.phases.at("b").sent_bytes == 5 + 6);
  CHECK(s0.phases.at("b").recv_bytes == 8);
  CHECK(s0.phases.at("b").rounds == 2);
  CHECK(s0.per_peer.at({"a", 2}).sent_bytes == 25);
  CHECK(s0.sent_bytes() == 51);
  const auto& s1 = parties[1]->stats();
  CHECK(s1.recv_bytes() == 15 + 5 + 6);
  CHECK(s1.sent_bytes() == 8);
  CHECK(s0.sent_bytes() + s1.sent_bytes() + parties[2]->stats().sent_bytes() ==
        s0.recv_bytes() + s1.recv_bytes() + parties[2]->stats().recv_bytes());
}

TEST_CASE("unexpected tag is a malformed message") {
  auto parties = memory_parties(3, 2);
  auto errors = run_parties(parties, [](Party& p) {
    if (p.id() == 0) p.send(1, Tag::Hello, {});
    if (p.id() == 1) p.recv(0, Tag::OkvsTable);
  });
  REQUIRE(errors[1]);
  CHECK(error_code([&] { std::rethrow_exception(errors[1]); }) == Errc::MalformedMessage);
}

TEST_CASE("a failing party makes its peers fail fast") {
  auto parties = memory_parties(3, 3);
  auto errors = run_parties(parties, [](Party& p) {
    if (p.id() == 2) fail(Errc::InvalidConfig, "boom");
    p.recv(2, Tag::AppData);
  });
  CHECK(error_code([&] { std::rethrow_exception(errors[0]); }) == Errc::PeerCrash);
  CHECK(error_code([&] { std::rethrow_exception(errors[1]); }) == Errc::PeerCrash);
  CHECK(error_code([&] { rethrow_root_cause(errors); }) == Errc::InvalidConfig);
}

TEST_CASE("transcripts are deterministic") {
  auto run = [](std::uint64_t seed) {
    auto parties = memory_parties(3, seed);
    run_all(parties, [](Party& p) {
      const PartyId next = (p.id() + 1) % 3, prev = (p.id() + 2) % 3;
      p.send(next, Tag::AppData, p.rng().bytes(16));
      p.recv(prev, Tag::AppData);
    });
    return parties[0]->transcript_digest();
  };
  CHECK(run(5) == run(5));
  CHECK(run(5) != run(6));
}
