#include "mpsu/runtime.hpp"

#include <deque>
#include <set>
#include <thread>

namespace mpsu {

const char* resource_mode_name(ResourceMode mode) {
  return mode == ResourceMode::Dealer ? "dealer" : "interactive";
}

ResourceMode parse_resource_mode(std::string_view s) {
  if (s == "dealer") return ResourceMode::Dealer;
  if (s == "interactive") return ResourceMode::Interactive;
  fail(Errc::InvalidConfig, "unknown resource mode " + std::string(s));
}

std::uint64_t PartyStats::sent_bytes() const {
  std::uint64_t t = 0;
  for (const auto& [_, s] : phases) t += s.sent_bytes;
  return t;
}

std::uint64_t PartyStats::recv_bytes() const {
  std::uint64_t t = 0;
  for (const auto& [_, s] : phases) t += s.recv_bytes;
  return t;
}

std::uint64_t PartyStats::rounds() const {
  std::uint64_t t = 0;
  for (const auto& [_, s] : phases) t += s.rounds;
  return t;
}

Party::Party(PartyId id, ChannelSet links, const Rng::Seed& seed, PartyOptions options)
    : id_(id), links_(std::move(links)), rng_(seed), options_(std::move(options)) {
  if (id_ >= links_.size()) fail(Errc::InvalidConfig, "party id out of range");
  crypto_generichash_init(&transcript_, nullptr, 0, 32);
}

Party::~Party() = default;

void Party::absorb(std::uint8_t dir, PartyId peer, Tag tag, ByteSpan payload) {
  Writer w;
  w.u8(dir).u32(static_cast<std::uint32_t>(peer)).u8(static_cast<std::uint8_t>(tag)).u32(
      static_cast<std::uint32_t>(payload.size()));
  auto head = w.take();
  crypto_generichash_update(&transcript_, head.data(), head.size());
  crypto_generichash_update(&transcript_, payload.data(), payload.size());
}

void Party::send(PartyId peer, Tag tag, Bytes payload) {
  if (peer >= links_.size() || peer == id_ || !links_[peer]) fail(Errc::InvalidConfig, "bad peer id");
  const std::uint64_t size = kFrameHeaderBytes + payload.size();
  auto& ph = stats_.phases[phase_];
  if (last_was_recv_) {
    ++ph.rounds;
    last_was_recv_ = false;
  }
  ph.sent_bytes += size;
  stats_.per_peer[{phase_, peer}].sent_bytes += size;
  events_.push_back({true, peer, phase_});
  absorb(0, peer, tag, payload);
  links_[peer]->send(Frame{tag, std::move(payload)});
}

Bytes Party::recv(PartyId peer, Tag tag) {
  if (peer >= links_.size() || peer == id_ || !links_[peer]) fail(Errc::InvalidConfig, "bad peer id");
  Frame f = links_[peer]->recv(options_.timeout);
  if (f.tag != tag)
    fail(Errc::MalformedMessage,
         std::string("expected ") + tag_name(tag) + " from party " + std::to_string(peer) + ", got " +
             tag_name(f.tag));
  const std::uint64_t size = f.wire_size();
  stats_.phases[phase_].recv_bytes += size;
  stats_.per_peer[{phase_, peer}].recv_bytes += size;
  last_was_recv_ = true;
  events_.push_back({false, peer, phase_});
  absorb(1, peer, tag, f.payload);
  return std::move(f.payload);
}

void Party::restore_phase(std::string phase) {
  if (phase != phase_) last_was_recv_ = true;
  phase_ = std::move(phase);
}

void Party::set_phase(std::string phase) {
  restore_phase(std::move(phase));
  stats_.phases[phase_];
#ifdef MPSU_TEST_HOOKS
  if (auto* h = hooks(); h && h->crash_party == id_ && h->crash_phase == phase_) {
    close_all();
    fail(Errc::PeerCrash, "injected crash of party " + std::to_string(id_) + " in " + phase_);
  }
#endif
}

Bytes Party::transcript_digest() const {
  auto copy = transcript_;
  Bytes out(32);
  crypto_generichash_final(&copy, out.data(), out.size());
  return out;
}

Rng Party::dealer_stream(std::string_view kind, PartyId a, PartyId b) {
  const std::uint64_t ctr = dealer_counters_[{std::string(kind), a, b}]++;
  return Rng::from_parts({as_bytes("mpsu.dealer"), options_.dealer_seed, as_bytes(kind), u64_le(a),
                          u64_le(b), u64_le(ctr)});
}

void Party::close_all() {
  for (auto& l : links_)
    if (l) l->close();
}

PartyList make_memory_parties(std::size_t m, const std::vector<Rng::Seed>& seeds, const PartyOptions& options) {
  if (seeds.size() != m) fail(Errc::InvalidConfig, "one seed per party required");
  auto mesh = make_memory_mesh(m);
  PartyList parties;
  for (std::size_t i = 0; i < m; ++i)
    parties.push_back(std::make_unique<Party>(i, std::move(mesh[i]), seeds[i], options));
  return parties;
}

std::vector<std::exception_ptr> run_parties(PartyList& parties, const std::function<void(Party&)>& fn) {
  std::vector<std::exception_ptr> errors(parties.size());
  std::vector<std::thread> threads;
  threads.reserve(parties.size());
  for (std::size_t i = 0; i < parties.size(); ++i)
    threads.emplace_back([&, i] {
      try {
        fn(*parties[i]);
      } catch (...) {
        errors[i] = std::current_exception();
        parties[i]->close_all();
      }
    });
  for (auto& t : threads) t.join();
  return errors;
}

std::map<std::string, std::uint64_t> critical_path_rounds(const PartyList& parties) {
  const std::size_t m = parties.size();
  std::vector<std::size_t> pos(m, 0);
  std::vector<std::uint64_t> clock(m, 0);
  std::map<std::pair<PartyId, PartyId>, std::deque<std::uint64_t>> inflight;
  std::map<std::string, std::set<std::uint64_t>> stamps;
  std::uint64_t top = 0;
  for (bool progress = true; progress;) {
    progress = false;
    for (PartyId i = 0; i < m; ++i) {
      const auto& ev = parties[i]->events();
      while (pos[i] < ev.size()) {
        const auto& e = ev[pos[i]];
        if (e.sent) {
          const std::uint64_t s = clock[i] + 1;
          inflight[{i, e.peer}].push_back(s);
          stamps[e.phase].insert(s);
          top = std::max(top, s);
        } else {
          auto& q = inflight[{e.peer, i}];
          if (q.empty()) break;
          clock[i] = std::max(clock[i], q.front());
          q.pop_front();
        }
        ++pos[i];
        progress = true;
      }
    }
  }
  for (PartyId i = 0; i < m; ++i)
    if (pos[i] != parties[i]->events().size()) fail(Errc::InvalidConfig, "message logs do not match up");
  std::map<std::string, std::uint64_t> out;
  for (const auto& [phase, set] : stamps) out[phase] = set.size();
  out["total"] = top;
  return out;
}

void rethrow_root_cause(const std::vector<std::exception_ptr>& errors) {
  std::exception_ptr first;
  for (const auto& e : errors) {
    if (!e) continue;
    if (!first) first = e;
    try {
      std::rethrow_exception(e);
    } catch (const Error& err) {
      if (err.code() != Errc::PeerCrash) std::rethrow_exception(e);
    } catch (...) {
      std::rethrow_exception(e);
    }
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace mpsu
