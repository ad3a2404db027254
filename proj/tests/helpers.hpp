#pragma once

#include <functional>

#include <doctest.h>

#include "mpsu/runtime.hpp"

namespace mpsu::testing {

inline PartyList memory_parties(std::size_t m, std::uint64_t seed, PartyOptions opts = {}) {
  Rng r(seed);
  std::vector<Rng::Seed> seeds(m);
  for (auto& s : seeds) r.fill(s);
  r.fill(opts.dealer_seed);
  return make_memory_parties(m, seeds, opts);
}

inline PartyOptions with_mode(ResourceMode mode) {
  PartyOptions o;
  o.resources = mode;
  return o;
}

inline void run_all(PartyList& parties, const std::function<void(Party&)>& fn) {
  rethrow_root_cause(run_parties(parties, fn));
}

template <class F>
Errc error_code(F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mpsu::Error");
  return Errc::InvalidConfig;
}

inline constexpr ResourceMode kModes[] = {ResourceMode::Dealer, ResourceMode::Interactive};

}  // namespace mpsu::testing
