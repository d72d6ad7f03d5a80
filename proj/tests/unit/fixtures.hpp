#pragma once

#include "torus_floer/action_gradient.hpp"
#include "torus_floer/connections.hpp"

namespace fixtures {

inline floer::TrigHamiltonian h_eps() {
  return floer::TrigHamiltonian(1, {{0.01, {1, 0}}, {0.01, {0, 1}}});
}

// Engine over the orbits of h with relative indices filled in. Built once per h.
inline floer::ConnectionEngine make_engine(const floer::TrigHamiltonian& h, int N = 4, int intervals = 128,
                                           int multistart = 4) {
  auto orbits = floer::find_orbits(h);
  for (auto& o : orbits) o.rel_index = floer::relative_index(h, o, {h.n(), N});
  floer::EngineOptions opts;
  opts.intervals = intervals;
  opts.multistart = multistart;
  return floer::ConnectionEngine(h, {h.n(), N}, orbits, opts);
}

inline const floer::ConnectionEngine& eps_engine() {
  static const floer::ConnectionEngine e = make_engine(h_eps());
  return e;
}

}  // namespace fixtures
