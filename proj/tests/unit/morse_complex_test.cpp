#include <doctest.h>

#include "fixtures.hpp"
#include "torus_floer/morse_complex.hpp"

using namespace floer;

TEST_CASE("critical points of the truncated action") {
  const auto& e = fixtures::eps_engine();
  REQUIRE(e.critical().size() == 4);
  CHECK(e.factorized());
  const int mu[] = {1, 0, 0, -1};
  for (int i = 0; i < 4; ++i) {
    CHECK(e.critical()[i].mu == mu[i]);
    CHECK(e.critical()[i].m == mu[i]);
    CHECK(e.context()->gradient(e.critical()[i].modes).norm() < 1e-10);
  }
  CHECK(constant_unstable_dim(*e.context(), e.critical()[0].modes, 1e-8) == 2);
  CHECK(constant_unstable_dim(*e.context(), e.critical()[1].modes, 1e-8) == 1);
}

TEST_CASE("every index-one pair is joined by exactly two gradient lines") {
  // The maximum reaches each saddle along the two arcs of a coordinate circle,
  // and each saddle reaches the minimum the same way.
  const auto& e = fixtures::eps_engine();
  const LaunchCensus& top = e.census(0);
  CHECK(top.d_u == 2);
  CHECK(top.count_to(1) == 2);
  CHECK(top.count_to(2) == 2);
  CHECK(top.count_to(3) == 0);
  for (int s : {1, 2}) {
    const LaunchCensus& c = e.census(s);
    CHECK(c.d_u == 1);
    CHECK(c.count_to(3) == 2);
  }
  for (const auto& w : top.witnesses) {
    CHECK(w.trajectory.converged);
    const auto a = w.trajectory.actions(*e.context());
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i] <= a[i - 1] + 1e-12);
  }
}

TEST_CASE("Morse boundary vanishes mod 2") {
  const auto& e = fixtures::eps_engine();
  const BoundaryResult b = morse_boundary(e);
  CHECK(b.complex.count(1) == 1);
  CHECK(b.complex.count(0) == 2);
  CHECK(b.complex.count(-1) == 1);
  for (const auto& [k, m] : b.complex.boundary) CHECK(m.is_zero());
  CHECK(b.counts.at({0, 1}).count == 2);
  CHECK(b.counts.at({2, 3}).count == 2);
  CHECK(verify_complex(b.complex).ok);
}

TEST_CASE("empty complex orders generators by action") {
  std::vector<CriticalPoint> crit(3);
  crit[0] = {0, Vec(), 0.5, 0, 0};
  crit[1] = {1, Vec(), -0.5, 0, 0};
  crit[2] = {2, Vec(), 0.1, 1, 1};
  const GradedComplex c = empty_complex(crit, true);
  REQUIRE(c.count(0) == 2);
  CHECK(c.generators.at(0)[0].id == 1);
  CHECK(c.generators.at(0)[1].id == 0);
}

TEST_CASE("factorization test") {
  const TrigHamiltonian h = fixtures::h_eps();
  CHECK(factorizes(h, find_orbits(h)));
  const TrigHamiltonian ht(1, {{0.01, {1, 0}}, {0.01, {0, 1}}, {0.002, {1, 1}, 0.7, 2, 0.3}});
  CHECK_FALSE(factorizes(ht, find_orbits(ht)));
}
