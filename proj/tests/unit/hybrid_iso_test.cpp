#include <doctest.h>

#include "fixtures.hpp"
#include "torus_floer/floer_solver.hpp"
#include "torus_floer/hybrid_iso.hpp"

using namespace floer;

namespace {

GradedComplex complex_of(const std::vector<std::pair<int, double>>& gens, int degree) {
  GradedComplex c;
  for (const auto& [id, a] : gens) c.generators[degree].push_back({id, a});
  return c;
}

}  // namespace

TEST_CASE("hybrid counts that need no solve") {
  const auto& e = fixtures::eps_engine();
  CHECK(count_hybrid(e, 1, 1).count == 1);
  CHECK(count_hybrid(e, 1, 0).count == 0);
  CHECK(count_hybrid(e, 1, 2).count == 0);
  CHECK(count_hybrid(e, 2, 1).count == 0);
}

TEST_CASE("constant hybrid solutions are regular") {
  const auto& e = fixtures::eps_engine();
  for (int x = 0; x < 4; ++x) {
    const ConstantHybridReport r = constant_hybrid(e, x);
    CHECK(r.sigma_min > 1e-8);
    CHECK(r.sigma_max >= r.sigma_min);
    CHECK(r.solution.matching_defect < 1e-10);
    CHECK(r.solution.energy < 1e-12);
  }
}

TEST_CASE("Phi is the identity for the two-cosine Hamiltonian") {
  const auto& e = fixtures::eps_engine();
  const BoundaryResult m = morse_boundary(e);
  const BoundaryResult f = floer_boundary(e);
  const PhiResult p = build_phi(e, m.complex, f.complex);
  for (const auto& [k, mat] : p.phi) CHECK(mat == GF2Matrix::identity(m.complex.count(k)));
  const TriangularReport t = check_triangular(p.phi, m.complex, f.complex);
  CHECK(t.ok);
  CHECK(t.invertible);
  CHECK(verify_chain_map(p.phi, m.complex, f.complex).ok);
}

TEST_CASE("triangularity examples") {
  const GradedComplex c = complex_of({{0, -1.0}, {1, 0.0}, {2, 1.0}}, 0);
  std::map<int, GF2Matrix> upper{{0, GF2Matrix::from_rows({{1, 1, 0}, {0, 1, 1}, {0, 0, 1}})}};
  TriangularReport r = check_triangular(upper, c, c);
  CHECK(r.ok);
  CHECK(r.invertible);

  std::map<int, GF2Matrix> lower{{0, GF2Matrix::from_rows({{1, 0, 0}, {1, 1, 0}, {0, 0, 1}})}};
  r = check_triangular(lower, c, c);
  CHECK_FALSE(r.ok);
  CHECK(r.message.find("below the diagonal") != std::string::npos);

  std::map<int, GF2Matrix> hole{{0, GF2Matrix::from_rows({{1, 0, 0}, {0, 0, 0}, {0, 0, 1}})}};
  r = check_triangular(hole, c, c);
  CHECK_FALSE(r.ok);
  CHECK_FALSE(r.invertible);
}
