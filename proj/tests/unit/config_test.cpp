#include <doctest.h>

#include "torus_floer/errors.hpp"
#include "torus_floer/pipeline.hpp"

using namespace floer;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Undecided;
}

}  // namespace

TEST_CASE("config grammar") {
  const RunConfig c = parse_config(
      "# two cosines\n"
      "name = demo\n"
      "n = 1   # half dimension\n"
      "N = 6\n"
      "seed = 18446744073709551615\n"
      "perturbation = 0.002\n"
      "term = a=0.01 m=1,0\n"
      "term = a=0.002 m=1,1 phi=0.7 l=2 psi=0.3\n");
  CHECK(c.name == "demo");
  CHECK(c.N == 6);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.perturbation == "on");
  CHECK(c.perturbation_magnitude == doctest::Approx(0.002));
  REQUIRE(c.terms.size() == 2);
  CHECK(c.terms[1].l == 2);
  CHECK(c.terms[1].psi == doctest::Approx(0.3));
  CHECK_FALSE(c.hamiltonian().autonomous());
  CHECK(c.engine_options().intervals == c.M_s);
}

TEST_CASE("config errors") {
  CHECK(kind_of("colour = blue\n") == ErrorKind::Config);
  CHECK(kind_of("N = 4\nN = 5\n") == ErrorKind::Config);
  CHECK(kind_of("N = four\n") == ErrorKind::Config);
  CHECK(kind_of("tol_floer = -1\n") == ErrorKind::Config);
  CHECK(kind_of("term = a=0.1 m=1,0,0\n") == ErrorKind::Config);
  CHECK(kind_of("term = a=0.1\n") == ErrorKind::Config);
  CHECK(kind_of("term = a=0.1 m=1,0 q=2\n") == ErrorKind::Config);
  CHECK(kind_of("seed = -3\n") == ErrorKind::Config);
  CHECK(kind_of("just text\n") == ErrorKind::Config);
  CHECK(kind_of("M_s = 8\n") == ErrorKind::Config);
  CHECK(exit_code_for(ErrorKind::Config) == 4);
  CHECK(exit_code_for(ErrorKind::Structural) == 2);
  CHECK(exit_code_for(ErrorKind::Truncation) == 3);
  CHECK(exit_code_for(ErrorKind::Degenerate) == 3);
}

TEST_CASE("error messages carry the line") {
  try {
    parse_config("n = 1\n\nbogus = 1\n");
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(e.module() == "cli");
  }
}

TEST_CASE("shipped configs load") {
  for (const char* f : {"h_eps.cfg", "h_eps_t.cfg", "two_max.cfg", "h_zero.cfg", "h_eps_t_N1.cfg"})
    CHECK_NOTHROW(load_config(std::string(TF_CONFIG_DIR) + "/" + f));
  CHECK_THROWS_AS(load_config("/nonexistent/x.cfg"), Error);
}

TEST_CASE("torus Betti numbers") {
  CHECK(torus_betti(1, 0) == 1);
  CHECK(torus_betti(1, 1) == 2);
  CHECK(torus_betti(2, 2) == 6);
  CHECK(torus_betti(2, 4) == 1);
}
