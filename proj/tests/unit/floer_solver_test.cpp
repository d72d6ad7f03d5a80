#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "torus_floer/errors.hpp"
#include "torus_floer/floer_solver.hpp"

using namespace floer;

TEST_CASE("fourth-order differences are exact on quartics") {
  const int m = 11;
  const double h = 0.3;
  Mat u(2, m);
  for (int i = 0; i < m; ++i) {
    const double s = -1.0 + i * h;
    u(0, i) = 2 * s * s * s * s - s * s + 3;
    u(1, i) = s * s * s;
  }
  const Mat d = ds_fd4(u, h);
  for (int i = 0; i < m; ++i) {
    const double s = -1.0 + i * h;
    CHECK(d(0, i) == doctest::Approx(8 * s * s * s - 2 * s).epsilon(1e-10));
    CHECK(d(1, i) == doctest::Approx(3 * s * s).epsilon(1e-10));
  }
}

TEST_CASE("Gregory weights integrate cubics exactly") {
  for (int pts : {8, 13, 40}) {
    const double h = 2.0 / (pts - 1);
    const Vec w = gregory_weights(pts, h);
    double acc = 0.0, ones = 0.0;
    for (int i = 0; i < pts; ++i) {
      const double s = -1.0 + i * h;
      acc += w[i] * (s * s * s + 3 * s * s - s + 1);
      ones += w[i];
    }
    CHECK(acc == doctest::Approx(4.0).epsilon(1e-13));
    CHECK(ones == doctest::Approx(2.0).epsilon(1e-14));
  }
  const Vec w = gregory_weights(10, 1.0);
  CHECK(w[0] == doctest::Approx(3.0 / 8));
  CHECK(w[2] == doctest::Approx(23.0 / 24));
}

TEST_CASE("Floer residual of a constant orbit and of a spurious mode") {
  const auto& e = fixtures::eps_engine();
  const auto& ctx = *e.context();
  const GalerkinSpace sp = e.space();
  CylinderGrid u{sp, -1.0, 1.0, Mat(sp.dim_total(), 21), -1, -1};
  for (int i = 0; i < 21; ++i) u.values.col(i) = e.critical()[0].modes;
  CHECK(floer_residual(ctx, u).norm() < 1e-12);
  CHECK(energy(ctx, u) < 1e-24);

  // A t-mode k of amplitude eps, constant in s, leaves |J0 d_t u| = 2 pi k eps.
  const double amp = 1e-6;
  const int k = 2;
  for (int i = 0; i < 21; ++i) u.values(sp.offset(k), i) += amp;
  const Mat r = floer_residual(ctx, u);
  CHECK(r.col(10).norm() == doctest::Approx(kTwoPi * k * amp).epsilon(1e-2));
}

TEST_CASE("Fredholm model operators") {
  const GalerkinSpace sp{1, 3};
  struct Case {
    double a, b;
    int ker, coker;
  };
  for (const Case c : {Case{kPi, kPi, 0, 0}, Case{kPi, 3 * kPi, 2, 0}, Case{5 * kPi, kPi, 0, 4}}) {
    const FredholmReport r = fredholm_diag(c.a, c.b, sp, 3.0, 48);
    CHECK(r.dim_ker == c.ker);
    CHECK(r.dim_coker == c.coker);
    CHECK(r.index == r.predicted_index);
  }
  CHECK_THROWS_AS(fredholm_diag(kTwoPi, kPi, sp, 3.0, 48), Error);
}

TEST_CASE("integration by parts and trace norms on a pure mode") {
  // u_k(s) = exp(-r s) on [0, S]: |u(0)|^2_{1/2} = 2 pi |k|.
  const GalerkinSpace sp{1, 2};
  CylinderGrid u{sp, 0.0, 12.0, Mat::Zero(sp.dim_total(), 1201), -1, -1};
  const double r = 1.5;
  for (int i = 0; i < u.points(); ++i) u.values(sp.offset(1), i) = std::exp(-r * u.s(i));
  const auto [half, h1] = trace_norms(u);
  CHECK(half * half == doctest::Approx(kTwoPi).epsilon(1e-12));
  CHECK(h1 * h1 == doctest::Approx((1 + r * r + kTwoPi * kTwoPi) / (2 * r)).epsilon(1e-6));
  CHECK(std::abs(ibp_defect(u, 1)) < 1e-6);
  CHECK(std::abs(ibp_defect(u, -1)) < 1e-6);
  CHECK(t_mode_energy(u) == doctest::Approx(r / 2).epsilon(1e-6));
}

TEST_CASE("Floer cylinders from the maximum carry energy 0.02") {
  const auto& e = fixtures::eps_engine();
  const ConnectionCount c = count_floer(e, 0, 1);
  CHECK(c.count == 2);
  REQUIRE(c.energies.size() == 2);
  for (std::size_t i = 0; i < c.energies.size(); ++i) {
    CHECK(c.energies[i] == doctest::Approx(0.02).epsilon(1e-3));
    CHECK(std::abs(c.energies[i] - c.action_drops[i]) < 1e-4);
    CHECK(c.tail_rates[i] > 0.0);
  }
  CHECK(count_floer(e, 1, 0).count == 0);
}
