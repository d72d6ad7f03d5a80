#include <doctest.h>

#include <cmath>
#include <random>

#include "torus_floer/errors.hpp"
#include "torus_floer/loopspace.hpp"

using namespace floer;

namespace {

Vec random_modes(const GalerkinSpace& sp, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vec v(sp.dim_total());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = u(rng);
  return v;
}

// x(t) = sum_k exp(2 pi k J0 t) x_k, evaluated directly.
Vec eval_direct(const GalerkinSpace& sp, const Vec& modes, double t) {
  Vec x = Vec::Zero(sp.dim());
  for (int k = -sp.N; k <= sp.N; ++k) x += rotation(sp.n, kTwoPi * k * t) * modes.segment(sp.offset(k), sp.dim());
  return x;
}

}  // namespace

TEST_CASE("galerkin space layout") {
  const GalerkinSpace sp{2, 3};
  CHECK(sp.dim() == 4);
  CHECK(sp.dim_total() == 28);
  CHECK(sp.dim_v() == 2 + 12);
  CHECK(sp.offset(-3) == 0);
  CHECK(sp.offset(0) == 12);
  CHECK(sp.weight(0) == 1.0);
  CHECK(sp.weight(-2) == doctest::Approx(4 * kPi));
  const Vec w = sp.weights();
  CHECK(w[sp.offset(1)] == doctest::Approx(kTwoPi));
  CHECK(w[sp.offset(0) + 3] == 1.0);
}

TEST_CASE("single mode loop is a rotation of its coefficient") {
  Vec base(2), v(2);
  base << 0.25, 1.75;
  v << 0.3, -0.4;
  const FourierLoop x = FourierLoop::single_mode(base, 3, 2, v);
  CHECK(x.base()[1] == doctest::Approx(0.75));
  for (double t : {0.0, 0.1, 0.37}) {
    const Vec want = base + rotation(1, kTwoPi * 2 * t) * v;
    const Vec got = eval_lifted(x, t);
    CHECK((got - Vec(x.base() + rotation(1, kTwoPi * 2 * t) * v)).norm() < 1e-14);
    CHECK(torus_distance(eval_loop(x, t), want) < 1e-14);
  }
  CHECK_THROWS_AS(FourierLoop::single_mode(base, 3, 0, v), Error);
  CHECK_THROWS_AS(FourierLoop::single_mode(base, 3, 4, v), Error);
}

TEST_CASE("H^s inner products and projections") {
  std::mt19937_64 rng(3);
  const GalerkinSpace sp{1, 4};
  Vec a = random_modes(sp, rng), b = random_modes(sp, rng);
  a.segment(sp.offset(0), 2) << 0.3, 0.4;
  b.segment(sp.offset(0), 2) << 0.35, 0.45;
  double want = 0.0, want_l2 = 0.0;
  for (int k = -sp.N; k <= sp.N; ++k) {
    const double d = a.segment(sp.offset(k), 2).dot(b.segment(sp.offset(k), 2));
    want += (k == 0 ? 1.0 : kTwoPi * std::abs(k)) * d;
    want_l2 += d;
  }
  CHECK(inner_hs(sp, a, b, 0.5) == doctest::Approx(want).epsilon(1e-13));

  const FourierLoop x = FourierLoop::from_vector(sp, a), y = FourierLoop::from_vector(sp, b);
  CHECK(inner_l2(x, y) == doctest::Approx(want_l2).epsilon(1e-13));
  CHECK(inner_hs(x, y, 0.5) == doctest::Approx(want).epsilon(1e-13));

  const Vec p = project(sp, a, Part::Plus), m = project(sp, a, Part::Minus), z = project(sp, a, Part::Zero);
  CHECK((p + m + z - a).norm() < 1e-15);
  CHECK(inner_hs(sp, p, m, 0.5) == 0.0);
  CHECK(p.segment(sp.offset(-1), 2).norm() == 0.0);
  CHECK(m.segment(sp.offset(1), 2).norm() == 0.0);
}

TEST_CASE("jstar is the adjoint of the inclusion") {
  // <j x, y>_{L2} = <x, j* y>_{H^{1/2}} on loops without constant part.
  std::mt19937_64 rng(5);
  const GalerkinSpace sp{2, 3};
  Vec x = random_modes(sp, rng), y = random_modes(sp, rng);
  x.segment(sp.offset(0), sp.dim()).setZero();
  y.segment(sp.offset(0), sp.dim()).setZero();
  CHECK(inner_hs(sp, x, jstar(sp, y), 0.5) == doctest::Approx(x.dot(y)).epsilon(1e-13));
  const Vec j = jstar(sp, y);
  CHECK(j[sp.offset(-3)] == doctest::Approx(y[sp.offset(-3)] / (6 * kPi)));
}

TEST_CASE("mode transform round trip and evaluation") {
  std::mt19937_64 rng(7);
  const GalerkinSpace sp{1, 5};
  const ModeTransform tr(sp, default_samples(sp.N));
  CHECK(tr.samples() >= 8 * sp.N + 16);
  const Vec v = random_modes(sp, rng);
  const Mat s = tr.synthesize(v);
  for (int m : {0, 5, 17})
    CHECK((s.col(m) - eval_direct(sp, v, tr.time(m))).norm() < 1e-13);
  CHECK((tr.analyze(s) - v).norm() < 1e-13);
  CHECK_THROWS_AS(ModeTransform(sp, 2 * sp.N), Error);
}

TEST_CASE("bilinear form of a constant matrix is block diagonal") {
  const GalerkinSpace sp{1, 2};
  const ModeTransform tr(sp, 32);
  Mat s(2, 2);
  s << 2.0, 0.5, 0.5, -1.0;
  const Mat b = tr.bilinear(std::vector<Mat>(32, s));
  // Mode 0 sees S itself; a rotating mode sees the rotation average of S.
  CHECK((b.block(sp.offset(0), sp.offset(0), 2, 2) - s).norm() < 1e-13);
  CHECK(b.block(sp.offset(0), sp.offset(1), 2, 2).norm() < 1e-13);
}

TEST_CASE("json round trip is exact") {
  std::mt19937_64 rng(11);
  const GalerkinSpace sp{2, 2};
  Vec v = random_modes(sp, rng);
  v[sp.offset(0)] = 0.1;
  const FourierLoop x = FourierLoop::from_vector(sp, v);
  const FourierLoop y = loop_from_json(to_json(x));
  CHECK(y.N() == 2);
  CHECK(y.n() == 2);
  CHECK((y.to_vector() - x.to_vector()).norm() == 0.0);
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(loop_from_json("{\"n\":1,\"N\":1,\"base\":[0.5],\"coeffs\":[]}"), Error);
}

TEST_CASE("torus helpers") {
  Vec a(2), b(2);
  a << 0.95, 0.1;
  b << 0.05, 2.1;
  CHECK(torus_distance(a, b) == doctest::Approx(0.1));
  CHECK(reduce_mod1(b)[1] == doctest::Approx(0.1));
  CHECK(wrap_half(a)[0] == doctest::Approx(-0.05));
  const Mat j = standard_j(2);
  CHECK((j * j + Mat::Identity(4, 4)).norm() == 0.0);
  Vec v(4);
  v << 1, 2, 3, 4;
  CHECK((apply_j(v) - j * v).norm() == 0.0);
  CHECK((rotation(2, kPi / 2) - j).norm() < 1e-15);
}
