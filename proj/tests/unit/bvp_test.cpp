#include <doctest.h>

#include <cmath>

#include "torus_floer/bvp.hpp"

using namespace floer;

namespace {

// y' = -y on [0, 1], y(0) = 1.
BvpProblem decay(int intervals) {
  BvpProblem p;
  p.dim = 1;
  VectorField f{[](const Vec& y) { return Vec(-y); }, [](const Vec&) { return Mat(-Mat::Identity(1, 1)); }};
  p.segments.push_back({0.0, 1.0, intervals, f});
  p.linear.push_back({0, 0, Mat::Identity(1, 1), Vec::Ones(1)});
  return p;
}

VectorField oscillator() {
  return {[](const Vec& y) {
            Vec d(2);
            d << y[1], -y[0];
            return d;
          },
          [](const Vec&) {
            Mat j(2, 2);
            j << 0, 1, -1, 0;
            return j;
          }};
}

}  // namespace

TEST_CASE("Hermite-Simpson is fourth order on a linear decay") {
  double err[2];
  int idx = 0;
  for (int m : {8, 16}) {
    const BvpProblem p = decay(m);
    CHECK(p.unknowns() == m + 1);
    const BvpResult r = solve_bvp(p, {Mat::Ones(1, m + 1)}, {});
    REQUIRE(r.converged);
    err[idx++] = std::abs(r.nodes[0](0, m) - std::exp(-1.0));
  }
  CHECK(std::log2(err[0] / err[1]) > 3.7);
  CHECK(err[1] < 1e-7);
}

TEST_CASE("dense Jacobian agrees with differences of the residual") {
  BvpProblem p;
  p.dim = 2;
  p.segments.push_back({0.0, 1.0, 4, oscillator()});
  p.linear.push_back({0, 0, Mat::Identity(1, 2), Vec::Zero(2)});
  p.scalars.push_back({0, 4, [](const Vec& y) { return y[0] * y[0]; },
                       [](const Vec& y) {
                         Vec d = Vec::Zero(2);
                         d[0] = 2 * y[0];
                         return d;
                       },
                       0.5});
  Vec z(p.unknowns());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = std::sin(1.0 + i);
  const Mat j = bvp_jacobian_dense(p, z);
  CHECK(j.rows() == p.equations());
  const double eps = 1e-7;
  for (int c = 0; c < p.unknowns(); ++c) {
    Vec e = Vec::Zero(p.unknowns());
    e[c] = eps;
    const Vec fd = (bvp_residual(p, z + e) - bvp_residual(p, z - e)) / (2 * eps);
    CHECK((fd - j.col(c)).norm() < 1e-6);
  }
}

TEST_CASE("two segments with a matching row and a scalar condition") {
  // Harmonic oscillator split at s = 1: y1(0) = 0 and y1(2)^2 = sin(2)^2 pick y = (sin, cos).
  BvpProblem p;
  p.dim = 2;
  p.segments.push_back({0.0, 1.0, 16, oscillator()});
  p.segments.push_back({1.0, 2.0, 16, oscillator()});
  p.linear.push_back({0, 0, Mat::Identity(1, 2), Vec::Zero(2)});
  p.matches.push_back({0, 16, 1, 0});
  const double target = std::sin(2.0) * std::sin(2.0);
  p.scalars.push_back({1, 16, [](const Vec& y) { return y[0] * y[0]; },
                       [](const Vec& y) {
                         Vec d = Vec::Zero(2);
                         d[0] = 2 * y[0];
                         return d;
                       },
                       target});
  std::vector<Mat> guess{Mat::Constant(2, 17, 0.8), Mat::Constant(2, 17, 0.8)};
  const BvpResult r = solve_bvp(p, guess, {});
  REQUIRE(r.converged);
  CHECK(r.nodes[1](0, 16) == doctest::Approx(std::sin(2.0)).epsilon(1e-6));
  CHECK(r.nodes[0](1, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK((r.nodes[0].col(16) - r.nodes[1].col(0)).norm() < 1e-12);
  const Vec z = pack_nodes(p, r.nodes);
  CHECK((unpack_nodes(p, z)[1] - r.nodes[1]).norm() == 0.0);
}

TEST_CASE("segment integral is exact for cubics") {
  Segment seg{0.0, 2.0, 4, {}};
  Mat nodes(1, 5);
  for (int i = 0; i < 5; ++i) nodes(0, i) = seg.node(i);
  seg.field = {[](const Vec&) { return Vec::Ones(1); }, [](const Vec&) { return Mat::Zero(1, 1); }};
  // y = s, integrand y^3: int_0^2 s^3 ds = 4.
  const double v = segment_integral(seg, nodes, [](const Vec& y, const Vec&) { return y[0] * y[0] * y[0]; });
  CHECK(v == doctest::Approx(4.0).epsilon(1e-13));
}
