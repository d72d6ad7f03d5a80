#include <doctest.h>

#include <cmath>

#include "torus_floer/conley_zehnder.hpp"
#include "torus_floer/errors.hpp"

using namespace floer;

namespace {

int cz_rotation(double omega) { return -2 * static_cast<int>(std::floor(omega / kTwoPi)) - 1; }

}  // namespace

TEST_CASE("rotation paths") {
  for (double lam : {0.3, -0.3, 4.0, 7.0, 13.0, -7.0, -20.0, 40.0})
    CHECK(cz_index(constant_generator_path(lam * Mat::Identity(2, 2))) == cz_rotation(lam));
  CHECK(cz_index(constant_generator_path(5.0 * Mat::Identity(4, 4))) == 2 * cz_rotation(5.0));
}

TEST_CASE("elliptic paths are conjugate to rotations") {
  // S = diag(a, b), ab > 0, rotates with frequency sqrt(ab).
  for (auto [a, b] : {std::pair{2.0, 8.0}, {1.0, 100.0}, {-3.0, -5.0}, {50.0, 2.0}}) {
    Mat s = Mat::Zero(2, 2);
    s(0, 0) = a;
    s(1, 1) = b;
    const double omega = (a > 0 ? 1.0 : -1.0) * std::sqrt(a * b);
    CHECK(cz_index(constant_generator_path(s)) == cz_rotation(omega));
  }
}

TEST_CASE("small generators give minus half the signature") {
  auto sig_half = [](const Mat& s) {
    Eigen::SelfAdjointEigenSolver<Mat> es(s);
    int sig = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) sig += es.eigenvalues()[i] > 0 ? 1 : -1;
    return -sig / 2;
  };
  Mat hyp(2, 2);
  hyp << 0.4, 0.0, 0.0, -0.4;
  CHECK(cz_index(constant_generator_path(hyp)) == 0);
  Mat s4(4, 4);
  s4 << -0.3, 0.1, 0.0, 0.0, 0.1, 0.5, 0.0, 0.2, 0.0, 0.0, -0.2, 0.0, 0.0, 0.2, 0.0, 0.6;
  CHECK(cz_index(constant_generator_path(s4)) == sig_half(s4));
  CHECK(cz_index(constant_generator_path(-0.2 * Mat::Identity(4, 4))) == 2);
}

TEST_CASE("split paths are additive") {
  // (q1, q2, p1, p2) with frequency 3 in the first plane and 9 in the second.
  Mat s = Mat::Zero(4, 4);
  s(0, 0) = s(2, 2) = 3.0;
  s(1, 1) = s(3, 3) = 9.0;
  CHECK(cz_index(constant_generator_path(s)) == cz_rotation(3.0) + cz_rotation(9.0));
}

TEST_CASE("degenerate endpoints are refused") {
  CHECK_THROWS_AS(cz_index(constant_generator_path(kTwoPi * Mat::Identity(2, 2))), Error);
  try {
    cz_index(constant_generator_path(Mat::Zero(2, 2)));
    FAIL("expected a degenerate path error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
}

TEST_CASE("geodesic midpoint and Souriau angles") {
  const Mat r = rotation(1, 0.8);
  CHECK((polar_midpoint(Mat::Identity(2, 2), r) - rotation(1, 0.4)).norm() < 1e-12);
  // The graph of a rotation by theta meets the diagonal at angle theta.
  CHECK(souriau_angles(Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  const Vec ang = souriau_angles(rotation(1, 0.5));
  REQUIRE(ang.size() == 2);
  CHECK(ang[0] == doctest::Approx(0.5));
  CHECK(ang[1] == doctest::Approx(0.5));
}
