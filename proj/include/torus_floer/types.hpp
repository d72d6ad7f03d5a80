#pragma once

#include <Eigen/Dense>

namespace floer {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Standard complex structure on R^{2n} in (q_1..q_n, p_1..p_n) coordinates:
/// J0 = [[0, I], [-I, 0]].
Mat standard_j(int n);

/// J0 * v without forming the matrix.
Vec apply_j(const Vec& v);

/// exp(theta * J0) = cos(theta) I + sin(theta) J0.
Mat rotation(int n, double theta);

/// Representative of x in [0, 1) componentwise.
Vec reduce_mod1(const Vec& x);

/// Representative of d in (-1/2, 1/2] componentwise.
Vec wrap_half(const Vec& d);

/// min over integer translations of |a - b|.
double torus_distance(const Vec& a, const Vec& b);

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

}  // namespace floer
