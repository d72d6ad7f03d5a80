#pragma once

// Hermite-Simpson collocation for systems y' = f(y) on one or more s-intervals,
// closed by linear end conditions, matching rows between segments and optional
// scalar (phase) conditions. Newton with backtracking on the squared residual,
// sparse LU for the linear solves.

#include <functional>
#include <vector>

#include "torus_floer/types.hpp"

namespace floer {

struct VectorField {
  std::function<Vec(const Vec&)> f;
  std::function<Mat(const Vec&)> jac;
};

struct Segment {
  double s0 = 0.0;
  double s1 = 1.0;
  int intervals = 64;
  VectorField field;

  double h() const { return (s1 - s0) / intervals; }
  double node(int i) const { return s0 + i * h(); }
};

/// rows * (y_segment(node) - target) = 0
struct LinearCondition {
  int segment = 0;
  int node = 0;
  Mat rows;
  Vec target;
};

/// y_a(node_a) - y_b(node_b) = 0
struct MatchCondition {
  int seg_a = 0, node_a = 0;
  int seg_b = 0, node_b = 0;
};

/// g(y_segment(node)) = value
struct ScalarCondition {
  int segment = 0;
  int node = 0;
  std::function<double(const Vec&)> g;
  std::function<Vec(const Vec&)> dg;
  double value = 0.0;
};

struct BvpProblem {
  int dim = 0;
  std::vector<Segment> segments;
  std::vector<LinearCondition> linear;
  std::vector<MatchCondition> matches;
  std::vector<ScalarCondition> scalars;

  int unknowns() const;
  int equations() const;
  int offset(int segment) const;
};

struct NewtonOptions {
  double tol = 1e-8;
  int max_iter = 30;
  int max_backtrack = 12;
};

struct BvpResult {
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  /// Node values, one D x (intervals+1) matrix per segment.
  std::vector<Mat> nodes;
  std::vector<double> history;
};

/// Residual and sparse Jacobian evaluation; exposed for diagnostics.
Vec bvp_residual(const BvpProblem& p, const Vec& z);
Mat bvp_jacobian_dense(const BvpProblem& p, const Vec& z);

Vec pack_nodes(const BvpProblem& p, const std::vector<Mat>& nodes);
std::vector<Mat> unpack_nodes(const BvpProblem& p, const Vec& z);

BvpResult solve_bvp(const BvpProblem& p, const std::vector<Mat>& guess, const NewtonOptions& opts);

/// Simpson-rule integral of a scalar over a segment using node and midpoint values.
double segment_integral(const Segment& seg, const Mat& nodes,
                        const std::function<double(const Vec& y, const Vec& fy)>& integrand);

}  // namespace floer
