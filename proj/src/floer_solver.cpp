#include "torus_floer/floer_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "torus_floer/errors.hpp"

namespace floer {

Mat ds_fd4(const Mat& u, double h) {
  const Eigen::Index m = u.cols();
  if (m < 5) throw Error(ErrorKind::Dimension, "floer_solver", "fourth-order differences need 5 points");
  Mat d(u.rows(), m);
  const double c = 1.0 / (12.0 * h);
  d.col(0) = c * (-25.0 * u.col(0) + 48.0 * u.col(1) - 36.0 * u.col(2) + 16.0 * u.col(3) - 3.0 * u.col(4));
  d.col(1) = c * (-3.0 * u.col(0) - 10.0 * u.col(1) + 18.0 * u.col(2) - 6.0 * u.col(3) + u.col(4));
  for (Eigen::Index i = 2; i < m - 2; ++i)
    d.col(i) = c * (u.col(i - 2) - 8.0 * u.col(i - 1) + 8.0 * u.col(i + 1) - u.col(i + 2));
  d.col(m - 2) = -c * (-3.0 * u.col(m - 1) - 10.0 * u.col(m - 2) + 18.0 * u.col(m - 3) -
                       6.0 * u.col(m - 4) + u.col(m - 5));
  d.col(m - 1) = -c * (-25.0 * u.col(m - 1) + 48.0 * u.col(m - 2) - 36.0 * u.col(m - 3) +
                       16.0 * u.col(m - 4) - 3.0 * u.col(m - 5));
  return d;
}

Vec gregory_weights(int points, double h) {
  if (points < 8) throw Error(ErrorKind::Dimension, "floer_solver", "Gregory weights need 8 points");
  Vec w = Vec::Constant(points, h);
  const double end[3] = {3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0};
  for (int i = 0; i < 3; ++i) {
    w[i] = h * end[i];
    w[points - 1 - i] = h * end[i];
  }
  return w;
}

namespace {

Vec k_diagonal(const GalerkinSpace& sp) {
  Vec d(sp.dim_total());
  for (int k = -sp.N; k <= sp.N; ++k) d.segment(sp.offset(k), sp.dim()).setConstant(kTwoPi * k);
  return d;
}

}  // namespace

Mat floer_residual(const ActionContext& ctx, const CylinderGrid& u) {
  require_same_space(ctx.space(), u.space, "floer_residual");
  Mat r = ds_fd4(u.values, u.h());
  for (int i = 0; i < u.points(); ++i) r.col(i) -= floer_rhs(ctx, u.values.col(i));
  return r;
}

double energy(const ActionContext& ctx, const CylinderGrid& u) {
  return flow_energy(FlowKind::Floer, ctx, nullptr, u.values, u.h());
}

CylinderGrid solve_cylinder(const ActionContext& ctx, const Vec& x, const Vec& y_lifted,
                            const CylinderGrid& guess, const NewtonOptions& opts, double tol_spec) {
  if (std::abs(guess.s0 + guess.s1) > 1e-12)
    throw Error(ErrorKind::Dimension, "floer_solver", "cylinder grid must be symmetric about s = 0");
  auto shared = std::make_shared<ActionContext>(ctx);
  const double L = guess.s1;
  const int intervals = guess.points() - 1;
  const BvpProblem p = connection_problem(FlowKind::Floer, shared, nullptr, x, y_lifted, L, intervals, tol_spec);
  auto u = solve_connection(p, guess.values, x, y_lifted, opts);
  if (!u) throw Error(ErrorKind::NoSolution, "floer_solver", "Newton did not converge from the guess");
  CylinderGrid out = guess;
  out.values = *u;
  return out;
}

ConnectionCount count_floer(const ConnectionEngine& engine, int x, int y) {
  return engine.count(FlowKind::Floer, x, y);
}

BoundaryResult floer_boundary(const ConnectionEngine& engine) {
  return assemble_boundary(engine.critical(), true,
                           [&](int x, int y) { return count_floer(engine, x, y); });
}

FredholmReport fredholm_diag(double a, double b, const GalerkinSpace& space, double L,
                             int intervals, double sigma_rel) {
  for (double v : {a, b}) {
    const double r = std::remainder(v, kTwoPi);
    if (std::abs(r) <= 0.1)
      throw Error(ErrorKind::SpectralGap, "floer_solver", "model weight lies within 0.1 of 2 pi Z");
  }
  const int D = space.dim_total();
  Vec lm(D), lf(D);
  for (int k = -space.N; k <= space.N; ++k) {
    double m;
    if (k > 0) m = 1.0 - a / (kTwoPi * k);
    else if (k < 0) m = -1.0 - a / (kTwoPi * -k);
    else m = -a;
    lm.segment(space.offset(k), space.dim()).setConstant(m);
    lf.segment(space.offset(k), space.dim()).setConstant(kTwoPi * k - b);
  }
  auto linear = [](const Vec& diag) {
    VectorField vf;
    vf.f = [diag](const Vec& y) { return Vec(diag.cwiseProduct(y)); };
    vf.jac = [diag](const Vec&) { return Mat(diag.asDiagonal()); };
    return vf;
  };
  auto rows_where = [&](const Vec& diag, bool positive) {
    std::vector<int> idx;
    for (int i = 0; i < D; ++i)
      if ((diag[i] > 0) == positive) idx.push_back(i);
    Mat r = Mat::Zero(static_cast<Eigen::Index>(idx.size()), D);
    for (std::size_t j = 0; j < idx.size(); ++j) r(static_cast<Eigen::Index>(j), idx[j]) = 1.0;
    return r;
  };
  BvpProblem p;
  p.dim = D;
  p.segments.push_back({-L, 0.0, intervals, linear(lm)});
  p.segments.push_back({0.0, L, intervals, linear(lf)});
  // Decay at the far ends: no growing component toward -L on the Morse side
  // (stable directions vanish there), none toward +L on the Floer side.
  p.linear.push_back({0, 0, rows_where(lm, false), Vec::Zero(D)});
  p.linear.push_back({1, intervals, rows_where(lf, true), Vec::Zero(D)});
  p.matches.push_back({0, intervals, 1, 0});

  const Mat J = bvp_jacobian_dense(p, Vec::Zero(p.unknowns()));
  Eigen::BDCSVD<Mat> svd(J);
  const Vec& sv = svd.singularValues();
  FredholmReport rep;
  rep.sigma_max = sv.size() ? sv[0] : 0.0;
  rep.sigma_tol = sigma_rel * rep.sigma_max;
  int rank = 0;
  rep.smallest_kept = rep.sigma_max;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const double s = sv[i];
    if (s > rep.sigma_tol / std::sqrt(1000.0) && s < rep.sigma_tol * std::sqrt(1000.0)) {
      std::ostringstream os;
      os << "singular value " << s << " lies within a factor sqrt(1000) of sigma_tol " << rep.sigma_tol;
      throw Error(ErrorKind::Resolution, "floer_solver", os.str());
    }
    if (s > rep.sigma_tol) {
      ++rank;
      rep.smallest_kept = s;
    } else {
      rep.largest_dropped = std::max(rep.largest_dropped, s);
    }
  }
  rep.dim_ker = static_cast<int>(J.cols()) - rank;
  rep.dim_coker = static_cast<int>(J.rows()) - rank;
  rep.index = rep.dim_ker - rep.dim_coker;
  const int fa = static_cast<int>(std::floor(a / kTwoPi));
  const int fb = static_cast<int>(std::floor(b / kTwoPi));
  rep.predicted_index = -2 * space.n * fa + 2 * space.n * fb;
  return rep;
}

double ibp_defect(const CylinderGrid& u, int sign) {
  const GalerkinSpace& sp = u.space;
  const Vec kd = k_diagonal(sp);
  const double h = u.h();
  const Mat du = ds_fd4(u.values, h);
  const Vec w = gregory_weights(u.points(), h);
  double lhs = 0.0;
  for (int i = 0; i < u.points(); ++i) {
    const Vec dt = kd.cwiseProduct(u.values.col(i));  // |J0 d_t u| per mode
    const Vec dbar = du.col(i) - sign * dt;
    lhs += w[i] * (dbar.squaredNorm() - du.col(i).squaredNorm() - dt.squaredNorm());
  }
  auto pm = [&](const Vec& v, int s) {
    double acc = 0.0;
    for (int k = 1; k <= sp.N; ++k)
      acc += kTwoPi * k * v.segment(sp.offset(s * k), sp.dim()).squaredNorm();
    return acc;
  };
  const Vec a = u.values.col(0), b = u.values.col(u.points() - 1);
  const double rhs = pm(b, -1) - pm(b, 1) - pm(a, -1) + pm(a, 1);
  return lhs - sign * rhs;
}

std::pair<double, double> trace_norms(const CylinderGrid& u) {
  const GalerkinSpace& sp = u.space;
  const Vec kd = k_diagonal(sp);
  const double h = u.h();
  const Mat du = ds_fd4(u.values, h);
  const Vec w = gregory_weights(u.points(), h);
  double h1 = 0.0;
  for (int i = 0; i < u.points(); ++i)
    h1 += w[i] * (u.values.col(i).squaredNorm() + du.col(i).squaredNorm() +
                  kd.cwiseProduct(u.values.col(i)).squaredNorm());
  const Vec v = u.values.col(0);
  const double half = v.dot(v.cwiseProduct(sp.weights()));
  return {std::sqrt(half), std::sqrt(h1)};
}

double t_mode_energy(const CylinderGrid& u) {
  const GalerkinSpace& sp = u.space;
  const Mat du = ds_fd4(u.values, u.h());
  const Vec w = gregory_weights(u.points(), u.h());
  double e = 0.0;
  for (int i = 0; i < u.points(); ++i) {
    double acc = du.col(i).squaredNorm() - du.col(i).segment(sp.offset(0), sp.dim()).squaredNorm();
    e += w[i] * acc;
  }
  return e;
}

}  // namespace floer
