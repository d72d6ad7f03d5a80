#pragma once

#include <vector>

#include "torus_floer/connections.hpp"

namespace floer {

/// Fourth-order s-derivative of node columns on a uniform grid, one-sided
/// fourth-order stencils at the two ends. Needs at least 5 columns.
Mat ds_fd4(const Mat& nodes, double h);

/// Gregory end-corrected trapezoid weights h [3/8, 7/6, 23/24, 1, ..., 1, 23/24, 7/6, 3/8].
Vec gregory_weights(int points, double h);

/// Truncated cylinder on a uniform s-grid; column i holds the mode vector of u(s_i, .).
struct CylinderGrid {
  GalerkinSpace space;
  double s0 = -1.0;
  double s1 = 1.0;
  Mat values;
  int minus = -1;
  int plus = -1;

  int points() const { return static_cast<int>(values.cols()); }
  double h() const { return (s1 - s0) / (points() - 1); }
  double s(int i) const { return s0 + i * h(); }
};

/// Mode coefficients of d_s u + J0 (d_t u - X_H(t, u)) at every grid point:
/// d_s by ds_fd4, d_t exact in modes, X_H by sampling.
Mat floer_residual(const ActionContext& ctx, const CylinderGrid& u);

/// (1/2) int int |d_s u|^2 + |d_t u - X_H(u)|^2 with ds_fd4 and Gregory weights.
double energy(const ActionContext& ctx, const CylinderGrid& u);

/// Newton solve of the collocated Floer equation from `guess` with end
/// conditions at x and y_lifted and, for x != y, the middle action pinned.
/// Throws NoSolution when Newton does not converge.
CylinderGrid solve_cylinder(const ActionContext& ctx, const Vec& x, const Vec& y_lifted,
                            const CylinderGrid& guess, const NewtonOptions& opts = {},
                            double tol_spec = 1e-8);

/// nu(x, y) for crit indices with mu(x) - mu(y) = 1.
ConnectionCount count_floer(const ConnectionEngine& engine, int x, int y);

/// Floer boundary, graded by mu.
BoundaryResult floer_boundary(const ConnectionEngine& engine);

struct FredholmReport {
  int dim_ker = 0;
  int dim_coker = 0;
  int index = 0;
  int predicted_index = 0;
  double sigma_max = 0.0;
  double sigma_tol = 0.0;
  /// Smallest singular value kept in the rank and largest one discarded.
  double smallest_kept = 0.0;
  double largest_dropped = 0.0;
};

/// Coupled model operator: half-line Morse block eta' = (P+ - P- - j* a) eta on
/// [-L, 0] decaying at the left end, half-cylinder block d_s + J0 d_t + b on
/// [0, L] decaying at the right end, matched at s = 0. Ranks by SVD with
/// sigma_tol = sigma_rel * sigma_max; a singular value within a factor
/// sqrt(1000) of sigma_tol raises a resolution error.
FredholmReport fredholm_diag(double a, double b, const GalerkinSpace& space, double L,
                             int intervals, double sigma_rel = 1e-6);

/// |d_bar u|^2 - |d_s u|^2 - |d_t u|^2 minus the boundary terms
/// |P- u(T)|^2 - |P+ u(T)|^2 - |P- u(-T)|^2 + |P+ u(-T)|^2 (H^{1/2} norms).
/// sign = +1 uses d_bar = d_s + J0 d_t, sign = -1 uses d_s - J0 d_t, for which
/// the boundary terms change sign.
double ibp_defect(const CylinderGrid& u, int sign);

/// |u(0)|_{H^{1/2}} and |u|_{H^1} on a half cylinder whose grid starts at s = 0.
std::pair<double, double> trace_norms(const CylinderGrid& u);

/// int sum_{k != 0} |d_s u_k|^2 ds: the share of the energy carried by t-modes.
double t_mode_energy(const CylinderGrid& u);

}  // namespace floer
