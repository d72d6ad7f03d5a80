#pragma once

// Truncated Fourier loops in T^{2n}.
//
// A loop is written x(t) = [x_0] + sum_{0<|k|<=N} exp(2 pi k J0 t) x_k with
// x_k in R^{2n}. The integer lattice acts on the constant part only, so the
// base point is stored reduced to [0,1)^{2n} and the coefficients are plain
// real vectors.
//
// Flat vectors ("mode vectors") are used by the solvers. Their layout is
// block k = -N..N, each block holding 2n reals, so the base point sits in
// block N. A mode vector carries a lifted (unreduced) base point.

#include <string>
#include <vector>

#include "torus_floer/types.hpp"

namespace floer {

struct GalerkinSpace {
  int n = 1;
  int N = 1;

  int dim() const { return 2 * n; }
  int dim_total() const { return 2 * n * (2 * N + 1); }
  /// Dimension of the truncated reference space R^n x H^+.
  int dim_v() const { return n + 2 * n * N; }
  int offset(int k) const { return (k + N) * 2 * n; }
  /// H^{1/2} weight of mode k: 1 for k = 0, 2 pi |k| otherwise.
  double weight(int k) const;
  /// Diagonal of the H^{1/2} Gram matrix in the mode basis.
  Vec weights() const;

  bool operator==(const GalerkinSpace&) const = default;
};

void require_same_space(const GalerkinSpace& a, const GalerkinSpace& b, const char* where);

class FourierLoop {
 public:
  /// Zero loop at the origin.
  FourierLoop(int n, int N);
  /// coeffs is 2n x 2N with column (k + N) for k < 0 and (k + N - 1) for k > 0.
  FourierLoop(int n, int N, const Vec& base, const Mat& coeffs);

  static FourierLoop constant(const Vec& c, int N);
  /// Loop with base point `base` and a single mode k carrying v.
  static FourierLoop single_mode(const Vec& base, int N, int k, const Vec& v);
  static FourierLoop from_vector(const GalerkinSpace& space, const Vec& modes);

  int n() const { return n_; }
  int N() const { return N_; }
  GalerkinSpace space() const { return {n_, N_}; }
  const Vec& base() const { return base_; }
  Vec coeff(int k) const;

  /// Mode vector with the stored base point.
  Vec to_vector() const;
  /// Mode vector with the base point lifted next to `anchor`.
  Vec to_vector_near(const Vec& anchor) const;

 private:
  int column(int k) const { return k < 0 ? k + N_ : k + N_ - 1; }

  int n_;
  int N_;
  Vec base_;
  Mat coeffs_;
};

enum class Part { Plus, Minus, Zero };

/// <x0, y0> + 2 pi sum_{k != 0} |k|^{2s} <x_k, y_k>. The base of y is lifted
/// to the representative nearest to the base of x.
double inner_hs(const FourierLoop& x, const FourierLoop& y, double s);
/// L^2(S^1) inner product: sum_k <x_k, y_k>.
double inner_l2(const FourierLoop& x, const FourierLoop& y);

FourierLoop project(const FourierLoop& x, Part part);
/// Adjoint of the inclusion H^{1/2} -> L^2: mode k is scaled by 1/(2 pi |k|).
FourierLoop jstar(const FourierLoop& y);

/// Point of T^{2n} (reduced to [0,1)) at time t.
Vec eval_loop(const FourierLoop& x, double t);
/// Same point without reduction of the base.
Vec eval_lifted(const FourierLoop& x, double t);

/// H^{s} inner product of mode vectors (no torus reduction).
double inner_hs(const GalerkinSpace& space, const Vec& x, const Vec& y, double s);
/// Zeroes all blocks except those selected by `part`.
Vec project(const GalerkinSpace& space, const Vec& x, Part part);
Vec jstar(const GalerkinSpace& space, const Vec& y);

/// Sampling and discrete Fourier analysis on a uniform t-grid.
///
/// synthesize() evaluates a mode vector at the M grid times; analyze() is the
/// discrete L^2 projection back onto |k| <= N. For M > 2N the composition
/// analyze(synthesize(v)) is the identity.
class ModeTransform {
 public:
  ModeTransform(GalerkinSpace space, int samples);

  const GalerkinSpace& space() const { return space_; }
  int samples() const { return samples_; }
  double time(int m) const { return static_cast<double>(m) / samples_; }
  /// 2n x dim_total evaluation matrix at sample m.
  const Mat& basis(int m) const { return basis_[m]; }

  /// Returns a 2n x M matrix, column m = x(t_m).
  Mat synthesize(const Vec& modes) const;
  Vec analyze(const Mat& values) const;
  /// (1/M) sum_m basis(m)^T S_m basis(m): the L^2 form of multiplication by S(t).
  Mat bilinear(const std::vector<Mat>& s) const;

 private:
  GalerkinSpace space_;
  int samples_;
  std::vector<Mat> basis_;
};

/// Default sample count for compositions with H: at least 8N + 16.
int default_samples(int N);

/// {"n":..,"N":..,"base":[..],"coeffs":[{"k":..,"v":[..]},..]} with 17
/// significant digits.
std::string to_json(const FourierLoop& x);
FourierLoop loop_from_json(const std::string& text);

/// Decimal text of v with 17 significant digits.
std::string format_real(double v);

}  // namespace floer
