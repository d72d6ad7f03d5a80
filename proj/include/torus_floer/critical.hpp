#pragma once

// Truncated critical points of the action and the linear data at them that
// the connection solvers need: stable/unstable splittings of the Morse and
// Floer asymptotic operators and the vector fields themselves.

#include <memory>
#include <vector>

#include "torus_floer/action_gradient.hpp"
#include "torus_floer/bvp.hpp"
#include "torus_floer/orbits.hpp"

namespace floer {

/// Seeded surrogate of a compact perturbation of the gradient.
///
/// K(x) = (magnitude/2) |grad A(x)| chi(x) u(x_0), with u a unit-bounded
/// trigonometric field on the torus placed in the constant block and chi a
/// smooth cutoff vanishing within r_crit of every critical point. The factor
/// |grad A| gives |K| <= magnitude |grad A| / 2.
class CompactPerturbation {
 public:
  CompactPerturbation() = default;
  CompactPerturbation(GalerkinSpace space, double magnitude, double r_crit,
                      std::vector<Vec> critical_bases, std::uint64_t seed);

  bool active() const { return magnitude_ > 0.0; }
  double magnitude() const { return magnitude_; }
  Vec operator()(const ActionContext& ctx, const Vec& x) const;
  Mat jacobian(const ActionContext& ctx, const Vec& x) const;

 private:
  double cutoff(const Vec& base) const;

  GalerkinSpace space_{};
  double magnitude_ = 0.0;
  double r_crit_ = 0.0;
  std::vector<Vec> critical_;
  std::vector<Vec> freq_;
  std::vector<double> phase_;
  std::vector<Vec> dir_;
};

struct CriticalPoint {
  int id = -1;
  /// Lifted mode vector, base in [0,1)^{2n}.
  Vec modes;
  double action = 0.0;
  int m = 0;
  int mu = 0;
};

/// Rows acting on y - c that select stable and unstable components.
struct Splitting {
  Mat stable_rows;
  Mat unstable_rows;
  /// Unstable directions in plain mode coordinates (columns).
  Mat unstable_dirs;
  Vec unstable_rates;
  double gap = 0.0;
  int d_u() const { return static_cast<int>(unstable_rows.rows()); }
};

/// Splitting of a symmetric operator given in coordinates z = diag(scale) y.
Splitting split_symmetric(const Mat& sym, const Vec& scale, double tol_spec);

/// X = -grad A (+ K); D X is symmetric in H^{1/2}-orthonormal coordinates.
Splitting morse_splitting(const ActionContext& ctx, const Vec& c, double tol_spec,
                          const CompactPerturbation* k = nullptr);
/// u_k' = 2 pi k u_k - (grad H)_k, symmetric in mode coordinates.
Splitting floer_splitting(const ActionContext& ctx, const Vec& c, double tol_spec);

VectorField morse_field(std::shared_ptr<const ActionContext> ctx,
                        std::shared_ptr<const CompactPerturbation> k = nullptr);
VectorField floer_field(std::shared_ptr<const ActionContext> ctx);
/// Floer field restricted to the constant block (for t-independent guesses).
Vec floer_rhs(const ActionContext& ctx, const Vec& y);

/// Newton on the truncated gradient from `guess`.
Vec refine_critical(const ActionContext& ctx, const Vec& guess, double tol = 1e-12);

/// Truncated critical points for a list of orbits (same order, same ids).
std::vector<CriticalPoint> critical_points(const ActionContext& ctx,
                                           const std::vector<PeriodicOrbit>& orbits,
                                           double tol_spec = 1e-8);

/// Base block shifted by an integer lattice vector.
Vec shift_base(const GalerkinSpace& space, const Vec& modes, const Vec& lattice);
/// Integer vector l minimising |base(a) - base(b) - l|.
Vec lattice_offset(const GalerkinSpace& space, const Vec& a, const Vec& b);
/// H^{1/2} distance with the base difference taken literally (lifted).
double lifted_distance(const GalerkinSpace& space, const Vec& a, const Vec& b);

}  // namespace floer
