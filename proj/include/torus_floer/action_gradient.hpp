#pragma once

#include "torus_floer/hamiltonian.hpp"
#include "torus_floer/loopspace.hpp"
#include "torus_floer/orbits.hpp"

namespace floer {

/// Sampled composition of H with truncated loops: the t-grid, mode transform and
/// the Hamiltonian travel together.
class ActionContext {
 public:
  ActionContext(const TrigHamiltonian& h, GalerkinSpace space, int samples = 0);

  const TrigHamiltonian& hamiltonian() const { return h_; }
  const GalerkinSpace& space() const { return tr_.space(); }
  const ModeTransform& transform() const { return tr_; }

  /// Mode vectors carry a lifted base point.
  double action(const Vec& modes) const;
  /// L^2 modes of t -> grad H(t, x(t)).
  Vec grad_h_modes(const Vec& modes) const;
  /// L^2 form of multiplication by Hess H(t, x(t)).
  Mat hess_h_form(const Vec& modes) const;

  /// H^{1/2} gradient: -P+ x + P- x + j*(grad H modes).
  Vec gradient(const Vec& modes) const;
  /// Euclidean gradient of action() in mode coordinates (= G * gradient).
  Vec action_differential(const Vec& modes) const;
  /// Jacobian of the vector field X = -gradient in mode coordinates.
  Mat vector_field_jacobian(const Vec& modes) const;

 private:
  TrigHamiltonian h_;
  ModeTransform tr_;
};

/// Hessian of the action in H^{1/2}-orthonormal mode coordinates
/// z_k = sqrt(w_k) x_k, where it is a symmetric matrix.
struct HessianMatrix {
  GalerkinSpace space;
  Mat matrix;
  /// The same operator in plain mode coordinates: G^{-1/2} A G^{1/2}.
  Mat raw() const;
};

double action(const TrigHamiltonian& h, const FourierLoop& x);
/// Tangent vector in mode coordinates (block layout of GalerkinSpace).
Vec gradient(const TrigHamiltonian& h, const FourierLoop& x);
HessianMatrix hessian(const TrigHamiltonian& h, const FourierLoop& x);
HessianMatrix hessian_at(const ActionContext& ctx, const Vec& modes);

struct IndexOptions {
  double tol_spec = 1e-8;
  /// Orbits whose Fourier tail beyond N exceeds this H^{1/2} norm are rejected.
  double tol_trunc = 1e-6;
};

/// Number of positive eigenvalues of -hessian minus dim_V, at N and N+2.
int relative_index(const TrigHamiltonian& h, const PeriodicOrbit& orbit, const GalerkinSpace& space,
                   const IndexOptions& opts = {});
/// Index at a single truncation, without the stability check.
int relative_index_at(const TrigHamiltonian& h, const PeriodicOrbit& orbit,
                      const GalerkinSpace& space, double tol_spec);

/// dim(W cap V^perp) - dim(W^perp cap V) for orthonormal bases (columns).
int relative_dimension(const Mat& w_basis, const Mat& v_basis, double tol = 1e-9);
/// Relative index via the projection-pair formula, for cross-checking.
int relative_index_projection(const HessianMatrix& hess, double tol_spec = 1e-8);

}  // namespace floer
