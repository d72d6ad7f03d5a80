#pragma once

#include "torus_floer/hamiltonian.hpp"

namespace floer {

struct CzOptions {
  double tol_deg = 1e-6;
  int max_doublings = 12;
};

/// Conley-Zehnder index of a path starting at the identity.
///
/// The graph of Psi(t) is a Lagrangian path in (R^{4n}, (-w0) + w0); the index
/// is its Maslov index relative to the diagonal, read off from the lifted
/// eigen-angles of the Souriau map W = U U^T. Intervals where an angle moves by
/// a quarter turn or more are bisected (RK4 through the generator when present,
/// polar-geodesic interpolation otherwise).
int cz_index(const SymplecticPath& path, const CzOptions& opts = {});

/// Eigen-angles of W for the graph of psi relative to the diagonal, in (-pi, pi].
Eigen::VectorXd souriau_angles(const Mat& psi);

/// Midpoint of a and b along the geodesic of the polar decomposition.
Mat polar_midpoint(const Mat& a, const Mat& b);

}  // namespace floer
