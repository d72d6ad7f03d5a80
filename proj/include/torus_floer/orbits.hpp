#pragma once

#include <optional>
#include <string>
#include <vector>

#include "torus_floer/conley_zehnder.hpp"
#include "torus_floer/hamiltonian.hpp"
#include "torus_floer/loopspace.hpp"

namespace floer {

struct PeriodicOrbit {
  int id = -1;
  /// Lifted samples x(i/M), i = 0..M-1, as columns.
  Mat samples;
  double action = 0.0;
  SymplecticPath monodromy;
  int cz = 0;
  double nondeg_margin = 0.0;
  std::optional<int> rel_index;
  double fixed_point_residual = 0.0;

  int n() const { return static_cast<int>(samples.rows() / 2); }
  /// x(0) reduced to [0,1)^{2n}.
  Vec point() const { return reduce_mod1(samples.col(0)); }
  /// Discrete Fourier projection of the samples onto |k| <= N.
  FourierLoop as_loop(int N) const;
  /// Mode vector of as_loop(N) with the base lifted next to `anchor`.
  Vec modes_near(int N, const Vec& anchor) const;
  /// H^{1/2} norm of the sampled modes with |k| > N.
  double tail_norm(int N) const;
  bool is_constant(double tol = 1e-12) const;
};

struct OrbitOptions {
  int seed_grid = 8;
  double tol_orbit = 1e-10;
  double tol_deg = 1e-6;
  double tol_symp = kDefaultTolSymp;
  int steps = 512;
  int samples = 64;
  int max_newton = 40;
  int threads = 1;
};

/// Newton on p -> phi^1(p) - p from a uniform seed grid, then dedup mod Z^{2n},
/// nondegeneracy check, CZ indices and actions. Sorted by action descending.
std::vector<PeriodicOrbit> find_orbits(const TrigHamiltonian& h, const OrbitOptions& opts = {});

/// Single Newton solve from `seed`; returns the lifted fixed point on success.
std::optional<Vec> newton_orbit(const TrigHamiltonian& h, const Vec& seed, const OrbitOptions& opts);

/// Builds the orbit record through a converged point (samples, monodromy, action).
PeriodicOrbit make_orbit(const TrigHamiltonian& h, const Vec& p, const OrbitOptions& opts);

/// (1/2) int w0(x', x) dt + int H(t, x) dt from uniform lifted samples.
double action_of(const TrigHamiltonian& h, const Mat& samples);
double action_of(const TrigHamiltonian& h, const PeriodicOrbit& orbit);

int cz_of(PeriodicOrbit& orbit, double tol_deg = 1e-6);

/// Spectral derivative of uniform periodic samples (2n x M).
Mat spectral_derivative(const Mat& samples);

std::string orbit_to_json(const PeriodicOrbit& orbit, bool full);

}  // namespace floer
