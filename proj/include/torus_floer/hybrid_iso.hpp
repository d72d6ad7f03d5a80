#pragma once

#include <map>
#include <optional>
#include <string>

#include "torus_floer/chain_algebra.hpp"
#include "torus_floer/connections.hpp"

namespace floer {

/// Morse half-trajectory on [-L_m, 0] leaving x, matched at s = 0 to a Floer
/// half-cylinder on [0, L] converging to y.
struct HybridSolution {
  int x = -1;
  int y = -1;
  Vec lattice;
  Mat morse_part;
  Mat floer_part;
  double L_m = 0.0;
  double L = 0.0;
  double matching_defect = 0.0;
  double residual = 0.0;
  /// Floer energy of the half-cylinder and A(u(0)) - A(y).
  double energy = 0.0;
  double action_drop = 0.0;
  double action_u0 = 0.0;
};

/// Collocation problem for x -> y_lifted. Square exactly when m(x) = mu(y).
BvpProblem hybrid_problem(std::shared_ptr<const ActionContext> ctx,
                          std::shared_ptr<const CompactPerturbation> k, const Vec& x,
                          const Vec& y_lifted, double L_m, int intervals_m, double L,
                          int intervals_f, double tol_spec);

/// Newton from a guess given as (Morse nodes, Floer nodes). `coarse` loosens
/// the tolerance for screening solves.
std::optional<HybridSolution> solve_hybrid(const ConnectionEngine& engine, int x, int y,
                                           const Vec& lattice, const Mat& morse_guess,
                                           const Mat& floer_guess, bool coarse = false);

/// Constant hybrid solution at x on a coarse grid and the smallest singular
/// value of the discretized coupled linearization there.
struct ConstantHybridReport {
  HybridSolution solution;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
};
ConstantHybridReport constant_hybrid(const ConnectionEngine& engine, int x, double L = 3.0,
                                     int intervals = 24);

/// upsilon(x, y) for m(x) = mu(y).
ConnectionCount count_hybrid(const ConnectionEngine& engine, int x, int y);

struct PhiResult {
  /// phi[k]: rows Floer generators of degree k, columns Morse generators of degree k.
  std::map<int, GF2Matrix> phi;
  std::map<std::pair<int, int>, ConnectionCount> counts;
};

/// Phi_k(x) = sum upsilon(x, y) y over generators in the action order of `cm` and `cf`.
PhiResult build_phi(const ConnectionEngine& engine, const GradedComplex& cm, const GradedComplex& cf);

struct TriangularReport {
  bool ok = true;
  bool invertible = true;
  std::string message;
};

/// Unit diagonal and zero entries below it in every degree, under action order.
TriangularReport check_triangular(const std::map<int, GF2Matrix>& phi, const GradedComplex& cm,
                                  const GradedComplex& cf);

}  // namespace floer
