#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "torus_floer/chain_algebra.hpp"
#include "torus_floer/critical.hpp"

namespace floer {

struct MorseTrajectory {
  std::vector<double> times;
  /// Mode vectors along the flow (lifted).
  std::vector<Vec> samples;
  /// Index into the critical list of the limit, -1 if none was reached.
  int end_id = -1;
  Vec end_lattice;
  double flow_time = 0.0;
  bool converged = false;

  std::vector<double> actions(const ActionContext& ctx) const;
};

struct FlowOptions {
  double r_conv = 1e-2;
  double tol_conv = 1e-6;
  double horizon = 200.0;
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = 0.5;
  /// Integrate only the constant-mode block (invariant for autonomous H and K).
  bool constant_block = false;
};

/// Adaptive Dormand-Prince integration of x' = -grad A(x) + K(x). Stops at the
/// horizon or when x is within r_conv of a lift of a critical point with
/// |grad A| < tol_conv. Step-size underflow raises a stiffness error.
MorseTrajectory integrate_flow(const ActionContext& ctx, const CompactPerturbation* k,
                               const Vec& start, const std::vector<CriticalPoint>& crit,
                               const FlowOptions& opts);

struct MorseOptions {
  FlowOptions flow;
  double r_launch = 1e-3;
  int circle_mesh = 64;
  int max_refinements = 10;
  double tol_spec = 1e-8;
  int threads = 1;
};

/// One connected component of W^u(x) cap W^s(y), seen on the launch sphere.
struct Witness {
  int target = -1;
  Vec lattice;
  /// Launch point x + r_launch * direction.
  Vec launch;
  double theta = 0.0;
  MorseTrajectory trajectory;
};

/// Classification of the unstable sphere of one critical point inside the
/// constant-mode block.
struct LaunchCensus {
  int source = -1;
  int d_u = 0;
  int mesh = 0;
  std::vector<Witness> witnesses;
  int count_to(int target) const;
};

/// Every critical point is a constant loop of an autonomous H, so the
/// constant-mode torus is flow-invariant and carries the index-one connections.
bool factorizes(const TrigHamiltonian& h, const std::vector<PeriodicOrbit>& orbits);

/// Number of unstable directions of the flow at c inside the constant block.
int constant_unstable_dim(const ActionContext& ctx, const Vec& c, double tol_spec);

/// Meshes the unstable circle (or point pair) of crit[source], classifies
/// launches by limit, and bisects between different terminal classes. Counts
/// must agree on two consecutive meshes. d_u > 2 raises a resolution error.
LaunchCensus launch_census(const ActionContext& ctx, const CompactPerturbation* k,
                           const std::vector<CriticalPoint>& crit, int source,
                           const MorseOptions& opts);

/// Count of connecting trajectories (Morse, Floer or hybrid) between two generators.
struct ConnectionCount {
  int count = 0;
  int mod2() const { return count & 1; }
  bool completeness_warning = false;
  std::string method;
  std::vector<Witness> witnesses;
  /// Converged boundary value solutions, one node array per segment.
  std::vector<std::vector<Mat>> solutions;
  std::vector<Vec> lattices;
  std::vector<double> energies;
  std::vector<double> action_drops;
  std::vector<double> tail_rates;
};

/// Generators per degree, ordered by increasing action, ties by id.
/// Degree is mu when use_mu, the relative Morse index otherwise.
GradedComplex empty_complex(const std::vector<CriticalPoint>& crit, bool use_mu);

/// Fills boundary[k] from count(x, y) for every pair of degrees k, k-1.
using PairCounter = std::function<ConnectionCount(int x, int y)>;
struct BoundaryResult {
  GradedComplex complex;
  std::map<std::pair<int, int>, ConnectionCount> counts;
};
BoundaryResult assemble_boundary(const std::vector<CriticalPoint>& crit, bool use_mu,
                                 const PairCounter& count);

class ConnectionEngine;

/// rho(x, y) for crit indices x, y with relative indices differing by one.
ConnectionCount count_connections(const ConnectionEngine& engine, int x, int y);

BoundaryResult morse_boundary(const ConnectionEngine& engine);

/// CSV rows "flow_time,action,q1..p_n" for a witness.
std::string witness_csv(const ActionContext& ctx, const Witness& w);

}  // namespace floer
