#pragma once

// Shared machinery for counting connecting trajectories by collocation: the
// boundary value problem on [-L, L], planar seeds, tau-continuation from the
// autonomous part of H, and seeded multistart.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "torus_floer/bvp.hpp"
#include "torus_floer/critical.hpp"
#include "torus_floer/morse_complex.hpp"

namespace floer {

enum class FlowKind { Morse, Floer };

struct EngineOptions {
  MorseOptions morse;
  /// "off", "auto" (switch on after an undecided census) or "on".
  std::string perturbation = "auto";
  double perturbation_magnitude = 1e-3;
  /// Half-length of the s-interval; 0 selects 12 / delta_est.
  double L = 0.0;
  /// Morse half-line length for hybrid problems; 0 selects L.
  double L_m = 0.0;
  /// Grid intervals on [-L, L].
  int intervals = 256;
  double tol_floer = 1e-8;
  double tol_match = 1e-6;
  double tol_dedup = 1e-4;
  int multistart = 32;
  int continuation_steps = 4;
  int max_newton = 30;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// A planar connecting line x -> y + lattice inside the constant block.
struct Seed {
  Vec lattice;
  std::vector<double> times;
  /// Lifted base points (2n), relative to the base of x.
  std::vector<Vec> points;
};

/// Converged connection on a single segment [-L, L].
struct Connection {
  Mat nodes;
  Vec lattice;
  double residual = 0.0;
  double energy = 0.0;
  double action_drop = 0.0;
  double tail_rate = 0.0;
  bool from_seed = false;
};

/// Boundary value problem for a connection x -> y_lifted with the action of the
/// middle node pinned to the mean of the end actions.
BvpProblem connection_problem(FlowKind kind, std::shared_ptr<const ActionContext> ctx,
                              std::shared_ptr<const CompactPerturbation> k, const Vec& x,
                              const Vec& y_lifted, double L, int intervals, double tol_spec);

/// Newton solve plus end proximity check. Empty when Newton fails.
std::optional<Mat> solve_connection(const BvpProblem& p, const Mat& guess, const Vec& x,
                                    const Vec& y_lifted, const NewtonOptions& opts);

/// Linear resampling of node columns onto a uniform grid with `intervals` intervals.
Mat resample_nodes(const Mat& nodes, int intervals);

/// Planar seed resampled onto the grid of [-L, L] with the middle node at the
/// mean action.
Mat guess_from_seed(const ActionContext& ctx, const Seed& seed, const Vec& x,
                    const Vec& y_lifted, double L, int intervals);

class ConnectionEngine {
 public:
  ConnectionEngine(const TrigHamiltonian& h, GalerkinSpace space,
                   std::vector<PeriodicOrbit> orbits, EngineOptions opts);

  const EngineOptions& options() const { return opts_; }
  const TrigHamiltonian& hamiltonian() const { return h_; }
  const GalerkinSpace& space() const { return space_; }
  std::shared_ptr<const ActionContext> context() const { return ctx_; }
  const std::vector<PeriodicOrbit>& orbits() const { return orbits_; }
  const std::vector<CriticalPoint>& critical() const { return crit_; }
  bool factorized() const { return factorized_; }
  double delta_est() const { return delta_; }
  double half_length() const { return L_; }
  double morse_length() const { return opts_.L_m > 0 ? opts_.L_m : L_; }

  std::shared_ptr<const CompactPerturbation> perturbation() const;
  bool perturbed() const;
  /// Switches the seeded perturbation on and drops cached censuses.
  void enable_perturbation() const;

  /// Cached launch census of crit[source] (factorized H only).
  const LaunchCensus& census(int source) const;

  /// Planar lines from x to y: of H itself when it factorizes, otherwise of its
  /// autonomous part between the critical points continued from x and y.
  std::vector<Seed> seeds(int x, int y) const;

  ConnectionCount count(FlowKind kind, int x, int y) const;

  /// Critical point of H_tau continued from crit0 of the autonomous part.
  Vec continue_critical(const Vec& c0, double tau0, const Vec& guess, double tau1) const;

  /// Per-generator Newton options for the final solves.
  NewtonOptions newton() const;

 private:
  std::vector<Connection> solve_family(FlowKind kind, int x, int y, const Seed& seed) const;
  std::optional<Connection> finish(FlowKind kind, int x, int y, const Mat& nodes,
                                   bool from_seed) const;
  void build_autonomous();

  TrigHamiltonian h_;
  GalerkinSpace space_;
  std::vector<PeriodicOrbit> orbits_;
  EngineOptions opts_;
  std::shared_ptr<ActionContext> ctx_;
  std::vector<CriticalPoint> crit_;
  bool factorized_ = false;
  double delta_ = 0.0;
  double L_ = 0.0;

  // Autonomous part, used for seeds when H depends on t.
  std::shared_ptr<ActionContext> ctx0_;
  std::vector<CriticalPoint> crit0_;
  /// crit0_ index for each crit_ index (-1 when unmatched).
  std::vector<int> to0_;
  /// Lattice shift taking the continued crit0_ point onto crit_.
  std::vector<Vec> shift0_;

  mutable std::mutex mu_;
  mutable std::shared_ptr<CompactPerturbation> k_;
  mutable std::map<int, LaunchCensus> census_;
  mutable std::map<int, LaunchCensus> census0_;
};

/// Energy of a node array for the given flow: (1/2) int |u'|^2 + |X(u)|^2 with
/// fourth-order differences and Gregory end-corrected trapezoid weights.
/// The Floer energy uses L^2 norms in t, the Morse energy H^{1/2} norms.
double flow_energy(FlowKind kind, const ActionContext& ctx, const CompactPerturbation* k,
                   const Mat& nodes, double h);

/// Exponential decay rate of |X(u(s))| fitted over the outer quarter at both ends.
double tail_rate(FlowKind kind, const ActionContext& ctx, const CompactPerturbation* k,
                 const Mat& nodes, double h);

/// Vector field of the given flow.
VectorField flow_field(FlowKind kind, std::shared_ptr<const ActionContext> ctx,
                       std::shared_ptr<const CompactPerturbation> k);

/// Stable/unstable splitting of the asymptotic operator of the given flow.
Splitting flow_splitting(FlowKind kind, const ActionContext& ctx, const Vec& c, double tol_spec,
                         const CompactPerturbation* k);

}  // namespace floer
