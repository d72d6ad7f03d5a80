#pragma once

// Run configuration and the staged pipeline behind the floer_lab tool.
//
// Config grammar, one entry per line:
//
//   # comment (also allowed after a value)
//   key = value
//   term = a=<real> m=<int>,<int>,... [phi=<real>] [l=<int>] [psi=<real>]
//
// Each term line adds a * cos(2 pi m.x + phi) * cos(2 pi l t + psi) to H; m has
// 2n entries. Unknown keys, repeated scalar keys and malformed values are
// configuration errors.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "torus_floer/floer_solver.hpp"
#include "torus_floer/hybrid_iso.hpp"

namespace floer {

struct RunConfig {
  std::string name = "run";
  int n = 1;
  int N = 4;
  /// Grid intervals on [-L, L].
  int M_s = 256;
  /// 0 selects the defaults (12 / delta_est, and L for L_m).
  double L = 0.0;
  double L_m = 0.0;
  double tol_orbit = 1e-10;
  double tol_deg = 1e-6;
  double tol_floer = 1e-8;
  double tol_match = 1e-6;
  double tol_conv = 1e-6;
  double tol_spec = 1e-8;
  double tol_symp = 1e-6;
  double sigma_tol = 1e-6;
  double tol_dedup = 1e-4;
  std::uint64_t seed = 1;
  /// "off", "auto" or "on" (with perturbation_magnitude).
  std::string perturbation = "auto";
  double perturbation_magnitude = 1e-3;
  int multistart = 32;
  int threads = 1;
  std::string out = "out";
  std::vector<TrigTerm> terms;

  TrigHamiltonian hamiltonian() const { return TrigHamiltonian(n, terms); }
  GalerkinSpace space() const { return {n, N}; }
  EngineOptions engine_options() const;
  OrbitOptions orbit_options() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct CheckResult {
  int criterion = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

class Pipeline {
 public:
  explicit Pipeline(RunConfig cfg, bool full = false);

  const RunConfig& config() const { return cfg_; }

  // Each stage runs its prerequisites first and writes its artifact.
  void orbits();
  void cz();
  void morse();
  void floer();
  void hybrid();
  void homology();
  /// Checks that do not depend on H: CZ oracle, derivative checks, Fredholm
  /// sweep, integration by parts, trace inequality.
  void independent_checks();
  /// Every stage and check, then the summary.
  void verify_all();
  /// summary.txt and summary.json from the checks collected so far.
  void write_summary() const;

  const std::vector<PeriodicOrbit>& orbit_list() const { return orbits_; }
  const ConnectionEngine& engine() const { return *engine_; }
  const BoundaryResult& morse_result() const { return *morse_; }
  const BoundaryResult& floer_result() const { return *floer_; }
  const PhiResult& phi_result() const { return *phi_; }
  const std::vector<CheckResult>& checks() const { return checks_; }
  bool all_pass() const;
  /// Artifact paths written so far, relative to the output directory.
  const std::vector<std::string>& artifacts() const { return artifacts_; }

 private:
  void write(const std::string& file, const std::string& text);
  void add_check(int criterion, const std::string& name, bool pass, const std::string& detail);
  void ensure_engine();

  RunConfig cfg_;
  bool full_;
  TrigHamiltonian h_;
  bool have_orbits_ = false;
  bool have_cz_ = false;
  bool have_homology_ = false;
  bool have_independent_ = false;
  std::vector<PeriodicOrbit> orbits_;
  std::optional<ConnectionEngine> engine_;
  std::optional<BoundaryResult> morse_;
  std::optional<BoundaryResult> floer_;
  std::optional<PhiResult> phi_;
  std::vector<CheckResult> checks_;
  std::vector<std::string> artifacts_;
};

/// FNV-1a digest of the named artifact files, in order.
std::string artifact_digest(const std::string& dir, const std::vector<std::string>& files);

/// Betti numbers of T^{2n}: binom(2n, k).
int torus_betti(int n, int k);

}  // namespace floer
