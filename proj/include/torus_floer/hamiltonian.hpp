#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "torus_floer/types.hpp"

namespace floer {

/// a * cos(2 pi m.x + phi) * cos(2 pi l t + psi)
struct TrigTerm {
  double a = 0.0;
  std::vector<int> m;
  double phi = 0.0;
  int l = 0;
  double psi = 0.0;
};

/// Finite trigonometric Hamiltonian on S^1 x T^{2n}, 1-periodic in every
/// variable because all frequencies are integers.
class TrigHamiltonian {
 public:
  explicit TrigHamiltonian(int n, std::vector<TrigTerm> terms = {});

  int n() const { return n_; }
  const std::vector<TrigTerm>& terms() const { return terms_; }
  bool autonomous() const;

  double value(double t, const Vec& x) const;
  Vec gradient(double t, const Vec& x) const;
  Mat hessian(double t, const Vec& x) const;

  /// Terms with l = 0, and the remaining t-dependent terms.
  TrigHamiltonian autonomous_part() const;
  TrigHamiltonian time_dependent_part() const;
  /// autonomous_part + tau * time_dependent_part.
  TrigHamiltonian homotopy(double tau) const;

 private:
  int n_;
  std::vector<TrigTerm> terms_;
};

double eval_h(const TrigHamiltonian& h, double t, const Vec& x);
Vec grad_h(const TrigHamiltonian& h, double t, const Vec& x);
Mat hess_h(const TrigHamiltonian& h, double t, const Vec& x);
/// X_H = J0 grad H.
Vec vector_field_xh(const TrigHamiltonian& h, double t, const Vec& x);

/// Samples Psi(t_i) of a path in Sp(2n) on a uniform grid over [0,1].
struct SymplecticPath {
  int n = 1;
  std::vector<double> times;
  std::vector<Mat> mats;
  /// Generator S(t) with Psi' = J0 S Psi, when known. Used to refine the path.
  std::function<Mat(double)> generator;

  const Mat& end() const { return mats.back(); }
  /// max_i |Psi_i^T J0 Psi_i - J0|.
  double symplecticity_defect() const;
};

/// RK4 propagation of Psi' = J0 S(t) Psi from t0 to t1 in `steps` steps.
Mat propagate(const std::function<Mat(double)>& generator, int n, const Mat& psi0, double t0,
              double t1, int steps);

/// Path t -> exp(J0 S t) for a constant symmetric S, sampled at `samples`+1 points.
SymplecticPath constant_generator_path(const Mat& s, int samples = 256);

/// Time-1 map of X_H and its linearization, by fixed-step RK4 on the lift.
std::pair<Vec, Mat> flow_map(const TrigHamiltonian& h, const Vec& p, int steps);

/// Lifted trajectory x(t_i) at steps+1 grid points, same integrator as flow_map.
std::vector<Vec> flow_samples(const TrigHamiltonian& h, const Vec& p, int steps);

constexpr double kDefaultTolSymp = 1e-6;

/// Linearized flow Psi' = J0 Hess H(t, x(t)) Psi along a periodic orbit given by
/// uniform lifted samples (2n x M, column i at t = i/M). x(t) between samples is
/// the trigonometric interpolant. Throws IntegrationQuality when the path's
/// symplecticity defect exceeds tol_symp.
SymplecticPath monodromy(const TrigHamiltonian& h, const Mat& orbit_samples, int steps = 512,
                         double tol_symp = kDefaultTolSymp);

/// Trigonometric interpolant of uniform periodic samples (2n x M).
std::function<Vec(double)> trig_interpolant(const Mat& samples);

}  // namespace floer
