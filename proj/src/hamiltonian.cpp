#include "torus_floer/hamiltonian.hpp"

#include <cmath>
#include <sstream>

#include "torus_floer/errors.hpp"

namespace floer {

namespace {

double phase(const TrigTerm& term, const Vec& x) {
  double s = term.phi;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += kTwoPi * term.m[i] * x[i];
  return s;
}

double time_factor(const TrigTerm& term, double t) {
  return term.l == 0 ? std::cos(term.psi) : std::cos(kTwoPi * term.l * t + term.psi);
}

Eigen::VectorXd frequency(const TrigTerm& term) {
  Vec m(term.m.size());
  for (std::size_t i = 0; i < term.m.size(); ++i) m[i] = term.m[i];
  return m;
}

}  // namespace

TrigHamiltonian::TrigHamiltonian(int n, std::vector<TrigTerm> terms)
    : n_(n), terms_(std::move(terms)) {
  if (n < 1) throw Error(ErrorKind::Dimension, "hamiltonian", "n must be positive");
  for (const auto& t : terms_) {
    if (static_cast<int>(t.m.size()) != 2 * n)
      throw Error(ErrorKind::Dimension, "hamiltonian", "term frequency must have 2n entries");
    if (!std::isfinite(t.a) || !std::isfinite(t.phi) || !std::isfinite(t.psi))
      throw Error(ErrorKind::Dimension, "hamiltonian", "term parameters must be finite");
  }
}

bool TrigHamiltonian::autonomous() const {
  for (const auto& t : terms_)
    if (t.l != 0) return false;
  return true;
}

double TrigHamiltonian::value(double t, const Vec& x) const {
  double h = 0.0;
  for (const auto& term : terms_) h += term.a * std::cos(phase(term, x)) * time_factor(term, t);
  return h;
}

Vec TrigHamiltonian::gradient(double t, const Vec& x) const {
  Vec g = Vec::Zero(2 * n_);
  for (const auto& term : terms_) {
    const double c = -term.a * kTwoPi * std::sin(phase(term, x)) * time_factor(term, t);
    g += c * frequency(term);
  }
  return g;
}

Mat TrigHamiltonian::hessian(double t, const Vec& x) const {
  Mat hs = Mat::Zero(2 * n_, 2 * n_);
  for (const auto& term : terms_) {
    const double c = -term.a * kTwoPi * kTwoPi * std::cos(phase(term, x)) * time_factor(term, t);
    const Vec m = frequency(term);
    hs += c * m * m.transpose();
  }
  return hs;
}

TrigHamiltonian TrigHamiltonian::autonomous_part() const {
  std::vector<TrigTerm> out;
  for (const auto& t : terms_)
    if (t.l == 0) out.push_back(t);
  return TrigHamiltonian(n_, out);
}

TrigHamiltonian TrigHamiltonian::time_dependent_part() const {
  std::vector<TrigTerm> out;
  for (const auto& t : terms_)
    if (t.l != 0) out.push_back(t);
  return TrigHamiltonian(n_, out);
}

TrigHamiltonian TrigHamiltonian::homotopy(double tau) const {
  std::vector<TrigTerm> out;
  for (auto t : terms_) {
    if (t.l != 0) t.a *= tau;
    out.push_back(t);
  }
  return TrigHamiltonian(n_, out);
}

double eval_h(const TrigHamiltonian& h, double t, const Vec& x) { return h.value(t, x); }
Vec grad_h(const TrigHamiltonian& h, double t, const Vec& x) { return h.gradient(t, x); }
Mat hess_h(const TrigHamiltonian& h, double t, const Vec& x) { return h.hessian(t, x); }
Vec vector_field_xh(const TrigHamiltonian& h, double t, const Vec& x) {
  return apply_j(h.gradient(t, x));
}

double SymplecticPath::symplecticity_defect() const {
  const Mat j = standard_j(n);
  double worst = 0.0;
  for (const auto& m : mats) worst = std::max(worst, (m.transpose() * j * m - j).norm());
  return worst;
}

Mat propagate(const std::function<Mat(double)>& generator, int n, const Mat& psi0, double t0,
              double t1, int steps) {
  const Mat j = standard_j(n);
  const double dt = (t1 - t0) / steps;
  Mat psi = psi0;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * dt;
    const Mat a0 = j * generator(t);
    const Mat ah = j * generator(t + 0.5 * dt);
    const Mat a1 = j * generator(t + dt);
    const Mat k1 = a0 * psi;
    const Mat k2 = ah * (psi + 0.5 * dt * k1);
    const Mat k3 = ah * (psi + 0.5 * dt * k2);
    const Mat k4 = a1 * (psi + dt * k3);
    psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return psi;
}

SymplecticPath constant_generator_path(const Mat& s, int samples) {
  SymplecticPath path;
  path.n = static_cast<int>(s.rows() / 2);
  path.generator = [s](double) { return s; };
  const Mat a = standard_j(path.n) * s;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    path.times.push_back(t);
    // exp(A t) by scaling and squaring through Eigen's Pade-free route: use the
    // eigen-free series on a small argument and square up.
    Mat x = a * t;
    int squarings = 0;
    double nrm = x.norm();
    while (nrm > 0.25) {
      x /= 2.0;
      nrm /= 2.0;
      ++squarings;
    }
    Mat term = Mat::Identity(a.rows(), a.cols());
    Mat e = term;
    for (int q = 1; q <= 18; ++q) {
      term = term * x / q;
      e += term;
    }
    for (int q = 0; q < squarings; ++q) e = e * e;
    path.mats.push_back(e);
  }
  return path;
}

namespace {

struct FlowState {
  Vec x;
  Mat psi;
};

FlowState rk4_step(const TrigHamiltonian& h, const FlowState& s, double t, double dt,
                   const Mat& j) {
  auto f = [&](double tt, const Vec& x, const Mat& psi) {
    return std::make_pair(Vec(apply_j(h.gradient(tt, x))), Mat(j * h.hessian(tt, x) * psi));
  };
  const auto [kx1, kp1] = f(t, s.x, s.psi);
  const auto [kx2, kp2] = f(t + 0.5 * dt, s.x + 0.5 * dt * kx1, s.psi + 0.5 * dt * kp1);
  const auto [kx3, kp3] = f(t + 0.5 * dt, s.x + 0.5 * dt * kx2, s.psi + 0.5 * dt * kp2);
  const auto [kx4, kp4] = f(t + dt, s.x + dt * kx3, s.psi + dt * kp3);
  return {s.x + dt / 6.0 * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4),
          s.psi + dt / 6.0 * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4)};
}

}  // namespace

std::pair<Vec, Mat> flow_map(const TrigHamiltonian& h, const Vec& p, int steps) {
  if (steps < 16) throw Error(ErrorKind::Dimension, "hamiltonian", "flow_map needs steps >= 16");
  const Mat j = standard_j(h.n());
  FlowState s{p, Mat::Identity(2 * h.n(), 2 * h.n())};
  const double dt = 1.0 / steps;
  for (int i = 0; i < steps; ++i) s = rk4_step(h, s, i * dt, dt, j);
  return {s.x, s.psi};
}

std::vector<Vec> flow_samples(const TrigHamiltonian& h, const Vec& p, int steps) {
  const Mat j = standard_j(h.n());
  FlowState s{p, Mat::Identity(2 * h.n(), 2 * h.n())};
  const double dt = 1.0 / steps;
  std::vector<Vec> out{p};
  for (int i = 0; i < steps; ++i) {
    // Only x is needed here; reuse the joint stepper for identical rounding.
    s = rk4_step(h, s, i * dt, dt, j);
    out.push_back(s.x);
  }
  return out;
}

std::function<Vec(double)> trig_interpolant(const Mat& samples) {
  const int d = static_cast<int>(samples.rows());
  const int m = static_cast<int>(samples.cols());
  const int kmax = (m - 1) / 2;
  // Real Fourier coefficients of each component.
  Mat a = Mat::Zero(d, kmax + 1), b = Mat::Zero(d, kmax + 1);
  for (int k = 0; k <= kmax; ++k) {
    for (int i = 0; i < m; ++i) {
      const double th = kTwoPi * k * i / m;
      a.col(k) += samples.col(i) * std::cos(th);
      b.col(k) += samples.col(i) * std::sin(th);
    }
  }
  a /= m;
  b /= m;
  return [a, b, kmax](double t) {
    Vec x = a.col(0);
    for (int k = 1; k <= kmax; ++k) {
      const double th = kTwoPi * k * t;
      x += 2.0 * (a.col(k) * std::cos(th) + b.col(k) * std::sin(th));
    }
    return x;
  };
}

SymplecticPath monodromy(const TrigHamiltonian& h, const Mat& orbit_samples, int steps,
                         double tol_symp) {
  const int n = h.n();
  auto x_of_t = trig_interpolant(orbit_samples);
  SymplecticPath path;
  path.n = n;
  path.generator = [h, x_of_t](double t) { return h.hessian(t, x_of_t(t)); };
  Mat psi = Mat::Identity(2 * n, 2 * n);
  path.times.push_back(0.0);
  path.mats.push_back(psi);
  const double dt = 1.0 / steps;
  for (int i = 0; i < steps; ++i) {
    psi = propagate(path.generator, n, psi, i * dt, (i + 1) * dt, 1);
    path.times.push_back((i + 1) * dt);
    path.mats.push_back(psi);
  }
  const double defect = path.symplecticity_defect();
  if (defect > tol_symp) {
    std::ostringstream os;
    os << "monodromy symplecticity defect " << defect << " exceeds tol_symp " << tol_symp;
    throw Error(ErrorKind::IntegrationQuality, "hamiltonian", os.str());
  }
  return path;
}

}  // namespace floer
