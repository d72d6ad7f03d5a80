#include "torus_floer/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "torus_floer/errors.hpp"
#include "torus_floer/log.hpp"
#include "torus_floer/parallel.hpp"

namespace floer {

namespace {

int full_cutoff(int samples) { return (samples - 1) / 2; }

Vec sample_modes(const Mat& samples) {
  const int n = static_cast<int>(samples.rows() / 2);
  const int m = static_cast<int>(samples.cols());
  const ModeTransform tr(GalerkinSpace{n, full_cutoff(m)}, m);
  return tr.analyze(samples);
}

}  // namespace

FourierLoop PeriodicOrbit::as_loop(int N) const {
  const int m = static_cast<int>(samples.cols());
  if (m <= 2 * N) throw Error(ErrorKind::Dimension, "orbits", "too few orbit samples for N");
  const ModeTransform tr(GalerkinSpace{n(), N}, m);
  return FourierLoop::from_vector(tr.space(), tr.analyze(samples));
}

Vec PeriodicOrbit::modes_near(int N, const Vec& anchor) const {
  return as_loop(N).to_vector_near(anchor);
}

double PeriodicOrbit::tail_norm(int N) const {
  const int m = static_cast<int>(samples.cols());
  const GalerkinSpace full{n(), full_cutoff(m)};
  const Vec modes = sample_modes(samples);
  double acc = 0.0;
  for (int k = N + 1; k <= full.N; ++k) {
    acc += full.weight(k) * (modes.segment(full.offset(k), full.dim()).squaredNorm() +
                             modes.segment(full.offset(-k), full.dim()).squaredNorm());
  }
  return std::sqrt(acc);
}

bool PeriodicOrbit::is_constant(double tol) const {
  for (Eigen::Index i = 1; i < samples.cols(); ++i)
    if ((samples.col(i) - samples.col(0)).norm() > tol) return false;
  return true;
}

Mat spectral_derivative(const Mat& samples) {
  const int n = static_cast<int>(samples.rows() / 2);
  const int m = static_cast<int>(samples.cols());
  const GalerkinSpace space{n, full_cutoff(m)};
  const ModeTransform tr(space, m);
  Vec modes = tr.analyze(samples);
  for (int k = -space.N; k <= space.N; ++k) {
    auto blk = modes.segment(space.offset(k), space.dim());
    const Vec v = blk;
    blk = kTwoPi * k * apply_j(v);
  }
  return tr.synthesize(modes);
}

double action_of(const TrigHamiltonian& h, const Mat& samples) {
  const int m = static_cast<int>(samples.cols());
  const Mat dx = spectral_derivative(samples);
  double symp = 0.0, ham = 0.0;
  for (int i = 0; i < m; ++i) {
    const Vec x = samples.col(i);
    symp += apply_j(dx.col(i)).dot(x);
    ham += h.value(static_cast<double>(i) / m, x);
  }
  return 0.5 * symp / m + ham / m;
}

double action_of(const TrigHamiltonian& h, const PeriodicOrbit& orbit) {
  return action_of(h, orbit.samples);
}

int cz_of(PeriodicOrbit& orbit, double tol_deg) {
  orbit.cz = cz_index(orbit.monodromy, CzOptions{tol_deg, 12});
  return orbit.cz;
}

std::optional<Vec> newton_orbit(const TrigHamiltonian& h, const Vec& seed,
                                const OrbitOptions& opts) {
  const int d = 2 * h.n();
  Vec p = seed;
  int polish = 0;
  for (int it = 0; it < opts.max_newton; ++it) {
    const auto [phi, dphi] = flow_map(h, p, opts.steps);
    const Vec f = phi - p;
    const bool converged = f.norm() <= opts.tol_orbit;
    if (converged && polish >= 2) return p;
    const Mat jac = dphi - Mat::Identity(d, d);
    Eigen::FullPivLU<Mat> lu(jac);
    if (!lu.isInvertible()) return converged ? std::optional<Vec>(p) : std::nullopt;
    Vec step = -lu.solve(f);
    const double len = step.norm();
    if (len > 0.1) step *= 0.1 / len;
    p += step;
    if (converged) ++polish;
  }
  const auto [phi, dphi] = flow_map(h, p, opts.steps);
  if ((phi - p).norm() <= opts.tol_orbit) return p;
  return std::nullopt;
}

PeriodicOrbit make_orbit(const TrigHamiltonian& h, const Vec& p, const OrbitOptions& opts) {
  if (opts.steps % opts.samples != 0)
    throw Error(ErrorKind::Dimension, "orbits", "integration steps must be a multiple of samples");
  PeriodicOrbit orb;
  const auto traj = flow_samples(h, p, opts.steps);
  const int stride = opts.steps / opts.samples;
  orb.samples.resize(2 * h.n(), opts.samples);
  for (int i = 0; i < opts.samples; ++i) orb.samples.col(i) = traj[i * stride];
  orb.fixed_point_residual = (traj.back() - p).norm();
  orb.monodromy = monodromy(h, orb.samples, opts.steps, opts.tol_symp);
  const int d = 2 * h.n();
  orb.nondeg_margin = std::abs((Mat::Identity(d, d) - orb.monodromy.end()).determinant());
  orb.action = action_of(h, orb.samples);
  return orb;
}

std::vector<PeriodicOrbit> find_orbits(const TrigHamiltonian& h, const OrbitOptions& opts) {
  const int d = 2 * h.n();
  const int g = opts.seed_grid;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(g);

  std::vector<std::optional<Vec>> found(total);
  parallel_for(total, opts.threads, [&](std::size_t idx) {
    Vec seed(d);
    std::size_t r = idx;
    for (int i = 0; i < d; ++i) {
      seed[i] = static_cast<double>(r % g) / g;
      r /= g;
    }
    found[idx] = newton_orbit(h, seed, opts);
    if (!found[idx]) {
      std::ostringstream os;
      os << "orbits: Newton did not converge from seed " << seed.transpose();
      log_note(os.str());
    }
  });

  std::vector<Vec> points;
  for (const auto& f : found) {
    if (!f) continue;
    const Vec p = reduce_mod1(*f);
    bool dup = false;
    for (const auto& q : points)
      if (torus_distance(p, q) <= 10.0 * opts.tol_orbit) dup = true;
    if (!dup) points.push_back(p);
  }

  std::vector<PeriodicOrbit> orbits(points.size());
  parallel_for(points.size(), opts.threads, [&](std::size_t i) {
    const auto [phi, dphi] = flow_map(h, points[i], opts.steps);
    const double margin = std::abs((Mat::Identity(d, d) - dphi).determinant());
    if (margin <= opts.tol_deg) {
      std::ostringstream os;
      os << "degenerate orbit through " << points[i].transpose()
         << ": |det(I - Dphi)| = " << margin;
      throw Error(ErrorKind::Degenerate, "orbits", os.str());
    }
    orbits[i] = make_orbit(h, points[i], opts);
    cz_of(orbits[i], opts.tol_deg);
  });

  // Actions equal to 1e-10 count as ties and are ordered by base point.
  std::sort(orbits.begin(), orbits.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
    const double ka = std::round(a.action * 1e10), kb = std::round(b.action * 1e10);
    if (ka != kb) return ka > kb;
    const Vec pa = a.point(), pb = b.point();
    return std::lexicographical_compare(pa.data(), pa.data() + pa.size(), pb.data(),
                                        pb.data() + pb.size());
  });
  for (std::size_t i = 0; i < orbits.size(); ++i) orbits[i].id = static_cast<int>(i);
  return orbits;
}

std::string orbit_to_json(const PeriodicOrbit& o, bool full) {
  std::ostringstream os;
  os << "{\"id\":" << o.id << ",\"point\":[";
  const Vec p = o.point();
  for (Eigen::Index i = 0; i < p.size(); ++i) os << (i ? "," : "") << format_real(p[i]);
  os << "],\"action\":" << format_real(o.action) << ",\"cz\":" << o.cz << ",\"rel_index\":";
  if (o.rel_index)
    os << *o.rel_index;
  else
    os << "null";
  os << ",\"nondeg_margin\":" << format_real(o.nondeg_margin)
     << ",\"fixed_point_residual\":" << format_real(o.fixed_point_residual)
     << ",\"constant\":" << (o.is_constant(1e-9) ? "true" : "false");
  if (full) {
    os << ",\"samples\":[";
    for (Eigen::Index j = 0; j < o.samples.cols(); ++j) {
      os << (j ? "," : "") << '[';
      for (Eigen::Index i = 0; i < o.samples.rows(); ++i)
        os << (i ? "," : "") << format_real(o.samples(i, j));
      os << ']';
    }
    os << ']';
  }
  os << '}';
  return os.str();
}

}  // namespace floer
