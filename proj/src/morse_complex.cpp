#include "torus_floer/morse_complex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "torus_floer/connections.hpp"
#include "torus_floer/errors.hpp"
#include "torus_floer/log.hpp"
#include "torus_floer/parallel.hpp"

namespace floer {

std::vector<double> MorseTrajectory::actions(const ActionContext& ctx) const {
  std::vector<double> a;
  a.reserve(samples.size());
  for (const auto& x : samples) a.push_back(ctx.action(x));
  return a;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct FlowSystem {
  const ActionContext& ctx;
  const CompactPerturbation* k;
  bool planar;
  int off;
  int dim;

  Vec embed(const Vec& y) const {
    if (!planar) return y;
    Vec x = Vec::Zero(ctx.space().dim_total());
    x.segment(off, dim) = y;
    return x;
  }

  Vec field(const Vec& y) const {
    if (!planar) {
      Vec f = -ctx.gradient(y);
      if (k && k->active()) f += (*k)(ctx, y);
      return f;
    }
    const TrigHamiltonian& h = ctx.hamiltonian();
    Vec g;
    if (h.autonomous()) {
      g = h.gradient(0.0, y);
    } else {
      const ModeTransform& tr = ctx.transform();
      g = Vec::Zero(dim);
      for (int m = 0; m < tr.samples(); ++m) g += h.gradient(tr.time(m), y);
      g /= tr.samples();
    }
    Vec f = -g;
    if (k && k->active()) f += (*k)(ctx, embed(y)).segment(off, dim);
    return f;
  }

  double grad_norm(const Vec& f) const {
    if (planar) return f.norm();
    return std::sqrt(f.dot(f.cwiseProduct(ctx.space().weights())));
  }
};

}  // namespace

MorseTrajectory integrate_flow(const ActionContext& ctx, const CompactPerturbation* k,
                               const Vec& start, const std::vector<CriticalPoint>& crit,
                               const FlowOptions& opts) {
  const GalerkinSpace& sp = ctx.space();
  FlowSystem sys{ctx, k, opts.constant_block, sp.offset(0), sp.dim()};
  if (start.size() != sp.dim_total())
    throw Error(ErrorKind::Dimension, "morse_complex", "start vector does not match the space");
  Vec y = sys.planar ? Vec(start.segment(sys.off, sys.dim)) : start;

  MorseTrajectory tr;
  auto record = [&](double s, const Vec& yy) {
    tr.times.push_back(s);
    tr.samples.push_back(sys.embed(yy));
  };
  auto arrived = [&](const Vec& yy, const Vec& f) -> bool {
    if (sys.grad_norm(f) >= opts.tol_conv) return false;
    const Vec x = sys.embed(yy);
    for (std::size_t i = 0; i < crit.size(); ++i) {
      const Vec lat = lattice_offset(sp, x, crit[i].modes);
      if (lifted_distance(sp, x, shift_base(sp, crit[i].modes, lat)) < opts.r_conv) {
        tr.end_id = static_cast<int>(i);
        tr.end_lattice = lat;
        tr.converged = true;
        return true;
      }
    }
    return false;
  };

  double s = 0.0;
  double h = std::min(1e-2, opts.max_step);
  Vec f1 = sys.field(y);
  record(s, y);
  if (arrived(y, f1)) return tr;

  while (s < opts.horizon) {
    h = std::min(h, opts.horizon - s);
    const Vec k1 = f1;
    const Vec k2 = sys.field(y + h * a21 * k1);
    const Vec k3 = sys.field(y + h * (a31 * k1 + a32 * k2));
    const Vec k4 = sys.field(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = sys.field(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = sys.field(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = sys.field(yn);
    const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(y[i]), std::abs(yn[i]));
      en = std::max(en, std::abs(err[i]) / sc);
    }
    if (en <= 1.0) {
      s += h;
      y = yn;
      f1 = k7;
      record(s, y);
      if (arrived(y, f1)) break;
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h = std::min(h * fac, opts.max_step);
    if (h < 1e-12 * std::max(1.0, s)) {
      std::ostringstream os;
      os << "step size underflow at s = " << s << ", x0 = " << y.transpose();
      throw Error(ErrorKind::Stiffness, "morse_complex", os.str());
    }
  }
  tr.flow_time = s;
  return tr;
}

int LaunchCensus::count_to(int target) const {
  return static_cast<int>(std::count_if(witnesses.begin(), witnesses.end(),
                                        [&](const Witness& w) { return w.target == target; }));
}

bool factorizes(const TrigHamiltonian& h, const std::vector<PeriodicOrbit>& orbits) {
  if (!h.autonomous()) return false;
  return std::all_of(orbits.begin(), orbits.end(), [](const PeriodicOrbit& o) { return o.is_constant(1e-9); });
}

namespace {

struct Label {
  int id = -1;
  Vec lattice;
  bool operator==(const Label& o) const { return id == o.id && lattice == o.lattice; }
};

struct Launch {
  Label label;
  MorseTrajectory traj;
  Vec point;
};

}  // namespace

int constant_unstable_dim(const ActionContext& ctx, const Vec& c, double tol_spec) {
  const GalerkinSpace& sp = ctx.space();
  const Mat block = ctx.vector_field_jacobian(c).block(sp.offset(0), sp.offset(0), sp.dim(), sp.dim());
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (block + block.transpose()), Eigen::EigenvaluesOnly);
  int d = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) d += es.eigenvalues()[i] > tol_spec;
  return d;
}

LaunchCensus launch_census(const ActionContext& ctx, const CompactPerturbation* k,
                           const std::vector<CriticalPoint>& crit, int source,
                           const MorseOptions& opts) {
  const GalerkinSpace& sp = ctx.space();
  const int off = sp.offset(0);
  const CriticalPoint& x = crit.at(source);

  // Constant block of -Hess A at x; K vanishes near x.
  const Mat jac = ctx.vector_field_jacobian(x.modes);
  const Mat block = jac.block(off, off, sp.dim(), sp.dim());
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (block + block.transpose()));
  std::vector<Vec> dirs;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()[i]) <= opts.tol_spec)
      throw Error(ErrorKind::SpectralGap, "morse_complex", "critical point is degenerate in the constant block");
    if (es.eigenvalues()[i] > 0) dirs.push_back(es.eigenvectors().col(i));
  }

  LaunchCensus census;
  census.source = source;
  census.d_u = static_cast<int>(dirs.size());
  if (census.d_u == 0) return census;
  if (census.d_u > 2)
    throw Error(ErrorKind::Resolution, "morse_complex",
                "unstable sphere of dimension > 1 inside the constant block is not meshed");

  FlowOptions fo = opts.flow;
  fo.constant_block = true;
  auto point_at = [&](double theta) {
    Vec d = std::cos(theta) * dirs[0];
    if (dirs.size() > 1) d += std::sin(theta) * dirs[1];
    Vec p = x.modes;
    p.segment(off, sp.dim()) += opts.r_launch * d;
    return p;
  };
  auto launch = [&](double theta) {
    Launch l;
    l.point = point_at(theta);
    l.traj = integrate_flow(ctx, k, l.point, crit, fo);
    if (!l.traj.converged) {
      std::ostringstream os;
      os << "launch from critical point " << x.id << " at angle " << theta
         << " reached the horizon without converging";
      throw Error(ErrorKind::Undecided, "morse_complex", os.str());
    }
    l.label = {l.traj.end_id, l.traj.end_lattice};
    return l;
  };
  auto intermediate = [&](const Label& l) { return crit[l.id].m == x.m - 1; };
  auto make_witness = [&](double theta, const Launch& l) {
    Witness w;
    w.target = l.label.id;
    w.lattice = l.label.lattice;
    w.launch = l.point;
    w.theta = theta;
    w.trajectory = l.traj;
    return w;
  };

  if (census.d_u == 1) {
    census.mesh = 2;
    for (double theta : {0.0, kPi}) {
      const Launch l = launch(theta);
      if (intermediate(l.label)) census.witnesses.push_back(make_witness(theta, l));
    }
    return census;
  }

  // Separatrix between two terminal classes. Bisection on the circle only
  // resolves the separatrix to machine precision at the launch scale, which
  // is not enough when the intermediate point is strongly unstable. Once the
  // bracketing pair separates, bisection restarts on the segment joining
  // their current positions (straddle refinement).
  FlowOptions fine = fo;
  fine.max_step = 0.05;
  auto run_from = [&](const Vec& start) {
    Launch l;
    l.point = start;
    l.traj = integrate_flow(ctx, k, start, crit, fine);
    if (!l.traj.converged)
      throw Error(ErrorKind::Undecided, "morse_complex", "refinement launch reached the horizon");
    l.label = {l.traj.end_id, l.traj.end_lattice};
    return l;
  };
  auto sample_at = [](const MorseTrajectory& tr, double t) -> Vec {
    const auto it = std::upper_bound(tr.times.begin(), tr.times.end(), t);
    if (it == tr.times.begin()) return tr.samples.front();
    if (it == tr.times.end()) return tr.samples.back();
    const std::size_t j = static_cast<std::size_t>(it - tr.times.begin());
    const double a = (t - tr.times[j - 1]) / (tr.times[j] - tr.times[j - 1]);
    return (1.0 - a) * tr.samples[j - 1] + a * tr.samples[j];
  };
  auto bisect = [&](double ta, double tb, const Label& la, const Label& lb) -> std::optional<Witness> {
    const double theta0 = ta;
    Vec A = point_at(ta), B = point_at(tb);
    std::vector<double> path_t;
    std::vector<Vec> path_x;
    double t_off = 0.0;
    bool skip_start = true;
    for (int round = 0; round < 40; ++round) {
      Launch wa, wb;
      double ua = 0.0, ub = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double um = 0.5 * (ua + ub);
        Launch l = run_from((1.0 - um) * A + um * B);
        if (l.label == la) {
          ua = um;
          wa = std::move(l);
        } else if (l.label == lb) {
          ub = um;
          wb = std::move(l);
        } else if (intermediate(l.label)) {
          Witness w = make_witness(theta0, l);
          for (std::size_t i = 0; i < l.traj.samples.size(); ++i) {
            path_t.push_back(t_off + l.traj.times[i]);
            path_x.push_back(l.traj.samples[i]);
          }
          w.trajectory.times = path_t;
          w.trajectory.samples = path_x;
          w.launch = point_at(theta0);
          return w;
        } else {
          return std::nullopt;
        }
      }
      if (wa.traj.samples.empty()) wa = run_from((1.0 - ua) * A + ua * B);
      if (wb.traj.samples.empty()) wb = run_from((1.0 - ub) * A + ub * B);

      // Closest approach of the bracketing trajectory to an intermediate point.
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_i = 0;
      int target = -1;
      Vec target_lat;
      bool left = !skip_start;
      for (std::size_t s = 0; s < wa.traj.samples.size(); ++s) {
        const Vec& pt = wa.traj.samples[s];
        if (!left) {
          left = lifted_distance(sp, pt, x.modes) > opts.flow.r_conv;
          continue;
        }
        for (std::size_t i = 0; i < crit.size(); ++i) {
          if (crit[i].m != x.m - 1) continue;
          const Vec lat = lattice_offset(sp, pt, crit[i].modes);
          const double d = lifted_distance(sp, pt, shift_base(sp, crit[i].modes, lat));
          if (d < best) {
            best = d;
            best_i = s;
            target = static_cast<int>(i);
            target_lat = lat;
          }
        }
      }
      if (best < opts.flow.r_conv) {
        for (std::size_t i = 0; i <= best_i; ++i) {
          path_t.push_back(t_off + wa.traj.times[i]);
          path_x.push_back(wa.traj.samples[i]);
        }
        Witness w;
        w.target = target;
        w.lattice = target_lat;
        w.launch = point_at(theta0);
        w.theta = theta0;
        w.trajectory.times = path_t;
        w.trajectory.samples = path_x;
        w.trajectory.end_id = target;
        w.trajectory.end_lattice = target_lat;
        w.trajectory.flow_time = path_t.back();
        w.trajectory.converged = true;
        return w;
      }
      // Restart from where the pair has separated by 1e-4.
      std::size_t cut = 0;
      for (std::size_t s = 0; s < wa.traj.samples.size(); ++s) {
        const Vec gap = wa.traj.samples[s] - sample_at(wb.traj, wa.traj.times[s]);
        if (gap.norm() > 1e-4) break;
        cut = s;
      }
      if (cut == 0) break;
      for (std::size_t i = 0; i < cut; ++i) {
        path_t.push_back(t_off + wa.traj.times[i]);
        path_x.push_back(wa.traj.samples[i]);
      }
      t_off += wa.traj.times[cut];
      A = wa.traj.samples[cut];
      B = sample_at(wb.traj, wa.traj.times[cut]);
      skip_start = false;
    }
    std::ostringstream os;
    os << "separatrix from critical point " << x.id << " at angle " << theta0
       << " does not pass an intermediate critical point";
    throw Error(ErrorKind::Undecided, "morse_complex", os.str());
  };

  auto attempt = [&](int mesh) -> std::optional<std::vector<Witness>> {
    const double offset = 0.3819660112501051;
    std::vector<double> th(mesh);
    for (int j = 0; j < mesh; ++j) th[j] = kTwoPi * (j + offset) / mesh;
    std::vector<Launch> ls(mesh);
    parallel_for(static_cast<std::size_t>(mesh), opts.threads, [&](std::size_t j) { ls[j] = launch(th[j]); });
    std::vector<Witness> out;
    bool uniform = true;
    for (int j = 0; j < mesh; ++j)
      if (!(ls[j].label == ls[0].label)) uniform = false;
    if (uniform) {
      if (intermediate(ls[0].label)) out.push_back(make_witness(th[0], ls[0]));
      return out;
    }
    // Rotate so that index 0 starts a run.
    int start = 0;
    while (ls[start].label == ls[(start + mesh - 1) % mesh].label) ++start;
    for (int c = 0; c < mesh; ++c) {
      const int j = (start + c) % mesh;
      const int jn = (j + 1) % mesh;
      const bool run_start = !(ls[j].label == ls[(j + mesh - 1) % mesh].label);
      if (run_start && intermediate(ls[j].label)) out.push_back(make_witness(th[j], ls[j]));
      if (ls[j].label == ls[jn].label) continue;
      if (intermediate(ls[j].label) || intermediate(ls[jn].label)) continue;
      const double tb = jn == 0 ? th[jn] + kTwoPi : th[jn];
      auto w = bisect(th[j], tb, ls[j].label, ls[jn].label);
      if (!w) return std::nullopt;
      out.push_back(std::move(*w));
    }
    return out;
  };

  auto tally = [&](const std::vector<Witness>& ws) {
    std::vector<int> c(crit.size(), 0);
    for (const auto& w : ws) ++c[w.target];
    return c;
  };

  int mesh = opts.circle_mesh;
  auto prev = attempt(mesh);
  for (int r = 0; r < opts.max_refinements; ++r) {
    mesh *= 2;
    auto cur = attempt(mesh);
    if (prev && cur && tally(*prev) == tally(*cur)) {
      census.mesh = mesh;
      census.witnesses = std::move(*cur);
      std::sort(census.witnesses.begin(), census.witnesses.end(),
                [](const Witness& a, const Witness& b) { return a.theta < b.theta; });
      return census;
    }
    prev = std::move(cur);
  }
  std::ostringstream os;
  os << "component count on the unstable circle of critical point " << x.id
     << " did not stabilise after " << opts.max_refinements << " refinements";
  throw Error(ErrorKind::Resolution, "morse_complex", os.str());
}

GradedComplex empty_complex(const std::vector<CriticalPoint>& crit, bool use_mu) {
  GradedComplex c;
  std::vector<int> order(crit.size());
  for (std::size_t i = 0; i < crit.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (crit[a].action != crit[b].action) return crit[a].action < crit[b].action;
    return crit[a].id < crit[b].id;
  });
  for (int i : order) c.generators[use_mu ? crit[i].mu : crit[i].m].push_back({i, crit[i].action});
  return c;
}

BoundaryResult assemble_boundary(const std::vector<CriticalPoint>& crit, bool use_mu,
                                 const PairCounter& count) {
  BoundaryResult res;
  res.complex = empty_complex(crit, use_mu);
  for (int k : res.complex.degrees()) {
    if (!res.complex.generators.count(k - 1)) continue;
    const auto& cols = res.complex.generators.at(k);
    const auto& rows = res.complex.generators.at(k - 1);
    GF2Matrix d(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t i = 0; i < rows.size(); ++i) {
        ConnectionCount c = count(cols[j].id, rows[i].id);
        d.set(static_cast<int>(i), static_cast<int>(j), c.mod2());
        res.counts[{cols[j].id, rows[i].id}] = std::move(c);
      }
    res.complex.boundary[k] = d;
  }
  return res;
}

ConnectionCount count_connections(const ConnectionEngine& engine, int x, int y) {
  return engine.count(FlowKind::Morse, x, y);
}

BoundaryResult morse_boundary(const ConnectionEngine& engine) {
  auto run = [&] {
    return assemble_boundary(engine.critical(), false,
                             [&](int x, int y) { return count_connections(engine, x, y); });
  };
  try {
    return run();
  } catch (const Error& e) {
    const bool retry = (e.kind() == ErrorKind::Undecided || e.kind() == ErrorKind::Resolution) &&
                       engine.options().perturbation == "auto" && !engine.perturbed();
    if (!retry) throw;
    log_warn(std::string("morse counts undecided (") + e.what() + "), applying seeded perturbation");
    engine.enable_perturbation();
    return run();
  }
}

std::string witness_csv(const ActionContext& ctx, const Witness& w) {
  const GalerkinSpace& sp = ctx.space();
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < w.trajectory.samples.size(); ++i) {
    const Vec& x = w.trajectory.samples[i];
    os << w.trajectory.times[i] << ',' << ctx.action(x);
    for (int c = 0; c < sp.dim(); ++c) os << ',' << x[sp.offset(0) + c];
    os << '\n';
  }
  return os.str();
}

}  // namespace floer
