#include "torus_floer/connections.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "torus_floer/errors.hpp"
#include "torus_floer/floer_solver.hpp"
#include "torus_floer/log.hpp"
#include "torus_floer/parallel.hpp"

namespace floer {

VectorField flow_field(FlowKind kind, std::shared_ptr<const ActionContext> ctx,
                       std::shared_ptr<const CompactPerturbation> k) {
  return kind == FlowKind::Morse ? morse_field(std::move(ctx), std::move(k)) : floer_field(std::move(ctx));
}

Splitting flow_splitting(FlowKind kind, const ActionContext& ctx, const Vec& c, double tol_spec,
                         const CompactPerturbation* k) {
  return kind == FlowKind::Morse ? morse_splitting(ctx, c, tol_spec, k) : floer_splitting(ctx, c, tol_spec);
}

namespace {

Vec field_at(FlowKind kind, const ActionContext& ctx, const CompactPerturbation* k, const Vec& y) {
  if (kind == FlowKind::Floer) return floer_rhs(ctx, y);
  Vec f = -ctx.gradient(y);
  if (k && k->active()) f += (*k)(ctx, y);
  return f;
}

double flow_norm2(FlowKind kind, const GalerkinSpace& sp, const Vec& v) {
  return kind == FlowKind::Floer ? v.squaredNorm() : v.dot(v.cwiseProduct(sp.weights()));
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double flow_energy(FlowKind kind, const ActionContext& ctx, const CompactPerturbation* k,
                   const Mat& nodes, double h) {
  const Mat du = ds_fd4(nodes, h);
  const Vec w = gregory_weights(static_cast<int>(nodes.cols()), h);
  double e = 0.0;
  for (Eigen::Index i = 0; i < nodes.cols(); ++i) {
    const Vec f = field_at(kind, ctx, k, nodes.col(i));
    e += w[i] * (flow_norm2(kind, ctx.space(), du.col(i)) + flow_norm2(kind, ctx.space(), f));
  }
  return 0.5 * e;
}

double tail_rate(FlowKind kind, const ActionContext& ctx, const CompactPerturbation* k,
                 const Mat& nodes, double h) {
  const int m = static_cast<int>(nodes.cols());
  const int q = std::max(4, m / 4);
  std::vector<double> sl, yl, sr, yr;
  for (int i = 0; i < q; ++i) {
    const double a = std::sqrt(flow_norm2(kind, ctx.space(), field_at(kind, ctx, k, nodes.col(i))));
    const double b =
        std::sqrt(flow_norm2(kind, ctx.space(), field_at(kind, ctx, k, nodes.col(m - 1 - i))));
    sl.push_back(i * h);
    yl.push_back(std::log(std::max(a, 1e-300)));
    sr.push_back((m - 1 - i) * h);
    yr.push_back(std::log(std::max(b, 1e-300)));
  }
  return std::min(fit_slope(sl, yl), -fit_slope(sr, yr));
}

BvpProblem connection_problem(FlowKind kind, std::shared_ptr<const ActionContext> ctx,
                              std::shared_ptr<const CompactPerturbation> k, const Vec& x,
                              const Vec& y_lifted, double L, int intervals, double tol_spec) {
  const Splitting sx = flow_splitting(kind, *ctx, x, tol_spec, k.get());
  const Splitting sy = flow_splitting(kind, *ctx, y_lifted, tol_spec, k.get());
  BvpProblem p;
  p.dim = ctx->space().dim_total();
  p.segments.push_back({-L, L, intervals, flow_field(kind, ctx, k)});
  p.linear.push_back({0, 0, sx.stable_rows, x});
  p.linear.push_back({0, intervals, sy.unstable_rows, y_lifted});
  if ((x - y_lifted).cwiseAbs().maxCoeff() > 1e-12) {
    ScalarCondition phase;
    phase.segment = 0;
    phase.node = intervals / 2;
    phase.g = [ctx](const Vec& y) { return ctx->action(y); };
    phase.dg = [ctx](const Vec& y) { return ctx->action_differential(y); };
    phase.value = 0.5 * (ctx->action(x) + ctx->action(y_lifted));
    p.scalars.push_back(std::move(phase));
  }
  return p;
}

std::optional<Mat> solve_connection(const BvpProblem& p, const Mat& guess, const Vec& x,
                                    const Vec& y_lifted, const NewtonOptions& opts) {
  if (p.equations() != p.unknowns()) return std::nullopt;
  const BvpResult r = solve_bvp(p, {guess}, opts);
  if (!r.converged) return std::nullopt;
  const Mat& u = r.nodes[0];
  const double tol = 1e-2;
  if ((u.col(0) - x).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  if ((u.col(u.cols() - 1) - y_lifted).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  return u;
}

Mat resample_nodes(const Mat& nodes, int intervals) {
  const int m = static_cast<int>(nodes.cols()) - 1;
  if (m == intervals) return nodes;
  Mat out(nodes.rows(), intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    const double pos = static_cast<double>(i) * m / intervals;
    const int j = std::min(static_cast<int>(pos), m - 1);
    const double a = pos - j;
    out.col(i) = (1.0 - a) * nodes.col(j) + a * nodes.col(j + 1);
  }
  return out;
}

Mat guess_from_seed(const ActionContext& ctx, const Seed& seed, const Vec& x, const Vec& y_lifted,
                    double L, int intervals) {
  const GalerkinSpace& sp = ctx.space();
  const int off = sp.offset(0);
  const double mid = 0.5 * (ctx.action(x) + ctx.action(y_lifted));
  auto embed = [&](const Vec& p, double sigma) {
    Vec v = (1.0 - sigma) * x + sigma * y_lifted;
    v.segment(off, sp.dim()) = p;
    return v;
  };
  const auto& ts = seed.times;
  const auto& ps = seed.points;
  std::size_t jm = 0;
  while (jm + 1 < ps.size() && ctx.action(embed(ps[jm + 1], 0.5)) > mid) ++jm;
  const double t_mid = ts[jm];
  const double span = ts.back() - ts.front();
  Mat g(sp.dim_total(), intervals + 1);
  for (int i = 0; i <= intervals; ++i) {
    const double s = -L + 2.0 * L * i / intervals;
    const double t = t_mid + s;
    Vec p;
    if (t <= ts.front()) {
      p = ps.front();
    } else if (t >= ts.back()) {
      p = y_lifted.segment(off, sp.dim());
    } else {
      const auto it = std::upper_bound(ts.begin(), ts.end(), t);
      const std::size_t j = static_cast<std::size_t>(it - ts.begin());
      const double a = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
      p = (1.0 - a) * ps[j - 1] + a * ps[j];
    }
    const double sigma = span > 0 ? std::clamp((t - ts.front()) / span, 0.0, 1.0) : 0.5;
    g.col(i) = embed(p, sigma);
  }
  g.col(0) = x;
  g.col(intervals) = y_lifted;
  return g;
}

ConnectionEngine::ConnectionEngine(const TrigHamiltonian& h, GalerkinSpace space,
                                   std::vector<PeriodicOrbit> orbits, EngineOptions opts)
    : h_(h), space_(space), orbits_(std::move(orbits)), opts_(std::move(opts)) {
  ctx_ = std::make_shared<ActionContext>(h_, space_);
  crit_ = critical_points(*ctx_, orbits_, opts_.morse.tol_spec);
  factorized_ = factorizes(h_, orbits_);
  delta_ = std::numeric_limits<double>::infinity();
  for (const auto& c : crit_) {
    delta_ = std::min(delta_, morse_splitting(*ctx_, c.modes, opts_.morse.tol_spec).gap);
    delta_ = std::min(delta_, floer_splitting(*ctx_, c.modes, opts_.morse.tol_spec).gap);
  }
  if (crit_.empty()) delta_ = 1.0;
  L_ = opts_.L > 0 ? opts_.L : std::min(12.0 / delta_, 200.0);
  if (opts_.perturbation == "on") enable_perturbation();
  if (!factorized_) build_autonomous();
}

void ConnectionEngine::build_autonomous() {
  to0_.assign(crit_.size(), -1);
  shift0_.assign(crit_.size(), Vec::Zero(space_.dim()));
  const TrigHamiltonian h0 = h_.autonomous_part();
  std::vector<PeriodicOrbit> orbits0;
  try {
    OrbitOptions oo;
    oo.threads = opts_.threads;
    orbits0 = find_orbits(h0, oo);
  } catch (const Error& e) {
    log_warn(std::string("autonomous part has no usable orbit census (") + e.what() +
             "); counts rely on multistart only");
    return;
  }
  if (!factorizes(h0, orbits0)) {
    log_warn("autonomous part has non-constant orbits; counts rely on multistart only");
    return;
  }
  ctx0_ = std::make_shared<ActionContext>(h0, space_);
  crit0_ = critical_points(*ctx0_, orbits0, opts_.morse.tol_spec);
  for (std::size_t i = 0; i < crit0_.size(); ++i) {
    Vec c;
    try {
      c = continue_critical(crit0_[i].modes, 0.0, Vec(), 1.0);
    } catch (const Error&) {
      continue;
    }
    for (std::size_t j = 0; j < crit_.size(); ++j) {
      const Vec lat = lattice_offset(space_, crit_[j].modes, c);
      if (lifted_distance(space_, crit_[j].modes, shift_base(space_, c, lat)) < 1e-6) {
        to0_[j] = static_cast<int>(i);
        shift0_[j] = lat;
      }
    }
  }
}

Vec ConnectionEngine::continue_critical(const Vec& c0, double tau0, const Vec& guess,
                                        double tau1) const {
  Vec c = guess.size() ? guess : c0;
  const int steps = 16;
  for (int s = 1; s <= steps; ++s) {
    const double tau = tau0 + (tau1 - tau0) * s / steps;
    const ActionContext ctx(h_.homotopy(tau), space_);
    c = refine_critical(ctx, c);
  }
  return c;
}

std::shared_ptr<const CompactPerturbation> ConnectionEngine::perturbation() const {
  std::lock_guard<std::mutex> lock(mu_);
  return k_;
}

bool ConnectionEngine::perturbed() const {
  std::lock_guard<std::mutex> lock(mu_);
  return k_ && k_->active();
}

void ConnectionEngine::enable_perturbation() const {
  std::vector<Vec> bases;
  for (const auto& c : crit_) bases.push_back(c.modes.segment(space_.offset(0), space_.dim()));
  auto k = std::make_shared<CompactPerturbation>(space_, opts_.perturbation_magnitude,
                                                 2.0 * opts_.morse.flow.r_conv, bases, opts_.seed);
  std::lock_guard<std::mutex> lock(mu_);
  k_ = std::move(k);
  census_.clear();
}

const LaunchCensus& ConnectionEngine::census(int source) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = census_.find(source);
  if (it != census_.end()) return it->second;
  LaunchCensus c = launch_census(*ctx_, k_.get(), crit_, source, opts_.morse);
  return census_.emplace(source, std::move(c)).first->second;
}

NewtonOptions ConnectionEngine::newton() const {
  NewtonOptions o;
  o.tol = opts_.tol_floer;
  o.max_iter = opts_.max_newton;
  return o;
}

std::vector<Seed> ConnectionEngine::seeds(int x, int y) const {
  std::vector<Seed> out;
  const std::vector<Witness>* ws = nullptr;
  int target = y;
  const int off = space_.offset(0);
  if (factorized_) {
    if (constant_unstable_dim(*ctx_, crit_[x].modes, opts_.morse.tol_spec) > 2) return out;
    ws = &census(x).witnesses;
  } else {
    if (!ctx0_ || to0_[x] < 0 || to0_[y] < 0) return out;
    const int x0 = to0_[x];
    target = to0_[y];
    if (constant_unstable_dim(*ctx0_, crit0_[x0].modes, opts_.morse.tol_spec) > 2) return out;
    std::lock_guard<std::mutex> lock(mu_);
    auto it = census0_.find(x0);
    if (it == census0_.end())
      it = census0_.emplace(x0, launch_census(*ctx0_, nullptr, crit0_, x0, opts_.morse)).first;
    ws = &it->second.witnesses;
  }
  for (const auto& w : *ws) {
    if (w.target != target) continue;
    Seed s;
    s.lattice = w.lattice;
    s.times = w.trajectory.times;
    for (const auto& p : w.trajectory.samples) s.points.push_back(p.segment(off, space_.dim()));
    out.push_back(std::move(s));
  }
  return out;
}

std::optional<Connection> ConnectionEngine::finish(FlowKind kind, int x, int y, const Mat& nodes,
                                                   bool from_seed) const {
  const auto k = kind == FlowKind::Morse ? perturbation() : nullptr;
  const double h = 2.0 * L_ / (nodes.cols() - 1);
  Connection c;
  c.nodes = nodes;
  c.lattice = lattice_offset(space_, nodes.col(nodes.cols() - 1), crit_[y].modes);
  c.energy = flow_energy(kind, *ctx_, k.get(), nodes, h);
  c.action_drop = crit_[x].action - crit_[y].action;
  c.tail_rate = tail_rate(kind, *ctx_, k.get(), nodes, h);
  c.from_seed = from_seed;
  c.residual = bvp_residual(connection_problem(kind, ctx_, k, crit_[x].modes,
                                               shift_base(space_, crit_[y].modes, c.lattice), L_,
                                               opts_.intervals, opts_.morse.tol_spec),
                            Eigen::Map<const Vec>(nodes.data(), nodes.size()))
                   .cwiseAbs()
                   .maxCoeff();
  return c;
}

std::vector<Connection> ConnectionEngine::solve_family(FlowKind kind, int x, int y,
                                                       const Seed& seed) const {
  const int M = opts_.intervals;
  const auto k = kind == FlowKind::Morse ? perturbation() : nullptr;
  const NewtonOptions nopt = newton();
  if (factorized_) {
    const Vec xs = crit_[x].modes;
    const Vec ys = shift_base(space_, crit_[y].modes, seed.lattice);
    const Mat g = guess_from_seed(*ctx_, seed, xs, ys, L_, M);
    const BvpProblem p = connection_problem(kind, ctx_, k, xs, ys, L_, M, opts_.morse.tol_spec);
    auto u = solve_connection(p, g, xs, ys, nopt);
    if (!u) return {};
    auto c = finish(kind, x, y, *u, true);
    return c ? std::vector<Connection>{*c} : std::vector<Connection>{};
  }

  // Solve for the autonomous part, then continue in tau to H.
  const int x0 = to0_[x], y0 = to0_[y];
  Vec xt = crit0_[x0].modes;
  Vec yt = shift_base(space_, crit0_[y0].modes, seed.lattice);
  Mat u;
  {
    const Mat g = guess_from_seed(*ctx0_, seed, xt, yt, L_, M);
    const BvpProblem p = connection_problem(kind, ctx0_, nullptr, xt, yt, L_, M, opts_.morse.tol_spec);
    auto sol = solve_connection(p, g, xt, yt, nopt);
    if (!sol) return {};
    u = *sol;
  }
  double tau = 0.0;
  double dt = 1.0 / std::max(1, opts_.continuation_steps);
  while (tau < 1.0) {
    const double tn = std::min(1.0, tau + dt);
    std::optional<Mat> sol;
    Vec xn, yn;
    try {
      xn = continue_critical(xt, tau, Vec(), tn);
      yn = continue_critical(yt, tau, Vec(), tn);
      auto ctxn = std::make_shared<ActionContext>(h_.homotopy(tn), space_);
      const BvpProblem p = connection_problem(kind, ctxn, nullptr, xn, yn, L_, M, opts_.morse.tol_spec);
      sol = solve_connection(p, u, xn, yn, nopt);
    } catch (const Error&) {
      sol.reset();
    }
    if (sol) {
      u = *sol;
      xt = xn;
      yt = yn;
      tau = tn;
    } else {
      dt *= 0.5;
      if (dt < 1.0 / 64) return {};
    }
  }
  const Vec shift = lattice_offset(space_, crit_[x].modes, xt);
  for (Eigen::Index i = 0; i < u.cols(); ++i) u.col(i) = shift_base(space_, u.col(i), shift);
  if ((u.col(0) - crit_[x].modes).cwiseAbs().maxCoeff() > 1e-2) return {};
  auto c = finish(kind, x, y, u, true);
  return c ? std::vector<Connection>{*c} : std::vector<Connection>{};
}

ConnectionCount ConnectionEngine::count(FlowKind kind, int x, int y) const {
  ConnectionCount res;
  const CriticalPoint& cx = crit_.at(x);
  const CriticalPoint& cy = crit_.at(y);
  if (cy.action >= cx.action - 1e-12) {
    res.method = "action";
    return res;
  }

  if (kind == FlowKind::Morse && factorized_ &&
      constant_unstable_dim(*ctx_, cx.modes, opts_.morse.tol_spec) <= 2) {
    const LaunchCensus& c = census(x);
    res.method = "census";
    for (const auto& w : c.witnesses)
      if (w.target == y) res.witnesses.push_back(w);
    res.count = static_cast<int>(res.witnesses.size());
    return res;
  }

  res.method = "bvp";
  const std::vector<Seed> seeds = this->seeds(x, y);
  std::vector<std::vector<Connection>> fam(seeds.size());
  parallel_for(seeds.size(), opts_.threads,
               [&](std::size_t i) { fam[i] = solve_family(kind, x, y, seeds[i]); });

  // Multistart: bent lines to nearby lifts of y with random t-modes.
  const int M = opts_.intervals;
  std::seed_seq sq{static_cast<std::uint32_t>(opts_.seed), static_cast<std::uint32_t>(opts_.seed >> 32),
                   static_cast<std::uint32_t>(kind), static_cast<std::uint32_t>(x),
                   static_cast<std::uint32_t>(y)};
  std::mt19937_64 rng(sq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> step(-1, 1);
  const int off = space_.offset(0);
  const Vec base_lat = lattice_offset(space_, cx.modes, cy.modes);
  std::vector<Mat> guesses;
  std::vector<Vec> targets;
  for (int i = 0; i < opts_.multistart; ++i) {
    Vec lat = base_lat;
    for (int c = 0; c < space_.dim(); ++c) lat[c] += (step(rng) + step(rng)) / 2;
    const Vec ys = shift_base(space_, cy.modes, lat);
    Vec bend(space_.dim());
    for (int c = 0; c < space_.dim(); ++c) bend[c] = 0.15 * gauss(rng);
    Vec tmodes(space_.dim_total());
    for (int kk = -space_.N; kk <= space_.N; ++kk)
      for (int c = 0; c < space_.dim(); ++c)
        tmodes[space_.offset(kk) + c] = kk == 0 ? 0.0 : 0.02 * gauss(rng) / std::abs(kk);
    Mat g(space_.dim_total(), M + 1);
    for (int j = 0; j <= M; ++j) {
      const double s = -L_ + 2.0 * L_ * j / M;
      const double sig = 0.5 * (1.0 + std::tanh(0.5 * delta_ * s));
      const double bump = 4.0 * sig * (1.0 - sig);
      Vec v = (1.0 - sig) * cx.modes + sig * ys + bump * tmodes;
      v.segment(off, space_.dim()) += bump * bend;
      g.col(j) = v;
    }
    guesses.push_back(std::move(g));
    targets.push_back(ys);
  }
  std::vector<std::optional<Connection>> ms(guesses.size());
  const auto k = kind == FlowKind::Morse && factorized_ ? perturbation() : nullptr;
  const int mc = std::max(32, M / 4);
  NewtonOptions coarse = newton();
  coarse.tol = std::max(coarse.tol, 1e-6);
  coarse.max_iter = std::min(coarse.max_iter, 10);
  coarse.max_backtrack = 6;
  // Coarse screens that land on a known family member are not refined.
  std::vector<std::pair<Vec, Mat>> known;
  for (const auto& f : fam)
    for (const auto& c : f) known.emplace_back(c.lattice, resample_nodes(c.nodes, mc));
  parallel_for(guesses.size(), opts_.threads, [&](std::size_t i) {
    try {
      const BvpProblem pc =
          connection_problem(kind, ctx_, k, cx.modes, targets[i], L_, mc, opts_.morse.tol_spec);
      auto uc = solve_connection(pc, resample_nodes(guesses[i], mc), cx.modes, targets[i], coarse);
      if (!uc) return;
      const Vec lat = lattice_offset(space_, uc->col(mc), cy.modes);
      for (const auto& [kl, kn] : known)
        if (kl == lat && (kn - *uc).cwiseAbs().maxCoeff() < 2e-2) return;
      const BvpProblem p = connection_problem(kind, ctx_, k, cx.modes, targets[i], L_, M, opts_.morse.tol_spec);
      auto u = solve_connection(p, resample_nodes(*uc, M), cx.modes, targets[i], newton());
      if (u) ms[i] = finish(kind, x, y, *u, false);
    } catch (const Error&) {
      ms[i].reset();
    }
  });

  std::vector<Connection> unique;
  auto same = [&](const Connection& a, const Connection& b) {
    return a.lattice == b.lattice && (a.nodes - b.nodes).cwiseAbs().maxCoeff() < opts_.tol_dedup;
  };
  auto add = [&](const Connection& c) {
    for (const auto& u : unique)
      if (same(u, c)) return false;
    unique.push_back(c);
    return true;
  };
  for (const auto& f : fam)
    for (const auto& c : f) add(c);
  for (const auto& c : ms)
    if (c && add(*c)) res.completeness_warning = true;

  res.count = static_cast<int>(unique.size());
  for (const auto& c : unique) {
    res.solutions.push_back({c.nodes});
    res.lattices.push_back(c.lattice);
    res.energies.push_back(c.energy);
    res.action_drops.push_back(c.action_drop);
    res.tail_rates.push_back(c.tail_rate);
  }
  if (res.completeness_warning) {
    std::ostringstream os;
    os << "multistart found a connection " << cx.id << " -> " << cy.id
       << " outside every continuation family";
    log_warn(os.str());
  }
  return res;
}

}  // namespace floer
