#include "torus_floer/hybrid_iso.hpp"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/SVD>

#include "torus_floer/errors.hpp"
#include "torus_floer/floer_solver.hpp"
#include "torus_floer/parallel.hpp"

namespace floer {

BvpProblem hybrid_problem(std::shared_ptr<const ActionContext> ctx,
                          std::shared_ptr<const CompactPerturbation> k, const Vec& x,
                          const Vec& y_lifted, double L_m, int intervals_m, double L,
                          int intervals_f, double tol_spec) {
  const Splitting sx = morse_splitting(*ctx, x, tol_spec, k.get());
  const Splitting sy = floer_splitting(*ctx, y_lifted, tol_spec);
  BvpProblem p;
  p.dim = ctx->space().dim_total();
  p.segments.push_back({-L_m, 0.0, intervals_m, morse_field(ctx, k)});
  p.segments.push_back({0.0, L, intervals_f, floer_field(ctx)});
  p.linear.push_back({0, 0, sx.stable_rows, x});
  p.linear.push_back({1, intervals_f, sy.unstable_rows, y_lifted});
  p.matches.push_back({0, intervals_m, 1, 0});
  return p;
}

namespace {

HybridSolution describe(const ConnectionEngine& engine, int x, int y, const std::vector<Mat>& nodes,
                        double L_m, double L) {
  const ActionContext& ctx = *engine.context();
  const GalerkinSpace& sp = engine.space();
  HybridSolution s;
  s.x = x;
  s.y = y;
  s.morse_part = nodes[0];
  s.floer_part = nodes[1];
  s.L_m = L_m;
  s.L = L;
  const Mat& f = nodes[1];
  s.lattice = lattice_offset(sp, f.col(f.cols() - 1), engine.critical()[y].modes);
  const Vec gap = nodes[0].col(nodes[0].cols() - 1) - f.col(0);
  s.matching_defect = std::sqrt(gap.dot(gap.cwiseProduct(sp.weights())));
  s.energy = flow_energy(FlowKind::Floer, ctx, nullptr, f, L / (f.cols() - 1));
  s.action_u0 = ctx.action(f.col(0));
  s.action_drop = s.action_u0 - engine.critical()[y].action;
  return s;
}

}  // namespace

std::optional<HybridSolution> solve_hybrid(const ConnectionEngine& engine, int x, int y,
                                           const Vec& lattice, const Mat& morse_guess,
                                           const Mat& floer_guess, bool coarse) {
  const GalerkinSpace& sp = engine.space();
  const Vec xs = engine.critical()[x].modes;
  const Vec ys = shift_base(sp, engine.critical()[y].modes, lattice);
  const double Lm = engine.morse_length(), L = engine.half_length();
  const int mm = static_cast<int>(morse_guess.cols()) - 1;
  const int mf = static_cast<int>(floer_guess.cols()) - 1;
  const BvpProblem p = hybrid_problem(engine.context(), engine.perturbation(), xs, ys, Lm, mm, L, mf,
                                      engine.options().morse.tol_spec);
  if (p.equations() != p.unknowns()) return std::nullopt;
  NewtonOptions no = engine.newton();
  if (coarse) {
    no.tol = std::max(no.tol, 1e-6);
    no.max_iter = std::min(no.max_iter, 10);
    no.max_backtrack = 6;
  }
  const BvpResult r = solve_bvp(p, {morse_guess, floer_guess}, no);
  if (!r.converged) return std::nullopt;
  if ((r.nodes[0].col(0) - xs).cwiseAbs().maxCoeff() > 1e-2) return std::nullopt;
  if ((r.nodes[1].col(mf) - ys).cwiseAbs().maxCoeff() > 1e-2) return std::nullopt;
  HybridSolution s = describe(engine, x, y, r.nodes, Lm, L);
  s.residual = r.residual;
  return s;
}

ConstantHybridReport constant_hybrid(const ConnectionEngine& engine, int x, double L, int intervals) {
  const Vec xs = engine.critical().at(x).modes;
  const BvpProblem p = hybrid_problem(engine.context(), engine.perturbation(), xs, xs, L, intervals, L,
                                      intervals, engine.options().morse.tol_spec);
  if (p.equations() != p.unknowns())
    throw Error(ErrorKind::Dimension, "hybrid_iso", "constant hybrid problem is not square");
  const Mat g = xs.replicate(1, intervals + 1);
  const BvpResult r = solve_bvp(p, {g, g}, engine.newton());
  if (!r.converged)
    throw Error(ErrorKind::NoSolution, "hybrid_iso", "constant hybrid solution did not converge");
  ConstantHybridReport rep;
  rep.solution = describe(engine, x, x, r.nodes, L, L);
  rep.solution.residual = r.residual;
  const Mat J = bvp_jacobian_dense(p, pack_nodes(p, r.nodes));
  Eigen::BDCSVD<Mat> svd(J);
  rep.sigma_max = svd.singularValues()[0];
  rep.sigma_min = svd.singularValues()[svd.singularValues().size() - 1];
  return rep;
}

ConnectionCount count_hybrid(const ConnectionEngine& engine, int x, int y) {
  ConnectionCount res;
  const auto& crit = engine.critical();
  const CriticalPoint& cx = crit.at(x);
  const CriticalPoint& cy = crit.at(y);
  if (x == y) {
    res.method = "identity";
    res.count = 1;
    return res;
  }
  if (cy.action > cx.action + 1e-12) {
    res.method = "energy";
    return res;
  }
  if (std::abs(cy.action - cx.action) <= 1e-10) {
    res.method = "equal-action";
    return res;
  }
  res.method = "multistart";
  const GalerkinSpace& sp = engine.space();
  const EngineOptions& o = engine.options();
  const int mm = std::max(8, o.intervals / 2), mf = mm;
  const double Lm = engine.morse_length(), L = engine.half_length();
  std::seed_seq sq{static_cast<std::uint32_t>(o.seed), static_cast<std::uint32_t>(o.seed >> 32), 7u,
                   static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y)};
  std::mt19937_64 rng(sq);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> step(-1, 1);
  const int off = sp.offset(0);
  const Vec base_lat = lattice_offset(sp, cx.modes, cy.modes);
  struct Guess {
    Vec lattice;
    Mat gm, gf;
  };
  std::vector<Guess> guesses;
  const double rate = engine.delta_est();
  for (int i = 0; i < o.multistart; ++i) {
    Guess g;
    g.lattice = base_lat;
    for (int c = 0; c < sp.dim(); ++c) g.lattice[c] += (step(rng) + step(rng)) / 2;
    const Vec ys = shift_base(sp, cy.modes, g.lattice);
    Vec bend(sp.dim());
    for (int c = 0; c < sp.dim(); ++c) bend[c] = 0.15 * gauss(rng);
    Vec tmodes = Vec::Zero(sp.dim_total());
    for (int k = -sp.N; k <= sp.N; ++k)
      if (k != 0)
        for (int c = 0; c < sp.dim(); ++c) tmodes[sp.offset(k) + c] = 0.02 * gauss(rng) / std::abs(k);
    const double shift = 0.5 * gauss(rng) / rate;
    auto at = [&](double s) {
      const double sig = 0.5 * (1.0 + std::tanh(0.5 * rate * (s - shift)));
      const double bump = 4.0 * sig * (1.0 - sig);
      Vec v = (1.0 - sig) * cx.modes + sig * ys + bump * tmodes;
      v.segment(off, sp.dim()) += bump * bend;
      return v;
    };
    g.gm.resize(sp.dim_total(), mm + 1);
    g.gf.resize(sp.dim_total(), mf + 1);
    for (int j = 0; j <= mm; ++j) g.gm.col(j) = at(-Lm + Lm * j / mm);
    for (int j = 0; j <= mf; ++j) g.gf.col(j) = at(L * j / mf);
    guesses.push_back(std::move(g));
  }
  std::vector<std::optional<HybridSolution>> sols(guesses.size());
  const int mc = std::max(16, mm / 4);
  parallel_for(guesses.size(), o.threads, [&](std::size_t i) {
    try {
      auto c = solve_hybrid(engine, x, y, guesses[i].lattice, resample_nodes(guesses[i].gm, mc),
                            resample_nodes(guesses[i].gf, mc), true);
      if (!c) return;
      sols[i] = solve_hybrid(engine, x, y, guesses[i].lattice, resample_nodes(c->morse_part, mm),
                             resample_nodes(c->floer_part, mf));
    } catch (const Error&) {
      sols[i].reset();
    }
  });
  std::vector<HybridSolution> unique;
  for (const auto& s : sols) {
    if (!s) continue;
    bool dup = false;
    for (const auto& u : unique)
      if (u.lattice == s->lattice && (u.morse_part - s->morse_part).cwiseAbs().maxCoeff() < o.tol_dedup &&
          (u.floer_part - s->floer_part).cwiseAbs().maxCoeff() < o.tol_dedup)
        dup = true;
    if (!dup) unique.push_back(*s);
  }
  res.count = static_cast<int>(unique.size());
  for (const auto& u : unique) {
    res.solutions.push_back({u.morse_part, u.floer_part});
    res.lattices.push_back(u.lattice);
    res.energies.push_back(u.energy);
    res.action_drops.push_back(u.action_drop);
  }
  return res;
}

PhiResult build_phi(const ConnectionEngine& engine, const GradedComplex& cm, const GradedComplex& cf) {
  PhiResult out;
  std::set<int> degrees;
  for (int k : cm.degrees()) degrees.insert(k);
  for (int k : cf.degrees()) degrees.insert(k);
  for (int k : degrees) {
    const auto cols = cm.generators.count(k) ? cm.generators.at(k) : std::vector<Generator>{};
    const auto rows = cf.generators.count(k) ? cf.generators.at(k) : std::vector<Generator>{};
    GF2Matrix m(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t i = 0; i < rows.size(); ++i) {
        ConnectionCount c = count_hybrid(engine, cols[j].id, rows[i].id);
        m.set(static_cast<int>(i), static_cast<int>(j), c.mod2());
        out.counts[{cols[j].id, rows[i].id}] = std::move(c);
      }
    out.phi[k] = m;
  }
  return out;
}

TriangularReport check_triangular(const std::map<int, GF2Matrix>& phi, const GradedComplex& cm,
                                  const GradedComplex& cf) {
  TriangularReport rep;
  auto fail = [&](const std::string& msg) {
    if (rep.ok) rep.message = msg;
    rep.ok = false;
    rep.invertible = false;
  };
  for (const auto& [k, m] : phi) {
    if (m.rows() != m.cols() || m.rows() != cf.count(k) || m.cols() != cm.count(k)) {
      fail("Phi in degree " + std::to_string(k) + " is not square");
      continue;
    }
    const auto& rows = cf.generators.at(k);
    const auto& cols = cm.generators.at(k);
    for (int i = 0; i < m.rows(); ++i)
      for (int j = 0; j < m.cols(); ++j) {
        const bool v = m.get(i, j);
        std::ostringstream os;
        if (i == j && !v) {
          os << "degree " << k << ": diagonal entry (" << cols[j].id << " -> " << rows[i].id << ") is 0";
          fail(os.str());
        } else if (i > j && v) {
          os << "degree " << k << ": entry below the diagonal (" << cols[j].id << " -> " << rows[i].id
             << ") is 1";
          fail(os.str());
        }
      }
    if (m.rank() != m.rows()) rep.invertible = false;
  }
  return rep;
}

}  // namespace floer
