#include "torus_floer/critical.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "torus_floer/errors.hpp"

namespace floer {

CompactPerturbation::CompactPerturbation(GalerkinSpace space, double magnitude, double r_crit,
                                         std::vector<Vec> critical_bases, std::uint64_t seed)
    : space_(space), magnitude_(magnitude), r_crit_(r_crit), critical_(std::move(critical_bases)) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> freq(-1, 1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int d = space.dim();
  for (int t = 0; t < 3; ++t) {
    Vec m(d);
    do {
      for (int i = 0; i < d; ++i) m[i] = freq(rng);
    } while (m.squaredNorm() == 0.0);
    Vec dir(d);
    for (int i = 0; i < d; ++i) dir[i] = gauss(rng);
    freq_.push_back(m);
    phase_.push_back(kTwoPi * uni(rng));
    dir_.push_back(dir.normalized());
  }
}

double CompactPerturbation::cutoff(const Vec& base) const {
  double chi = 1.0;
  for (const auto& c : critical_) {
    const double s = std::clamp((torus_distance(base, c) - r_crit_) / r_crit_, 0.0, 1.0);
    chi *= s * s * (3.0 - 2.0 * s);
  }
  return chi;
}

Vec CompactPerturbation::operator()(const ActionContext& ctx, const Vec& x) const {
  Vec out = Vec::Zero(x.size());
  if (!active()) return out;
  const GalerkinSpace& s = ctx.space();
  const Vec base = x.segment(s.offset(0), s.dim());
  const double chi = cutoff(base);
  if (chi == 0.0) return out;
  const Vec g = ctx.gradient(x);
  const double gnorm = std::sqrt(g.dot(g.cwiseProduct(s.weights())));
  Vec u = Vec::Zero(s.dim());
  for (std::size_t t = 0; t < freq_.size(); ++t)
    u += std::sin(kTwoPi * freq_[t].dot(base) + phase_[t]) * dir_[t];
  u /= static_cast<double>(freq_.size());
  out.segment(s.offset(0), s.dim()) = 0.5 * magnitude_ * gnorm * chi * u;
  return out;
}

Mat CompactPerturbation::jacobian(const ActionContext& ctx, const Vec& x) const {
  const auto d = x.size();
  Mat j = Mat::Zero(d, d);
  if (!active()) return j;
  const double h = 1e-7;
  for (Eigen::Index c = 0; c < d; ++c) {
    Vec xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    j.col(c) = ((*this)(ctx, xp) - (*this)(ctx, xm)) / (2.0 * h);
  }
  return j;
}

Splitting split_symmetric(const Mat& sym, const Vec& scale, double tol_spec) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (sym + sym.transpose()));
  const Vec& ev = es.eigenvalues();
  Splitting sp;
  sp.gap = ev.cwiseAbs().minCoeff();
  if (sp.gap <= tol_spec) {
    std::ostringstream os;
    os << "asymptotic operator has eigenvalue " << sp.gap << " within tol_spec of 0";
    throw Error(ErrorKind::SpectralGap, "critical", os.str());
  }
  std::vector<int> st, un;
  for (Eigen::Index i = 0; i < ev.size(); ++i) (ev[i] < 0 ? st : un).push_back(static_cast<int>(i));
  const auto d = sym.rows();
  sp.stable_rows.resize(static_cast<Eigen::Index>(st.size()), d);
  sp.unstable_rows.resize(static_cast<Eigen::Index>(un.size()), d);
  sp.unstable_dirs.resize(d, static_cast<Eigen::Index>(un.size()));
  sp.unstable_rates.resize(static_cast<Eigen::Index>(un.size()));
  for (std::size_t i = 0; i < st.size(); ++i)
    sp.stable_rows.row(i) = es.eigenvectors().col(st[i]).cwiseProduct(scale).transpose();
  for (std::size_t i = 0; i < un.size(); ++i) {
    sp.unstable_rows.row(i) = es.eigenvectors().col(un[i]).cwiseProduct(scale).transpose();
    sp.unstable_dirs.col(i) = es.eigenvectors().col(un[i]).cwiseQuotient(scale);
    sp.unstable_rates[i] = ev[un[i]];
  }
  return sp;
}

Splitting morse_splitting(const ActionContext& ctx, const Vec& c, double tol_spec,
                          const CompactPerturbation* k) {
  const GalerkinSpace& s = ctx.space();
  const Vec r = s.weights().cwiseSqrt();
  Mat sym = -hessian_at(ctx, c).matrix;
  if (k && k->active()) sym += r.asDiagonal() * k->jacobian(ctx, c) * r.cwiseInverse().asDiagonal();
  return split_symmetric(sym, r, tol_spec);
}

namespace {
Vec floer_diagonal(const GalerkinSpace& s) {
  Vec d(s.dim_total());
  for (int k = -s.N; k <= s.N; ++k) d.segment(s.offset(k), s.dim()).setConstant(kTwoPi * k);
  return d;
}
}  // namespace

Splitting floer_splitting(const ActionContext& ctx, const Vec& c, double tol_spec) {
  const GalerkinSpace& s = ctx.space();
  Mat sym = -ctx.hess_h_form(c);
  sym.diagonal() += floer_diagonal(s);
  return split_symmetric(sym, Vec::Ones(s.dim_total()), tol_spec);
}

Vec floer_rhs(const ActionContext& ctx, const Vec& y) {
  return floer_diagonal(ctx.space()).cwiseProduct(y) - ctx.grad_h_modes(y);
}

VectorField morse_field(std::shared_ptr<const ActionContext> ctx,
                        std::shared_ptr<const CompactPerturbation> k) {
  VectorField vf;
  if (k && k->active()) {
    vf.f = [ctx, k](const Vec& y) { return Vec(-ctx->gradient(y) + (*k)(*ctx, y)); };
    vf.jac = [ctx, k](const Vec& y) {
      return Mat(ctx->vector_field_jacobian(y) + k->jacobian(*ctx, y));
    };
  } else {
    vf.f = [ctx](const Vec& y) { return Vec(-ctx->gradient(y)); };
    vf.jac = [ctx](const Vec& y) { return ctx->vector_field_jacobian(y); };
  }
  return vf;
}

VectorField floer_field(std::shared_ptr<const ActionContext> ctx) {
  const Vec diag = floer_diagonal(ctx->space());
  VectorField vf;
  vf.f = [ctx](const Vec& y) { return floer_rhs(*ctx, y); };
  vf.jac = [ctx, diag](const Vec& y) {
    Mat j = -ctx->hess_h_form(y);
    j.diagonal() += diag;
    return j;
  };
  return vf;
}

Vec refine_critical(const ActionContext& ctx, const Vec& guess, double tol) {
  const Vec w = ctx.space().weights();
  Vec y = guess;
  for (int it = 0; it < 30; ++it) {
    const Vec r = ctx.action_differential(y);
    if (r.cwiseAbs().maxCoeff() < tol) return y;
    const Mat j = -(w.asDiagonal() * ctx.vector_field_jacobian(y));
    y -= j.fullPivLu().solve(r);
  }
  const Vec r = ctx.action_differential(y);
  if (r.cwiseAbs().maxCoeff() > 1e3 * tol)
    throw Error(ErrorKind::NoSolution, "critical",
                "truncated critical point did not converge from the orbit's Fourier projection");
  return y;
}

std::vector<CriticalPoint> critical_points(const ActionContext& ctx,
                                           const std::vector<PeriodicOrbit>& orbits,
                                           double tol_spec) {
  std::vector<CriticalPoint> out;
  const GalerkinSpace& s = ctx.space();
  for (const auto& o : orbits) {
    CriticalPoint c;
    c.id = o.id;
    Vec guess = o.as_loop(s.N).to_vector();
    c.modes = refine_critical(ctx, guess);
    c.modes.segment(s.offset(0), s.dim()) = reduce_mod1(c.modes.segment(s.offset(0), s.dim()));
    c.action = ctx.action(c.modes);
    c.m = morse_splitting(ctx, c.modes, tol_spec).d_u() - s.dim_v();
    c.mu = o.cz;
    out.push_back(c);
  }
  return out;
}

Vec shift_base(const GalerkinSpace& space, const Vec& modes, const Vec& lattice) {
  Vec out = modes;
  out.segment(space.offset(0), space.dim()) += lattice;
  return out;
}

Vec lattice_offset(const GalerkinSpace& space, const Vec& a, const Vec& b) {
  const Vec d = a.segment(space.offset(0), space.dim()) - b.segment(space.offset(0), space.dim());
  return d.array().round().matrix();
}

double lifted_distance(const GalerkinSpace& space, const Vec& a, const Vec& b) {
  const Vec d = a - b;
  return std::sqrt(d.dot(d.cwiseProduct(space.weights())));
}

}  // namespace floer
