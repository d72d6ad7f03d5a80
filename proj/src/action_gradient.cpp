#include "torus_floer/action_gradient.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "torus_floer/errors.hpp"

namespace floer {

ActionContext::ActionContext(const TrigHamiltonian& h, GalerkinSpace space, int samples)
    : h_(h), tr_(space, samples > 0 ? samples : default_samples(space.N)) {
  if (h.n() != space.n) throw Error(ErrorKind::Dimension, "action_gradient", "n mismatch");
}

double ActionContext::action(const Vec& x) const {
  const GalerkinSpace& s = space();
  double split = 0.0;
  for (int k = 1; k <= s.N; ++k) {
    split += s.weight(k) * (x.segment(s.offset(k), s.dim()).squaredNorm() -
                            x.segment(s.offset(-k), s.dim()).squaredNorm());
  }
  const Mat pts = tr_.synthesize(x);
  double ham = 0.0;
  for (int m = 0; m < tr_.samples(); ++m) ham += h_.value(tr_.time(m), pts.col(m));
  return -0.5 * split + ham / tr_.samples();
}

Vec ActionContext::grad_h_modes(const Vec& x) const {
  const Mat pts = tr_.synthesize(x);
  Mat g(pts.rows(), pts.cols());
  for (int m = 0; m < tr_.samples(); ++m) g.col(m) = h_.gradient(tr_.time(m), pts.col(m));
  return tr_.analyze(g);
}

Mat ActionContext::hess_h_form(const Vec& x) const {
  const Mat pts = tr_.synthesize(x);
  std::vector<Mat> s(tr_.samples());
  for (int m = 0; m < tr_.samples(); ++m) s[m] = h_.hessian(tr_.time(m), pts.col(m));
  return tr_.bilinear(s);
}

Vec ActionContext::gradient(const Vec& x) const {
  const GalerkinSpace& s = space();
  Vec out = project(s, x, Part::Minus) - project(s, x, Part::Plus);
  out += jstar(s, grad_h_modes(x));
  return out;
}

Vec ActionContext::action_differential(const Vec& x) const {
  return gradient(x).cwiseProduct(space().weights());
}

Mat ActionContext::vector_field_jacobian(const Vec& x) const {
  const GalerkinSpace& s = space();
  const Vec w = s.weights();
  Mat jac = -(w.cwiseInverse().asDiagonal() * hess_h_form(x));
  for (int k = -s.N; k <= s.N; ++k) {
    const double d = k > 0 ? 1.0 : (k < 0 ? -1.0 : 0.0);
    for (int i = 0; i < s.dim(); ++i) jac(s.offset(k) + i, s.offset(k) + i) += d;
  }
  return jac;
}

Mat HessianMatrix::raw() const {
  const Vec r = space.weights().cwiseSqrt();
  return r.cwiseInverse().asDiagonal() * matrix * r.asDiagonal();
}

HessianMatrix hessian_at(const ActionContext& ctx, const Vec& x) {
  const GalerkinSpace& s = ctx.space();
  const Vec rinv = s.weights().cwiseSqrt().cwiseInverse();
  HessianMatrix out{s, rinv.asDiagonal() * ctx.hess_h_form(x) * rinv.asDiagonal()};
  for (int k = -s.N; k <= s.N; ++k) {
    const double d = k > 0 ? -1.0 : (k < 0 ? 1.0 : 0.0);
    for (int i = 0; i < s.dim(); ++i) out.matrix(s.offset(k) + i, s.offset(k) + i) += d;
  }
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose());
  return out;
}

double action(const TrigHamiltonian& h, const FourierLoop& x) {
  return ActionContext(h, x.space()).action(x.to_vector());
}

Vec gradient(const TrigHamiltonian& h, const FourierLoop& x) {
  return ActionContext(h, x.space()).gradient(x.to_vector());
}

HessianMatrix hessian(const TrigHamiltonian& h, const FourierLoop& x) {
  return hessian_at(ActionContext(h, x.space()), x.to_vector());
}

int relative_index_at(const TrigHamiltonian& h, const PeriodicOrbit& orbit,
                      const GalerkinSpace& space, double tol_spec) {
  const HessianMatrix hs = hessian(h, orbit.as_loop(space.N));
  Eigen::SelfAdjointEigenSolver<Mat> es(hs.matrix, Eigen::EigenvaluesOnly);
  const Vec ev = es.eigenvalues();
  const double gap = ev.cwiseAbs().minCoeff();
  if (gap <= tol_spec) {
    std::ostringstream os;
    os << "Hessian eigenvalue " << gap << " within tol_spec of 0 at orbit " << orbit.id
       << " (N=" << space.N << ")";
    throw Error(ErrorKind::SpectralGap, "action_gradient", os.str());
  }
  int unstable = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] < 0.0) ++unstable;
  return unstable - space.dim_v();
}

int relative_index(const TrigHamiltonian& h, const PeriodicOrbit& orbit, const GalerkinSpace& space,
                   const IndexOptions& opts) {
  const double tail = orbit.tail_norm(space.N);
  if (tail > opts.tol_trunc) {
    std::ostringstream os;
    os << "orbit " << orbit.id << " has Fourier tail " << tail << " beyond N=" << space.N
       << " (tol_trunc " << opts.tol_trunc << "); raise N";
    throw Error(ErrorKind::Truncation, "action_gradient", os.str());
  }
  const int m = relative_index_at(h, orbit, space, opts.tol_spec);
  const GalerkinSpace wider{space.n, space.N + 2};
  const int m2 = relative_index_at(h, orbit, wider, opts.tol_spec);
  if (m != m2) {
    std::ostringstream os;
    os << "relative index of orbit " << orbit.id << " changes from " << m << " at N=" << space.N
       << " to " << m2 << " at N=" << wider.N << "; raise N";
    throw Error(ErrorKind::Truncation, "action_gradient", os.str());
  }
  return m;
}

int relative_dimension(const Mat& w, const Mat& v, double tol) {
  auto rank = [tol](const Mat& a) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<Mat> svd(a);
    int r = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > tol) ++r;
    return r;
  };
  const int w_cap_vperp = static_cast<int>(w.cols()) - rank(v.transpose() * w);
  const int wperp_cap_v = static_cast<int>(v.cols()) - rank(w.transpose() * v);
  return w_cap_vperp - wperp_cap_v;
}

int relative_index_projection(const HessianMatrix& hess, double tol_spec) {
  const GalerkinSpace& s = hess.space;
  Eigen::SelfAdjointEigenSolver<Mat> es(hess.matrix);
  std::vector<int> cols;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()[i]) <= tol_spec)
      throw Error(ErrorKind::SpectralGap, "action_gradient", "Hessian eigenvalue too close to 0");
    if (es.eigenvalues()[i] < 0.0) cols.push_back(static_cast<int>(i));
  }
  Mat w(s.dim_total(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) w.col(j) = es.eigenvectors().col(cols[j]);
  Mat v = Mat::Zero(s.dim_total(), s.dim_v());
  int c = 0;
  for (int i = 0; i < s.n; ++i) v(s.offset(0) + i, c++) = 1.0;
  for (int k = 1; k <= s.N; ++k)
    for (int i = 0; i < s.dim(); ++i) v(s.offset(k) + i, c++) = 1.0;
  return relative_dimension(w, v);
}

}  // namespace floer
