#include "torus_floer/loopspace.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "torus_floer/errors.hpp"

namespace floer {

double GalerkinSpace::weight(int k) const { return k == 0 ? 1.0 : kTwoPi * std::abs(k); }

Vec GalerkinSpace::weights() const {
  Vec w(dim_total());
  for (int k = -N; k <= N; ++k) w.segment(offset(k), dim()).setConstant(weight(k));
  return w;
}

void require_same_space(const GalerkinSpace& a, const GalerkinSpace& b, const char* where) {
  if (!(a == b)) {
    std::ostringstream os;
    os << where << ": mismatched Galerkin spaces (n=" << a.n << ", N=" << a.N << ") vs (n=" << b.n
       << ", N=" << b.N << ")";
    throw Error(ErrorKind::Dimension, "loopspace", os.str());
  }
}

FourierLoop::FourierLoop(int n, int N)
    : n_(n), N_(N), base_(Vec::Zero(2 * n)), coeffs_(Mat::Zero(2 * n, 2 * N)) {
  if (n < 1 || N < 1) throw Error(ErrorKind::Dimension, "loopspace", "n and N must be positive");
}

FourierLoop::FourierLoop(int n, int N, const Vec& base, const Mat& coeffs) : FourierLoop(n, N) {
  if (base.size() != 2 * n || coeffs.rows() != 2 * n || coeffs.cols() != 2 * N)
    throw Error(ErrorKind::Dimension, "loopspace", "loop data does not match (n, N)");
  if (!base.allFinite() || !coeffs.allFinite())
    throw Error(ErrorKind::Dimension, "loopspace", "loop data must be finite");
  base_ = reduce_mod1(base);
  coeffs_ = coeffs;
}

FourierLoop FourierLoop::constant(const Vec& c, int N) {
  const int n = static_cast<int>(c.size() / 2);
  return FourierLoop(n, N, c, Mat::Zero(2 * n, 2 * N));
}

FourierLoop FourierLoop::single_mode(const Vec& base, int N, int k, const Vec& v) {
  const int n = static_cast<int>(base.size() / 2);
  if (k == 0 || std::abs(k) > N)
    throw Error(ErrorKind::Dimension, "loopspace", "single_mode needs 0 < |k| <= N");
  Mat c = Mat::Zero(2 * n, 2 * N);
  c.col(k < 0 ? k + N : k + N - 1) = v;
  return FourierLoop(n, N, base, c);
}

FourierLoop FourierLoop::from_vector(const GalerkinSpace& space, const Vec& modes) {
  if (modes.size() != space.dim_total())
    throw Error(ErrorKind::Dimension, "loopspace", "mode vector has wrong length");
  const int d = space.dim();
  Mat c(d, 2 * space.N);
  for (int k = -space.N; k <= space.N; ++k) {
    if (k == 0) continue;
    c.col(k < 0 ? k + space.N : k + space.N - 1) = modes.segment(space.offset(k), d);
  }
  return FourierLoop(space.n, space.N, modes.segment(space.offset(0), d), c);
}

Vec FourierLoop::coeff(int k) const {
  if (k == 0) return base_;
  if (std::abs(k) > N_) return Vec::Zero(2 * n_);
  return coeffs_.col(column(k));
}

Vec FourierLoop::to_vector() const {
  const GalerkinSpace s = space();
  Vec v(s.dim_total());
  for (int k = -N_; k <= N_; ++k) v.segment(s.offset(k), s.dim()) = coeff(k);
  return v;
}

Vec FourierLoop::to_vector_near(const Vec& anchor) const {
  Vec v = to_vector();
  const GalerkinSpace s = space();
  v.segment(s.offset(0), s.dim()) = anchor + wrap_half(base_ - anchor);
  return v;
}

double inner_hs(const FourierLoop& x, const FourierLoop& y, double s) {
  require_same_space(x.space(), y.space(), "inner_hs");
  const Vec y0 = x.base() + wrap_half(y.base() - x.base());
  double acc = x.base().dot(y0);
  for (int k = 1; k <= x.N(); ++k) {
    const double w = kTwoPi * std::pow(static_cast<double>(k), 2.0 * s);
    acc += w * (x.coeff(k).dot(y.coeff(k)) + x.coeff(-k).dot(y.coeff(-k)));
  }
  return acc;
}

double inner_l2(const FourierLoop& x, const FourierLoop& y) {
  require_same_space(x.space(), y.space(), "inner_l2");
  const Vec y0 = x.base() + wrap_half(y.base() - x.base());
  double acc = x.base().dot(y0);
  for (int k = 1; k <= x.N(); ++k)
    acc += x.coeff(k).dot(y.coeff(k)) + x.coeff(-k).dot(y.coeff(-k));
  return acc;
}

double inner_hs(const GalerkinSpace& space, const Vec& x, const Vec& y, double s) {
  double acc = 0.0;
  for (int k = -space.N; k <= space.N; ++k) {
    const double w = k == 0 ? 1.0 : kTwoPi * std::pow(static_cast<double>(std::abs(k)), 2.0 * s);
    acc += w * x.segment(space.offset(k), space.dim()).dot(y.segment(space.offset(k), space.dim()));
  }
  return acc;
}

Vec project(const GalerkinSpace& space, const Vec& x, Part part) {
  Vec out = Vec::Zero(x.size());
  for (int k = -space.N; k <= space.N; ++k) {
    const bool keep = (part == Part::Plus && k > 0) || (part == Part::Minus && k < 0) ||
                      (part == Part::Zero && k == 0);
    if (keep) out.segment(space.offset(k), space.dim()) = x.segment(space.offset(k), space.dim());
  }
  return out;
}

Vec jstar(const GalerkinSpace& space, const Vec& y) {
  return y.cwiseQuotient(space.weights());
}

FourierLoop project(const FourierLoop& x, Part part) {
  const GalerkinSpace s = x.space();
  Vec v = project(s, x.to_vector(), part);
  return FourierLoop::from_vector(s, v);
}

FourierLoop jstar(const FourierLoop& y) {
  const GalerkinSpace s = y.space();
  return FourierLoop::from_vector(s, jstar(s, y.to_vector()));
}

Vec eval_lifted(const FourierLoop& x, double t) {
  Vec p = x.base();
  for (int k = -x.N(); k <= x.N(); ++k) {
    if (k == 0) continue;
    const double th = kTwoPi * k * t;
    const Vec c = x.coeff(k);
    p += std::cos(th) * c + std::sin(th) * apply_j(c);
  }
  return p;
}

Vec eval_loop(const FourierLoop& x, double t) { return reduce_mod1(eval_lifted(x, t)); }

ModeTransform::ModeTransform(GalerkinSpace space, int samples) : space_(space), samples_(samples) {
  if (samples <= 2 * space.N)
    throw Error(ErrorKind::Dimension, "loopspace", "need more than 2N samples per loop");
  const int d = space.dim();
  const Mat j = standard_j(space.n);
  basis_.reserve(samples);
  for (int m = 0; m < samples; ++m) {
    Mat b(d, space.dim_total());
    for (int k = -space.N; k <= space.N; ++k) {
      const double th = kTwoPi * k * time(m);
      b.middleCols(space.offset(k), d) = std::cos(th) * Mat::Identity(d, d) + std::sin(th) * j;
    }
    basis_.push_back(std::move(b));
  }
}

Mat ModeTransform::synthesize(const Vec& modes) const {
  Mat out(space_.dim(), samples_);
  for (int m = 0; m < samples_; ++m) out.col(m) = basis_[m] * modes;
  return out;
}

Vec ModeTransform::analyze(const Mat& values) const {
  Vec acc = Vec::Zero(space_.dim_total());
  for (int m = 0; m < samples_; ++m) acc.noalias() += basis_[m].transpose() * values.col(m);
  return acc / samples_;
}

Mat ModeTransform::bilinear(const std::vector<Mat>& s) const {
  const int dt = space_.dim_total();
  Mat acc = Mat::Zero(dt, dt);
  for (int m = 0; m < samples_; ++m) {
    const Mat sb = s[m] * basis_[m];
    acc.noalias() += basis_[m].transpose() * sb;
  }
  acc /= samples_;
  // Exact symmetry; quadrature sums are symmetric only up to rounding order.
  return 0.5 * (acc + acc.transpose());
}

int default_samples(int N) { return 8 * N + 16; }

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {
void append_array(std::ostringstream& os, const Vec& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_real(v[i]);
  os << ']';
}
}  // namespace

std::string to_json(const FourierLoop& x) {
  std::ostringstream os;
  os << "{\"n\":" << x.n() << ",\"N\":" << x.N() << ",\"base\":";
  append_array(os, x.base());
  os << ",\"coeffs\":[";
  bool first = true;
  for (int k = -x.N(); k <= x.N(); ++k) {
    if (k == 0) continue;
    os << (first ? "" : ",") << "{\"k\":" << k << ",\"v\":";
    append_array(os, x.coeff(k));
    os << '}';
    first = false;
  }
  os << "]}";
  return os.str();
}

FourierLoop loop_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int n = j.at("n").get<int>();
  const int N = j.at("N").get<int>();
  const auto base = j.at("base").get<std::vector<double>>();
  if (static_cast<int>(base.size()) != 2 * n)
    throw Error(ErrorKind::Dimension, "loopspace", "base has wrong length");
  Mat c = Mat::Zero(2 * n, 2 * N);
  for (const auto& e : j.at("coeffs")) {
    const int k = e.at("k").get<int>();
    const auto v = e.at("v").get<std::vector<double>>();
    if (k == 0 || std::abs(k) > N || static_cast<int>(v.size()) != 2 * n)
      throw Error(ErrorKind::Dimension, "loopspace", "coefficient entry out of range");
    c.col(k < 0 ? k + N : k + N - 1) = Eigen::Map<const Vec>(v.data(), 2 * n);
  }
  return FourierLoop(n, N, Eigen::Map<const Vec>(base.data(), 2 * n), c);
}

}  // namespace floer
