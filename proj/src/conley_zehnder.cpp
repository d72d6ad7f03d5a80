#include "torus_floer/conley_zehnder.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "torus_floer/errors.hpp"

namespace floer {

namespace {

using CMat = Eigen::MatrixXcd;
using Cplx = std::complex<double>;

double wrap_angle(double a) {
  a = std::remainder(a, kTwoPi);
  return a <= -kPi ? a + kTwoPi : a;
}

/// Reference data for the doubled space: orthonormal basis of the diagonal and
/// the compatible complex structure (-J0) + J0.
struct Doubled {
  Mat z0;
  Mat jz0;
  explicit Doubled(int n) {
    const int d = 2 * n;
    z0 = Mat::Zero(2 * d, d);
    z0.topRows(d).setIdentity();
    z0.bottomRows(d).setIdentity();
    z0 /= std::sqrt(2.0);
    Mat jj = Mat::Zero(2 * d, 2 * d);
    jj.topLeftCorner(d, d) = -standard_j(n);
    jj.bottomRightCorner(d, d) = standard_j(n);
    jz0 = jj * z0;
  }
};

Eigen::VectorXd angles_with(const Doubled& ref, const Mat& psi) {
  const int d = static_cast<int>(psi.rows());
  Mat graph(2 * d, d);
  graph.topRows(d).setIdentity();
  graph.bottomRows(d) = psi;
  Eigen::HouseholderQR<Mat> qr(graph);
  const Mat z = qr.householderQ() * Mat::Identity(2 * d, d);
  CMat u(d, d);
  u.real() = ref.z0.transpose() * z;
  u.imag() = ref.jz0.transpose() * z;
  const CMat w = u * u.transpose();
  Eigen::ComplexEigenSolver<CMat> es(w, false);
  Eigen::VectorXd out(d);
  for (int i = 0; i < d; ++i) out[i] = std::arg(es.eigenvalues()[i]);
  return out;
}

/// Matches new wrapped angles to previously lifted ones; returns the increments.
Eigen::VectorXd match_increments(const Eigen::VectorXd& lifted, const Eigen::VectorXd& next) {
  const int d = static_cast<int>(next.size());
  std::vector<int> perm(d);
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::VectorXd best(d);
  double best_cost = std::numeric_limits<double>::infinity();
  auto consider = [&](const std::vector<int>& p) {
    double cost = 0.0;
    Eigen::VectorXd inc(d);
    for (int j = 0; j < d; ++j) {
      inc[j] = wrap_angle(next[p[j]] - lifted[j]);
      cost += std::abs(inc[j]);
    }
    if (cost < best_cost) {
      best_cost = cost;
      best = inc;
    }
  };
  if (d <= 6) {
    do consider(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    // Greedy nearest assignment for larger systems.
    std::vector<bool> used(d, false);
    for (int j = 0; j < d; ++j) {
      int arg = -1;
      double c = 1e300;
      for (int i = 0; i < d; ++i) {
        if (used[i]) continue;
        const double v = std::abs(wrap_angle(next[i] - lifted[j]));
        if (v < c) {
          c = v;
          arg = i;
        }
      }
      used[arg] = true;
      perm[j] = arg;
    }
    consider(perm);
  }
  return best;
}

Mat matrix_sqrt_psd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

Mat log_spd(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  return es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

Mat exp_sym(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.transpose()));
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Orthogonal symplectic [[A, B], [-B, A]] <-> unitary A + iB.
CMat to_unitary(const Mat& o, int n) {
  CMat u(n, n);
  u.real() = o.topLeftCorner(n, n);
  u.imag() = o.topRightCorner(n, n);
  return u;
}

Mat from_unitary(const CMat& u) {
  const auto n = u.rows();
  Mat o(2 * n, 2 * n);
  o.topLeftCorner(n, n) = u.real();
  o.topRightCorner(n, n) = u.imag();
  o.bottomLeftCorner(n, n) = -u.imag();
  o.bottomRightCorner(n, n) = u.real();
  return o;
}

CMat unitary_sqrt(const CMat& v) {
  Eigen::ComplexEigenSolver<CMat> es(v);
  Eigen::VectorXcd d = es.eigenvalues();
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::sqrt(d[i]);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().inverse();
}

}  // namespace

Eigen::VectorXd souriau_angles(const Mat& psi) {
  const Doubled ref(static_cast<int>(psi.rows() / 2));
  return angles_with(ref, psi);
}

Mat polar_midpoint(const Mat& a, const Mat& b) {
  const int n = static_cast<int>(a.rows() / 2);
  const Mat pa = matrix_sqrt_psd(a * a.transpose());
  const Mat pb = matrix_sqrt_psd(b * b.transpose());
  const Mat oa = pa.llt().solve(a);
  const Mat ob = pb.llt().solve(b);
  const Mat p = exp_sym(0.5 * (log_spd(pa) + log_spd(pb)));
  const CMat ua = to_unitary(oa, n);
  const CMat ub = to_unitary(ob, n);
  const CMat um = ua * unitary_sqrt(ua.adjoint() * ub);
  return p * from_unitary(um);
}

namespace {

struct Node {
  double t;
  Mat psi;
};

/// Raw index with the internal orientation: sum_j floor(phi_j / 2pi) + 1/2.
double raw_index(const SymplecticPath& path, const CzOptions& opts) {
  const int n = path.n;
  const Doubled ref(n);
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < path.mats.size(); ++i) nodes.push_back({path.times[i], path.mats[i]});

  Eigen::VectorXd lifted = Eigen::VectorXd::Zero(2 * n);
  Eigen::VectorXd wrapped = angles_with(ref, nodes.front().psi);
  // The path starts at the identity, whose graph is the diagonal: all angles 0.
  lifted = match_increments(lifted, wrapped);

  const double quarter = kPi / 2.0;
  // Advances `lifted` from a to b, bisecting while any angle moves a quarter turn.
  std::function<void(const Node&, const Node&, int)> advance = [&](const Node& a, const Node& b,
                                                                   int depth) {
    const Eigen::VectorXd inc = match_increments(lifted, angles_with(ref, b.psi));
    if (inc.cwiseAbs().maxCoeff() < quarter) {
      lifted += inc;
      return;
    }
    if (depth >= opts.max_doublings) {
      std::ostringstream os;
      os << "eigen-angle winding unresolved near t=" << a.t << " after " << depth
         << " interval doublings";
      throw Error(ErrorKind::Resolution, "conley_zehnder", os.str());
    }
    const double tm = 0.5 * (a.t + b.t);
    const Node mid{tm, path.generator ? propagate(path.generator, n, a.psi, a.t, tm, 4)
                                      : polar_midpoint(a.psi, b.psi)};
    advance(a, mid, depth + 1);
    advance(mid, b, depth + 1);
  };
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) advance(nodes[i], nodes[i + 1], 0);
  double acc = 0.0;
  for (Eigen::Index j = 0; j < lifted.size(); ++j) acc += std::floor(lifted[j] / kTwoPi) + 0.5;
  return acc;
}

/// +1 or -1 so that exp(J0 pi t) on R^2 has index -1.
double orientation_constant() {
  static const double sign = [] {
    const Mat s = kPi * Mat::Identity(2, 2);
    const double raw = raw_index(constant_generator_path(s, 64), CzOptions{});
    return raw < 0 ? 1.0 : -1.0;
  }();
  return sign;
}

}  // namespace

int cz_index(const SymplecticPath& path, const CzOptions& opts) {
  if (path.mats.empty() || path.mats.size() != path.times.size())
    throw Error(ErrorKind::Dimension, "conley_zehnder", "empty or inconsistent path");
  const int d = 2 * path.n;
  if ((path.mats.front() - Mat::Identity(d, d)).norm() > 1e-12)
    throw Error(ErrorKind::Dimension, "conley_zehnder", "path must start at the identity");
  const double margin = std::abs((Mat::Identity(d, d) - path.end()).determinant());
  if (margin <= opts.tol_deg) {
    std::ostringstream os;
    os << "degenerate endpoint: |det(I - Psi(1))| = " << margin;
    throw Error(ErrorKind::Degenerate, "conley_zehnder", os.str());
  }
  const double idx = orientation_constant() * raw_index(path, opts);
  return static_cast<int>(std::lround(idx));
}

}  // namespace floer
