#include "torus_floer/bvp.hpp"

#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "torus_floer/errors.hpp"

namespace floer {

int BvpProblem::unknowns() const {
  int u = 0;
  for (const auto& s : segments) u += (s.intervals + 1) * dim;
  return u;
}

int BvpProblem::equations() const {
  int e = 0;
  for (const auto& s : segments) e += s.intervals * dim;
  for (const auto& c : linear) e += static_cast<int>(c.rows.rows());
  e += static_cast<int>(matches.size()) * dim;
  e += static_cast<int>(scalars.size());
  return e;
}

int BvpProblem::offset(int segment) const {
  int o = 0;
  for (int i = 0; i < segment; ++i) o += (segments[i].intervals + 1) * dim;
  return o;
}

Vec pack_nodes(const BvpProblem& p, const std::vector<Mat>& nodes) {
  Vec z(p.unknowns());
  for (std::size_t s = 0; s < p.segments.size(); ++s) {
    if (nodes[s].rows() != p.dim || nodes[s].cols() != p.segments[s].intervals + 1)
      throw Error(ErrorKind::Dimension, "bvp", "guess does not match the segment grid");
    z.segment(p.offset(static_cast<int>(s)), nodes[s].size()) =
        Eigen::Map<const Vec>(nodes[s].data(), nodes[s].size());
  }
  return z;
}

std::vector<Mat> unpack_nodes(const BvpProblem& p, const Vec& z) {
  std::vector<Mat> out;
  for (std::size_t s = 0; s < p.segments.size(); ++s) {
    const int cols = p.segments[s].intervals + 1;
    out.push_back(Eigen::Map<const Mat>(z.data() + p.offset(static_cast<int>(s)), p.dim, cols));
  }
  return out;
}

namespace {

using Triplet = Eigen::Triplet<double>;

struct Assembly {
  Vec r;
  std::vector<Triplet> trips;
};

void add_block(std::vector<Triplet>& t, int row, int col, const Mat& b) {
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index i = 0; i < b.rows(); ++i)
      if (b(i, j) != 0.0) t.emplace_back(row + static_cast<int>(i), col + static_cast<int>(j), b(i, j));
}

Assembly assemble(const BvpProblem& p, const Vec& z, bool with_jacobian) {
  const int d = p.dim;
  Assembly a;
  a.r.resize(p.equations());
  const Mat eye = Mat::Identity(d, d);
  int row = 0;
  for (std::size_t s = 0; s < p.segments.size(); ++s) {
    const Segment& seg = p.segments[s];
    const int base = p.offset(static_cast<int>(s));
    const double h = seg.h();
    std::vector<Vec> f(seg.intervals + 1);
    std::vector<Mat> jf(with_jacobian ? seg.intervals + 1 : 0);
    for (int i = 0; i <= seg.intervals; ++i) {
      const Vec y = z.segment(base + i * d, d);
      f[i] = seg.field.f(y);
      if (with_jacobian) jf[i] = seg.field.jac(y);
    }
    for (int i = 0; i < seg.intervals; ++i) {
      const Vec y0 = z.segment(base + i * d, d);
      const Vec y1 = z.segment(base + (i + 1) * d, d);
      const Vec ym = 0.5 * (y0 + y1) + h / 8.0 * (f[i] - f[i + 1]);
      const Vec fm = seg.field.f(ym);
      a.r.segment(row, d) = y1 - y0 - h / 6.0 * (f[i] + 4.0 * fm + f[i + 1]);
      if (with_jacobian) {
        const Mat jm = seg.field.jac(ym);
        const Mat d0 = -eye - h / 6.0 * (jf[i] + 4.0 * jm * (0.5 * eye + h / 8.0 * jf[i]));
        const Mat d1 = eye - h / 6.0 * (jf[i + 1] + 4.0 * jm * (0.5 * eye - h / 8.0 * jf[i + 1]));
        add_block(a.trips, row, base + i * d, d0);
        add_block(a.trips, row, base + (i + 1) * d, d1);
      }
      row += d;
    }
  }
  for (const auto& c : p.linear) {
    const int col = p.offset(c.segment) + c.node * d;
    const Vec y = z.segment(col, d);
    a.r.segment(row, c.rows.rows()) = c.rows * (y - c.target);
    if (with_jacobian) add_block(a.trips, row, col, c.rows);
    row += static_cast<int>(c.rows.rows());
  }
  for (const auto& m : p.matches) {
    const int ca = p.offset(m.seg_a) + m.node_a * d;
    const int cb = p.offset(m.seg_b) + m.node_b * d;
    a.r.segment(row, d) = z.segment(ca, d) - z.segment(cb, d);
    if (with_jacobian) {
      add_block(a.trips, row, ca, eye);
      add_block(a.trips, row, cb, -eye);
    }
    row += d;
  }
  for (const auto& sc : p.scalars) {
    const int col = p.offset(sc.segment) + sc.node * d;
    const Vec y = z.segment(col, d);
    a.r[row] = sc.g(y) - sc.value;
    if (with_jacobian) add_block(a.trips, row, col, sc.dg(y).transpose());
    ++row;
  }
  return a;
}

}  // namespace

Vec bvp_residual(const BvpProblem& p, const Vec& z) { return assemble(p, z, false).r; }

Mat bvp_jacobian_dense(const BvpProblem& p, const Vec& z) {
  const Assembly a = assemble(p, z, true);
  Eigen::SparseMatrix<double> j(p.equations(), p.unknowns());
  j.setFromTriplets(a.trips.begin(), a.trips.end());
  return Mat(j);
}

BvpResult solve_bvp(const BvpProblem& p, const std::vector<Mat>& guess, const NewtonOptions& opts) {
  if (p.equations() != p.unknowns())
    throw Error(ErrorKind::Dimension, "bvp",
                "boundary value problem is not square: " + std::to_string(p.equations()) +
                    " equations, " + std::to_string(p.unknowns()) + " unknowns");
  BvpResult res;
  Vec z = pack_nodes(p, guess);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  Assembly a = assemble(p, z, true);
  for (int it = 0; it < opts.max_iter; ++it) {
    const double rnorm = a.r.cwiseAbs().maxCoeff();
    res.history.push_back(rnorm);
    res.iterations = it;
    if (!std::isfinite(rnorm)) break;
    if (rnorm < opts.tol) {
      res.converged = true;
      break;
    }
    Eigen::SparseMatrix<double> j(p.equations(), p.unknowns());
    j.setFromTriplets(a.trips.begin(), a.trips.end());
    j.makeCompressed();
    if (!analyzed) {
      lu.analyzePattern(j);
      analyzed = true;
    }
    lu.factorize(j);
    if (lu.info() != Eigen::Success) break;
    const Vec dz = lu.solve(-a.r);
    if (lu.info() != Eigen::Success || !dz.allFinite()) break;
    const double merit = a.r.squaredNorm();
    double lambda = 1.0;
    bool accepted = false;
    for (int b = 0; b <= opts.max_backtrack; ++b) {
      const Vec trial = z + lambda * dz;
      Assembly at = assemble(p, trial, false);
      if (at.r.allFinite() && at.r.squaredNorm() < (1.0 - 1e-4 * lambda) * merit) {
        z = trial;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    a = assemble(p, z, true);
  }
  if (!res.converged) {
    const double rnorm = a.r.cwiseAbs().maxCoeff();
    if (rnorm < opts.tol) res.converged = true;
    res.residual = rnorm;
  } else {
    res.residual = res.history.back();
  }
  res.nodes = unpack_nodes(p, z);
  return res;
}

double segment_integral(const Segment& seg, const Mat& nodes,
                        const std::function<double(const Vec&, const Vec&)>& integrand) {
  const double h = seg.h();
  double acc = 0.0;
  for (int i = 0; i < seg.intervals; ++i) {
    const Vec y0 = nodes.col(i), y1 = nodes.col(i + 1);
    const Vec f0 = seg.field.f(y0), f1 = seg.field.f(y1);
    const Vec ym = 0.5 * (y0 + y1) + h / 8.0 * (f0 - f1);
    const Vec fm = seg.field.f(ym);
    acc += h / 6.0 * (integrand(y0, f0) + 4.0 * integrand(ym, fm) + integrand(y1, f1));
  }
  return acc;
}

}  // namespace floer
