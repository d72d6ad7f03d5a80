#include "torus_floer/types.hpp"

#include <cmath>

#include "torus_floer/errors.hpp"

namespace floer {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Degenerate: return "degenerate-orbit";
    case ErrorKind::IntegrationQuality: return "integration-quality";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::SpectralGap: return "spectral-gap";
    case ErrorKind::Stiffness: return "stiffness";
    case ErrorKind::NoSolution: return "no-solution";
    case ErrorKind::Undecided: return "undecided-launch";
    case ErrorKind::Structural: return "structural";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Structural: return 2;
    case ErrorKind::Config: return 4;
    default: return 3;
  }
}

Mat standard_j(int n) {
  Mat j = Mat::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n).setIdentity();
  j.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return j;
}

Vec apply_j(const Vec& v) {
  const auto n = v.size() / 2;
  Vec out(v.size());
  out.head(n) = v.tail(n);
  out.tail(n) = -v.head(n);
  return out;
}

Mat rotation(int n, double theta) {
  return std::cos(theta) * Mat::Identity(2 * n, 2 * n) + std::sin(theta) * standard_j(n);
}

Vec reduce_mod1(const Vec& x) {
  Vec r(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double v = x[i] - std::floor(x[i]);
    if (v >= 1.0) v -= 1.0;
    r[i] = v;
  }
  return r;
}

Vec wrap_half(const Vec& d) {
  Vec r(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    // ceil(v - 1/2) maps the representative into (-1/2, 1/2].
    r[i] = d[i] - std::ceil(d[i] - 0.5);
  }
  return r;
}

double torus_distance(const Vec& a, const Vec& b) { return wrap_half(a - b).norm(); }

}  // namespace floer

#include <atomic>
#include <iostream>
#include <mutex>

#include "torus_floer/log.hpp"

namespace floer {

namespace {
std::atomic<int> g_level{1};
std::mutex g_log_mutex;
}  // namespace

void set_log_level(int level) { g_level = level; }
int log_level() { return g_level; }

void log_warn(const std::string& msg) {
  if (g_level < 1) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "warning: " << msg << '\n';
}

void log_note(const std::string& msg) {
  if (g_level < 2) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << msg << '\n';
}

}  // namespace floer
