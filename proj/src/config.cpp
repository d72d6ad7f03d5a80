#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "torus_floer/errors.hpp"
#include "torus_floer/pipeline.hpp"

namespace floer {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line << ": " << msg;
  throw Error(ErrorKind::Config, "cli", os.str());
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_real(const std::string& v, int line, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno != 0 || !std::isfinite(x))
    fail(line, "'" + key + "' expects a real number, got '" + v + "'");
  return x;
}

long long to_int(const std::string& v, int line, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno != 0)
    fail(line, "'" + key + "' expects an integer, got '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& v, int line, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  if (!v.empty() && v[0] == '-') fail(line, "'" + key + "' must be non-negative");
  const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno != 0)
    fail(line, "'" + key + "' expects an unsigned integer, got '" + v + "'");
  return x;
}

TrigTerm parse_term(const std::string& v, int line) {
  TrigTerm t;
  bool have_a = false, have_m = false;
  std::istringstream is(v);
  std::string item;
  std::set<std::string> seen;
  while (is >> item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(line, "term field '" + item + "' is not key=value");
    const std::string k = item.substr(0, eq), val = item.substr(eq + 1);
    if (!seen.insert(k).second) fail(line, "term field '" + k + "' given twice");
    if (k == "a") {
      t.a = to_real(val, line, "a");
      have_a = true;
    } else if (k == "m") {
      std::istringstream ms(val);
      std::string c;
      while (std::getline(ms, c, ',')) t.m.push_back(static_cast<int>(to_int(c, line, "m")));
      have_m = true;
    } else if (k == "phi") {
      t.phi = to_real(val, line, "phi");
    } else if (k == "l") {
      t.l = static_cast<int>(to_int(val, line, "l"));
    } else if (k == "psi") {
      t.psi = to_real(val, line, "psi");
    } else {
      fail(line, "unknown term field '" + k + "'");
    }
  }
  if (!have_a || !have_m) fail(line, "term needs a= and m=");
  return t;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    if (key == "term") {
      c.terms.push_back(parse_term(val, line));
      continue;
    }
    if (!seen.insert(key).second) fail(line, "key '" + key + "' given twice");
    auto positive = [&](double x) {
      if (!(x > 0.0)) fail(line, "'" + key + "' must be positive");
      return x;
    };
    if (key == "name") c.name = val;
    else if (key == "n") c.n = static_cast<int>(to_int(val, line, key));
    else if (key == "N") c.N = static_cast<int>(to_int(val, line, key));
    else if (key == "M_s") c.M_s = static_cast<int>(to_int(val, line, key));
    else if (key == "L") c.L = to_real(val, line, key);
    else if (key == "L_m") c.L_m = to_real(val, line, key);
    else if (key == "tol_orbit") c.tol_orbit = positive(to_real(val, line, key));
    else if (key == "tol_deg") c.tol_deg = positive(to_real(val, line, key));
    else if (key == "tol_floer") c.tol_floer = positive(to_real(val, line, key));
    else if (key == "tol_match") c.tol_match = positive(to_real(val, line, key));
    else if (key == "tol_conv") c.tol_conv = positive(to_real(val, line, key));
    else if (key == "tol_spec") c.tol_spec = positive(to_real(val, line, key));
    else if (key == "tol_symp") c.tol_symp = positive(to_real(val, line, key));
    else if (key == "sigma_tol") c.sigma_tol = positive(to_real(val, line, key));
    else if (key == "tol_dedup") c.tol_dedup = positive(to_real(val, line, key));
    else if (key == "seed") c.seed = to_u64(val, line, key);
    else if (key == "perturbation") {
      if (val == "off" || val == "auto" || val == "on") {
        c.perturbation = val;
      } else {
        c.perturbation = "on";
        c.perturbation_magnitude = positive(to_real(val, line, key));
      }
    } else if (key == "multistart") c.multistart = static_cast<int>(to_int(val, line, key));
    else if (key == "threads") c.threads = static_cast<int>(to_int(val, line, key));
    else if (key == "out") c.out = val;
    else fail(line, "unknown key '" + key + "'");
  }
  if (c.n < 1) throw Error(ErrorKind::Config, "cli", "n must be at least 1");
  if (c.N < 1) throw Error(ErrorKind::Config, "cli", "N must be at least 1");
  if (c.M_s < 16) throw Error(ErrorKind::Config, "cli", "M_s must be at least 16");
  if (c.L < 0 || c.L_m < 0) throw Error(ErrorKind::Config, "cli", "L and L_m must be non-negative");
  if (c.multistart < 0) throw Error(ErrorKind::Config, "cli", "multistart must be non-negative");
  if (c.threads < 1) throw Error(ErrorKind::Config, "cli", "threads must be at least 1");
  for (const auto& t : c.terms)
    if (static_cast<int>(t.m.size()) != 2 * c.n)
      throw Error(ErrorKind::Config, "cli",
                  "term m has " + std::to_string(t.m.size()) + " entries, expected 2n = " +
                      std::to_string(2 * c.n));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Config, "cli", "cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

EngineOptions RunConfig::engine_options() const {
  EngineOptions o;
  o.morse.tol_spec = tol_spec;
  o.morse.flow.tol_conv = tol_conv;
  o.morse.threads = threads;
  o.perturbation = perturbation;
  o.perturbation_magnitude = perturbation_magnitude;
  o.L = L;
  o.L_m = L_m;
  o.intervals = M_s;
  o.tol_floer = tol_floer;
  o.tol_match = tol_match;
  o.tol_dedup = tol_dedup;
  o.multistart = multistart;
  o.seed = seed;
  o.threads = threads;
  return o;
}

OrbitOptions RunConfig::orbit_options() const {
  OrbitOptions o;
  o.tol_orbit = tol_orbit;
  o.tol_deg = tol_deg;
  o.tol_symp = tol_symp;
  o.threads = threads;
  return o;
}

}  // namespace floer
