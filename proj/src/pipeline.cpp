#include "torus_floer/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "torus_floer/errors.hpp"
#include "torus_floer/log.hpp"

namespace floer {

using Json = nlohmann::ordered_json;

namespace {

Json vec_json(const Vec& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json complex_json(const GradedComplex& c) {
  Json gens = Json::array();
  for (const auto& [k, gs] : c.generators) {
    Json ids = Json::array(), acts = Json::array();
    for (const auto& g : gs) {
      ids.push_back(g.id);
      acts.push_back(g.action);
    }
    gens.push_back({{"degree", k}, {"ids", ids}, {"actions", acts}});
  }
  Json bd = Json::array();
  for (const auto& [k, m] : c.boundary) bd.push_back({{"degree", k}, {"matrix", m.to_rows()}});
  return {{"generators", gens}, {"boundary", bd}};
}

Json count_json(int x, int y, const ConnectionCount& c) {
  Json j = {{"x", x}, {"y", y}, {"count", c.count}, {"mod2", c.mod2()}, {"method", c.method},
            {"completeness_warning", c.completeness_warning}};
  Json lats = Json::array();
  for (const auto& l : c.lattices) lats.push_back(vec_json(l));
  if (!c.witnesses.empty()) {
    Json ws = Json::array();
    for (const auto& w : c.witnesses)
      ws.push_back({{"theta", w.theta}, {"lattice", vec_json(w.lattice)},
                    {"flow_time", w.trajectory.flow_time}});
    j["witnesses"] = ws;
  }
  j["lattices"] = lats;
  j["energies"] = c.energies;
  j["action_drops"] = c.action_drops;
  j["tail_rates"] = c.tail_rates;
  return j;
}

Json counts_json(const std::map<std::pair<int, int>, ConnectionCount>& counts) {
  Json a = Json::array();
  for (const auto& [k, c] : counts) a.push_back(count_json(k.first, k.second, c));
  return a;
}

std::string nodes_csv(const ActionContext& ctx, const Mat& nodes, double s0, double s1,
                      const std::string& tag) {
  std::ostringstream os;
  os.precision(17);
  const int m = static_cast<int>(nodes.cols()) - 1;
  for (int i = 0; i <= m; ++i) {
    if (!tag.empty()) os << tag << ',';
    os << s0 + (s1 - s0) * i / m << ',' << ctx.action(nodes.col(i));
    for (Eigen::Index r = 0; r < nodes.rows(); ++r) os << ',' << nodes(r, i);
    os << '\n';
  }
  return os.str();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

long long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

int torus_betti(int n, int k) { return static_cast<int>(binom(2 * n, k)); }

Pipeline::Pipeline(RunConfig cfg, bool full) : cfg_(std::move(cfg)), full_(full), h_(cfg_.hamiltonian()) {
  std::filesystem::create_directories(cfg_.out);
}

void Pipeline::write(const std::string& file, const std::string& text) {
  const auto path = std::filesystem::path(cfg_.out) / file;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Config, "cli", "cannot write " + path.string());
  f << text;
  if (std::find(artifacts_.begin(), artifacts_.end(), file) == artifacts_.end())
    artifacts_.push_back(file);
}

void Pipeline::add_check(int criterion, const std::string& name, bool pass, const std::string& detail) {
  checks_.push_back({criterion, name, pass, detail});
}

bool Pipeline::all_pass() const {
  for (const auto& c : checks_)
    if (!c.pass) return false;
  return true;
}

void Pipeline::orbits() {
  if (have_orbits_) return;
  log_note("orbits: searching fixed points of the time-1 map");
  orbits_ = find_orbits(h_, cfg_.orbit_options());
  if (orbits_.empty())
    throw Error(ErrorKind::Degenerate, "orbits", "no nondegenerate 1-periodic orbit found");
  have_orbits_ = true;

  Json arr = Json::array();
  for (const auto& o : orbits_) arr.push_back(Json::parse(orbit_to_json(o, full_)));
  Json j = {{"name", cfg_.name}, {"n", cfg_.n}, {"orbits", arr}};
  write("orbits.json", j.dump(2) + "\n");

  const int need = 1 << (2 * cfg_.n);
  bool nondeg = true;
  for (const auto& o : orbits_) nondeg = nondeg && o.nondeg_margin > cfg_.tol_deg;
  std::ostringstream os;
  os << orbits_.size() << " nondegenerate orbits, at least " << need << " required";
  add_check(3, "orbit census", nondeg && static_cast<int>(orbits_.size()) >= need, os.str());
}

void Pipeline::cz() {
  if (have_cz_) return;
  orbits();
  IndexOptions io;
  io.tol_spec = cfg_.tol_spec;
  Json arr = Json::array();
  bool agree = true;
  std::ostringstream bad;
  for (auto& o : orbits_) {
    o.rel_index = relative_index(h_, o, cfg_.space(), io);
    if (*o.rel_index != o.cz) {
      agree = false;
      bad << " orbit " << o.id << ": m=" << *o.rel_index << " mu=" << o.cz << ';';
    }
    arr.push_back({{"id", o.id}, {"action", o.action}, {"cz", o.cz}, {"rel_index", *o.rel_index},
                   {"N", cfg_.N}, {"N_check", cfg_.N + 2}});
  }
  have_cz_ = true;
  write("cz.json", Json{{"name", cfg_.name}, {"indices", arr}}.dump(2) + "\n");
  add_check(4, "index agreement m = mu at N and N+2", agree,
            agree ? std::to_string(orbits_.size()) + " orbits agree" : bad.str());
}

void Pipeline::ensure_engine() {
  if (engine_) return;
  cz();
  engine_.emplace(h_, cfg_.space(), orbits_, cfg_.engine_options());
}

void Pipeline::morse() {
  if (morse_) return;
  ensure_engine();
  log_note("morse: counting gradient lines");
  morse_ = morse_boundary(*engine_);
  const auto& ctx = *engine_->context();
  Json j = {{"name", cfg_.name}, {"perturbed", engine_->perturbed()}, {"complex", complex_json(morse_->complex)},
            {"counts", counts_json(morse_->counts)}};
  write("morse.json", j.dump(2) + "\n");
  if (full_)
    for (const auto& [k, c] : morse_->counts) {
      for (std::size_t i = 0; i < c.witnesses.size(); ++i)
        write("morse_" + std::to_string(k.first) + "_" + std::to_string(k.second) + "_" +
                  std::to_string(i) + ".csv",
              witness_csv(ctx, c.witnesses[i]));
      for (std::size_t i = 0; i < c.solutions.size(); ++i)
        write("morse_" + std::to_string(k.first) + "_" + std::to_string(k.second) + "_" +
                  std::to_string(i) + ".csv",
              nodes_csv(ctx, c.solutions[i][0], -engine_->half_length(), engine_->half_length(), ""));
    }
  const VerifyReport r = verify_complex(morse_->complex);
  add_check(5, "Morse boundary squares to zero", r.ok, r.ok ? "dM o dM = 0" : r.message);
}

void Pipeline::floer() {
  if (floer_) return;
  ensure_engine();
  log_note("floer: solving for cylinders");
  floer_ = floer_boundary(*engine_);
  const auto& ctx = *engine_->context();
  Json j = {{"name", cfg_.name}, {"half_length", engine_->half_length()}, {"delta_est", engine_->delta_est()},
            {"complex", complex_json(floer_->complex)}, {"counts", counts_json(floer_->counts)}};
  write("floer.json", j.dump(2) + "\n");
  if (full_)
    for (const auto& [k, c] : floer_->counts)
      for (std::size_t i = 0; i < c.solutions.size(); ++i)
        write("floer_" + std::to_string(k.first) + "_" + std::to_string(k.second) + "_" +
                  std::to_string(i) + ".csv",
              nodes_csv(ctx, c.solutions[i][0], -engine_->half_length(), engine_->half_length(), ""));

  const VerifyReport r = verify_complex(floer_->complex);
  add_check(5, "Floer boundary squares to zero", r.ok, r.ok ? "dF o dF = 0" : r.message);

  const double tol = std::max(1e-4, 10.0 * cfg_.tol_floer);
  double worst = 0.0, min_rate = std::numeric_limits<double>::infinity();
  int solutions = 0;
  bool warn = false;
  for (const auto& [k, c] : floer_->counts) {
    warn = warn || c.completeness_warning;
    for (std::size_t i = 0; i < c.energies.size(); ++i) {
      worst = std::max(worst, std::abs(c.energies[i] - c.action_drops[i]));
      min_rate = std::min(min_rate, c.tail_rates[i]);
      ++solutions;
    }
  }
  std::ostringstream os;
  os << solutions << " cylinders, max |E - dA| = " << fmt(worst);
  if (solutions) os << ", min tail rate " << fmt(min_rate);
  if (warn) os << ", completeness warning raised";
  add_check(6, "Floer energy identity and exponential tails",
            worst < tol && (solutions == 0 || min_rate > 0.0), os.str());
}

void Pipeline::hybrid() {
  if (phi_) return;
  morse();
  floer();
  log_note("hybrid: building the chain map");
  phi_ = build_phi(*engine_, morse_->complex, floer_->complex);
  const auto& ctx = *engine_->context();
  const auto& crit = engine_->critical();
  const TriangularReport tri = check_triangular(phi_->phi, morse_->complex, floer_->complex);
  const VerifyReport chain = verify_chain_map(phi_->phi, morse_->complex, floer_->complex);

  Json mats = Json::array();
  for (const auto& [k, m] : phi_->phi) mats.push_back({{"degree", k}, {"matrix", m.to_rows()}});
  Json order = Json::array();
  for (const auto& [k, gs] : floer_->complex.generators)
    for (const auto& g : gs) order.push_back({{"degree", k}, {"id", g.id}, {"action", g.action}});
  const double tol = std::max(1e-4, 10.0 * cfg_.tol_floer);
  double worst = 0.0, worst_match = 0.0, worst_bound = -1.0;
  int solutions = 0;
  const Vec w = cfg_.space().weights();
  for (const auto& [k, c] : phi_->counts)
    for (std::size_t i = 0; i < c.solutions.size(); ++i) {
      const Mat& mp = c.solutions[i][0];
      const Mat& fp = c.solutions[i][1];
      const Vec gap = mp.col(mp.cols() - 1) - fp.col(0);
      worst_match = std::max(worst_match, std::sqrt(gap.dot(gap.cwiseProduct(w))));
      worst = std::max(worst, std::abs(c.energies[i] - c.action_drops[i]));
      worst_bound = std::max(worst_bound, c.energies[i] - (crit[k.first].action - crit[k.second].action));
      ++solutions;
      if (full_)
        write("hybrid_" + std::to_string(k.first) + "_" + std::to_string(k.second) + "_" +
                  std::to_string(i) + ".csv",
              nodes_csv(ctx, mp, -engine_->morse_length(), 0.0, "morse") +
                  nodes_csv(ctx, fp, 0.0, engine_->half_length(), "floer"));
    }
  // Constant solutions at every generator and the conditioning of the coupled linearization there.
  Json consts = Json::array();
  double sigma_min = std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < crit.size(); ++x) {
    const ConstantHybridReport cr = constant_hybrid(*engine_, static_cast<int>(x));
    sigma_min = std::min(sigma_min, cr.sigma_min);
    worst = std::max(worst, std::abs(cr.solution.energy - cr.solution.action_drop));
    worst_match = std::max(worst_match, cr.solution.matching_defect);
    ++solutions;
    consts.push_back({{"id", x}, {"sigma_min", cr.sigma_min}, {"sigma_max", cr.sigma_max},
                      {"energy", cr.solution.energy}});
  }
  Json j = {{"name", cfg_.name},
            {"phi", mats},
            {"constant_solutions", consts},
            {"action_order", order},
            {"triangular", tri.ok},
            {"invertible", tri.invertible},
            {"chain_map", chain.ok},
            {"counts", counts_json(phi_->counts)}};
  write("hybrid.json", j.dump(2) + "\n");

  std::ostringstream os;
  os << (tri.ok ? "upper triangular, unit diagonal" : tri.message) << "; "
     << (chain.ok ? "Phi dM = dF Phi" : chain.message) << "; "
     << (tri.invertible ? "invertible" : "not invertible") << "; constant solutions sigma_min "
     << fmt(sigma_min);
  add_check(8, "Phi is a triangular chain isomorphism",
            tri.ok && chain.ok && tri.invertible && sigma_min > 1e-8, os.str());
  std::ostringstream es;
  es << solutions << " hybrid solutions (" << crit.size() << " constant), max |E - (A(u(0)) - A(y))| = " << fmt(worst)
     << ", max matching defect " << fmt(worst_match);
  add_check(6, "hybrid energy identity",
            worst < tol && worst_match <= std::max(cfg_.tol_match, 1e-6) && worst_bound <= tol, es.str());
}

void Pipeline::homology() {
  if (have_homology_) return;
  morse();
  floer();
  const auto hm = homology_ranks(morse_->complex);
  const auto hf = homology_ranks(floer_->complex);
  Json jm = Json::array(), jf = Json::array(), jb = Json::array();
  bool ok = true;
  std::ostringstream os;
  for (int mu = -cfg_.n; mu <= cfg_.n; ++mu) {
    const int b = torus_betti(cfg_.n, mu + cfg_.n);
    const int rm = hm.count(mu) ? hm.at(mu) : 0;
    const int rf = hf.count(mu) ? hf.at(mu) : 0;
    jb.push_back({{"degree", mu}, {"betti", b}});
    ok = ok && rm == b && rf == b;
    os << (mu > -cfg_.n ? " " : "") << "mu=" << mu << ":" << rm << "/" << rf << "/" << b;
  }
  for (const auto& [k, r] : hm) {
    jm.push_back({{"degree", k}, {"rank", r}});
    if (k < -cfg_.n || k > cfg_.n) ok = ok && r == 0;
  }
  for (const auto& [k, r] : hf) {
    jf.push_back({{"degree", k}, {"rank", r}});
    if (k < -cfg_.n || k > cfg_.n) ok = ok && r == 0;
  }
  have_homology_ = true;
  write("homology.json",
        Json{{"name", cfg_.name}, {"morse", jm}, {"floer", jf}, {"torus_betti", jb}}.dump(2) + "\n");
  add_check(9, "homology ranks (Morse/Floer/Betti)", ok, os.str());
}

void Pipeline::independent_checks() {
  if (have_independent_) return;
  have_independent_ = true;
  std::mt19937_64 rng(cfg_.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Json out;

  // Conley-Zehnder index of t -> exp(J0 lambda t).
  {
    int bad = 0;
    Json rows = Json::array();
    for (int i = 0; i < 50; ++i) {
      const int n = 1 + i % 2;
      double lambda;
      do {
        lambda = 20.0 * uni(rng);
      } while (std::abs(lambda / kTwoPi - std::round(lambda / kTwoPi)) * kTwoPi < 0.1);
      const int got = cz_index(constant_generator_path(lambda * Mat::Identity(2 * n, 2 * n)));
      const int want = -2 * n * static_cast<int>(std::floor(lambda / kTwoPi)) - n;
      if (got != want) ++bad;
      rows.push_back({{"n", n}, {"lambda", lambda}, {"cz", got}, {"expected", want}});
    }
    out["cz_diagonal"] = rows;
    add_check(1, "CZ index of exp(J0 lambda t)", bad == 0, std::to_string(50 - bad) + "/50 exact");
  }

  // Central differences of the action and its gradient.
  {
    double worst_g = 0.0, worst_h = 0.0;
    for (int N : {4, 8}) {
      const GalerkinSpace sp{cfg_.n, N};
      const ActionContext ctx(h_, sp);
      const Vec w = sp.weights();
      for (int i = 0; i < 20; ++i) {
        Vec x(sp.dim_total()), v(sp.dim_total());
        for (int k = -N; k <= N; ++k)
          for (int c = 0; c < sp.dim(); ++c) {
            const double s = k == 0 ? 1.0 : 0.05 / std::abs(k);
            x[sp.offset(k) + c] = k == 0 ? 0.5 + 0.5 * uni(rng) : s * uni(rng);
            v[sp.offset(k) + c] = s * uni(rng);
          }
        v /= std::sqrt(v.dot(v.cwiseProduct(w)));
        const double eps = 1e-5;
        const Vec g = ctx.gradient(x);
        const double fd = (ctx.action(x + eps * v) - ctx.action(x - eps * v)) / (2 * eps);
        const double ex = g.dot(v.cwiseProduct(w));
        const double gn = std::sqrt(g.dot(g.cwiseProduct(w)));
        worst_g = std::max(worst_g, std::abs(fd - ex) / std::max(gn, 1e-300));
        const Vec fdh = (ctx.gradient(x + eps * v) - ctx.gradient(x - eps * v)) / (2 * eps);
        const Vec hv = hessian_at(ctx, x).raw() * v;
        const Vec d = fdh - hv;
        worst_h = std::max(worst_h, std::sqrt(d.dot(d.cwiseProduct(w)) / hv.dot(hv.cwiseProduct(w))));
      }
    }
    out["derivative_checks"] = {{"gradient_rel_error", worst_g}, {"hessian_rel_error", worst_h}};
    add_check(2, "finite-difference gradient and Hessian (N = 4, 8)", worst_g < 1e-6 && worst_h < 1e-6,
              "gradient " + fmt(worst_g) + ", Hessian " + fmt(worst_h));
  }

  // Model operators of the hybrid problem.
  {
    std::ostringstream csv;
    csv << "a,b,dim_ker,dim_coker,index,predicted_index\n";
    int bad = 0;
    const GalerkinSpace sp{1, 3};
    for (double a : {kPi, 3 * kPi, 5 * kPi})
      for (double b : {kPi, 3 * kPi, 5 * kPi}) {
        const FredholmReport r = fredholm_diag(a, b, sp, 3.0, 48, cfg_.sigma_tol);
        const int fa = static_cast<int>(std::floor(a / kTwoPi)), fb = static_cast<int>(std::floor(b / kTwoPi));
        const int ker = 2 * std::max(0, fb - fa), coker = 2 * std::max(0, fa - fb);
        if (r.dim_ker != ker || r.dim_coker != coker || r.index != -2 * fa + 2 * fb) ++bad;
        csv.precision(17);
        csv << a << ',' << b << ',' << r.dim_ker << ',' << r.dim_coker << ',' << r.index << ','
            << r.predicted_index << '\n';
      }
    write("fredholm.csv", csv.str());
    add_check(7, "Fredholm sweep a, b in {pi, 3pi, 5pi}", bad == 0, std::to_string(9 - bad) + "/9 match");
  }

  // Discrete integration by parts on smooth random cylinders.
  {
    const GalerkinSpace sp{cfg_.n, 3};
    double worst_order = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      Vec amp(sp.dim_total()), freq(sp.dim_total()), ph(sp.dim_total());
      for (Eigen::Index r = 0; r < amp.size(); ++r) {
        amp[r] = uni(rng);
        freq[r] = 1.5 + uni(rng);
        ph[r] = 3.0 * uni(rng);
      }
      auto grid = [&](int m) {
        CylinderGrid u;
        u.space = sp;
        u.s0 = -1.0;
        u.s1 = 1.0;
        u.values.resize(sp.dim_total(), m + 1);
        for (int j = 0; j <= m; ++j) {
          const double s = -1.0 + 2.0 * j / m;
          for (Eigen::Index r = 0; r < amp.size(); ++r) u.values(r, j) = amp[r] * std::sin(freq[r] * s + ph[r]);
        }
        return u;
      };
      for (int sign : {1, -1}) {
        const double d1 = std::abs(ibp_defect(grid(64), sign));
        const double d2 = std::abs(ibp_defect(grid(128), sign));
        worst_order = std::min(worst_order, std::log2(d1 / std::max(d2, 1e-300)));
      }
    }
    out["ibp_order"] = worst_order;
    add_check(10, "discrete integration by parts order", worst_order >= 3.5,
              "smallest fitted order " + std::to_string(worst_order));
  }

  // Trace of half cylinders at s = 0.
  {
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const GalerkinSpace sp{cfg_.n, 1 + i % 4};
      CylinderGrid u;
      u.space = sp;
      u.s0 = 0.0;
      u.s1 = 6.0;
      const int m = 240;
      u.values.resize(sp.dim_total(), m + 1);
      Vec amp(sp.dim_total()), rate(sp.dim_total());
      for (Eigen::Index r = 0; r < amp.size(); ++r) {
        amp[r] = uni(rng);
        rate[r] = 0.5 + 4.0 * (uni(rng) + 1.0);
      }
      for (int j = 0; j <= m; ++j) {
        const double s = 6.0 * j / m;
        for (Eigen::Index r = 0; r < amp.size(); ++r) u.values(r, j) = amp[r] * std::exp(-rate[r] * s);
      }
      const auto [half, h1] = trace_norms(u);
      worst = std::max(worst, half / (std::sqrt(2.0) * h1));
    }
    out["trace_ratio"] = worst;
    add_check(11, "trace inequality |u(0)|_{1/2} <= sqrt2 |u|_{H1}", worst <= 1.0,
              "largest ratio " + std::to_string(worst));
  }
  write("checks.json", out.dump(2) + "\n");
}

void Pipeline::verify_all() {
  orbits();
  cz();
  morse();
  floer();
  hybrid();
  homology();
  independent_checks();
  write_summary();
}

void Pipeline::write_summary() const {
  std::ostringstream txt;
  Json arr = Json::array();
  for (const auto& c : checks_) {
    txt << (c.pass ? "PASS" : "FAIL") << " [" << c.criterion << "] " << c.name << ": " << c.detail << '\n';
    arr.push_back({{"criterion", c.criterion}, {"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  Json j = {{"name", cfg_.name},
            {"seed", cfg_.seed},
            {"all_pass", all_pass()},
            {"checks", arr},
            {"artifacts", artifacts_},
            {"digest", artifact_digest(cfg_.out, artifacts_)}};
  const auto dir = std::filesystem::path(cfg_.out);
  std::ofstream(dir / "summary.txt", std::ios::binary) << txt.str();
  std::ofstream(dir / "summary.json", std::ios::binary) << j.dump(2) << '\n';
}

std::string artifact_digest(const std::string& dir, const std::vector<std::string>& files) {
  std::uint64_t hsh = 1469598103934665603ull;
  for (const auto& f : files) {
    std::ifstream in(std::filesystem::path(dir) / f, std::ios::binary);
    for (const char* p = f.c_str(); *p; ++p) hsh = (hsh ^ static_cast<unsigned char>(*p)) * 1099511628211ull;
    char ch;
    while (in.get(ch)) hsh = (hsh ^ static_cast<unsigned char>(ch)) * 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << hsh;
  return os.str();
}

}  // namespace floer
