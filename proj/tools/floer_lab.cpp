// floer_lab: command line front end of the pipeline.
//
// Exit codes: 0 all checks pass, 2 a structural identity failed, 3 numerical
// resolution failure, 4 configuration error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "torus_floer/errors.hpp"
#include "torus_floer/log.hpp"
#include "torus_floer/pipeline.hpp"

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool full = false;
  int verbose = 0;
};

floer::RunConfig resolve(const Common& c) {
  floer::RunConfig cfg = floer::load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.out) cfg.out = *c.out;
  if (c.threads) {
    if (*c.threads < 1) throw floer::Error(floer::ErrorKind::Config, "cli", "--threads must be at least 1");
    cfg.threads = *c.threads;
  }
  return cfg;
}

int finish(const floer::Pipeline& p) {
  p.write_summary();
  for (const auto& c : p.checks())
    std::cout << (c.pass ? "PASS" : "FAIL") << " [" << c.criterion << "] " << c.name << ": " << c.detail << '\n';
  std::cout << "artifacts in " << p.config().out << '\n';
  return p.all_pass() ? 0 : 2;
}

int fredholm_command(double a, double b, int n, int N, double L, int intervals, double sigma,
                     const std::string& out) {
  std::filesystem::create_directories(out);
  std::ofstream csv(std::filesystem::path(out) / "fredholm.csv", std::ios::binary);
  csv.precision(17);
  csv << "a,b,dim_ker,dim_coker,index,predicted_index\n";
  std::cout << "a,b,dim_ker,dim_coker,index,predicted_index\n";
  auto row = [&](double x, double y) {
    const auto r = floer::fredholm_diag(x, y, {n, N}, L, intervals, sigma);
    csv << x << ',' << y << ',' << r.dim_ker << ',' << r.dim_coker << ',' << r.index << ','
        << r.predicted_index << '\n';
    std::cout << x << ',' << y << ',' << r.dim_ker << ',' << r.dim_coker << ',' << r.index << ','
              << r.predicted_index << '\n';
    return r.index == r.predicted_index;
  };
  bool ok = true;
  if (std::isnan(a) != std::isnan(b))
    throw floer::Error(floer::ErrorKind::Config, "cli", "give both --a and --b, or neither for the sweep");
  if (!std::isnan(a)) {
    ok = row(a, b);
  } else {
    for (double x : {floer::kPi, 3 * floer::kPi, 5 * floer::kPi})
      for (double y : {floer::kPi, 3 * floer::kPi, 5 * floer::kPi}) ok = row(x, y) && ok;
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morse, Floer and hybrid complexes of trigonometric Hamiltonians on tori"};
  app.require_subcommand(1);
  Common common;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Run configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Override the config seed");
    sub->add_option("--out", common.out, "Override the output directory");
    sub->add_option("--threads", common.threads, "Worker threads");
    sub->add_flag("--full", common.full, "Write trajectory and cylinder CSV dumps");
    sub->add_flag("-v,--verbose", common.verbose, "Progress notes on stderr (repeat for more)");
  };

  struct Stage {
    const char* name;
    const char* help;
    void (floer::Pipeline::*run)();
  };
  const Stage stages[] = {
      {"orbits", "Find 1-periodic orbits", &floer::Pipeline::orbits},
      {"cz", "Conley-Zehnder and relative Morse indices", &floer::Pipeline::cz},
      {"morse", "Morse boundary operator", &floer::Pipeline::morse},
      {"floer", "Floer boundary operator", &floer::Pipeline::floer},
      {"hybrid", "Chain map from hybrid trajectories", &floer::Pipeline::hybrid},
      {"homology", "Homology ranks of both complexes", &floer::Pipeline::homology},
      {"verify-all", "Every stage and every check", &floer::Pipeline::verify_all},
  };
  std::vector<std::pair<CLI::App*, const Stage*>> subs;
  for (const auto& s : stages) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub);
    subs.emplace_back(sub, &s);
  }

  CLI::App* fd = app.add_subcommand("fredholm-diag", "Kernel and cokernel of the coupled model operator");
  double fa = std::nan(""), fb = std::nan(""), fL = 3.0, fsig = 1e-6;
  int fn = 1, fN = 3, fint = 48;
  std::string fout = "out";
  fd->add_option("--a", fa, "Morse block constant");
  fd->add_option("--b", fb, "Floer block constant");
  fd->add_option("--n", fn, "Half dimension")->check(CLI::PositiveNumber);
  fd->add_option("--N", fN, "Mode cutoff")->check(CLI::PositiveNumber);
  fd->add_option("--L", fL, "Half-line length")->check(CLI::PositiveNumber);
  fd->add_option("--intervals", fint, "Grid intervals per half line")->check(CLI::PositiveNumber);
  fd->add_option("--sigma-tol", fsig, "Relative singular value threshold")->check(CLI::PositiveNumber);
  fd->add_option("--out", fout, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 4;
  }

  try {
    if (fd->parsed()) return fredholm_command(fa, fb, fn, fN, fL, fint, fsig, fout);
    floer::set_log_level(1 + common.verbose);
    for (const auto& [sub, stage] : subs) {
      if (!sub->parsed()) continue;
      floer::Pipeline p(resolve(common), common.full);
      (p.*(stage->run))();
      return finish(p);
    }
  } catch (const floer::Error& e) {
    std::cerr << "error [module=" << e.module() << ", kind=" << floer::to_string(e.kind())
              << "]: " << e.what();
    if (!common.config.empty()) std::cerr << " (config " << common.config << ")";
    std::cerr << '\n';
    return floer::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 4;
}
