// qrlab command line: render | classify | certify | growth | check.
// Flags override values from --config.

#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qrlab/run.hpp"

namespace {

// A flag bound to a RunConfig field; applied only when given on the command line.
struct Binding {
  std::vector<CLI::Option*> options;
  std::function<void(qrlab::RunConfig&)> apply;
  bool given() const {
    for (const CLI::Option* o : options)
      if (o->count() > 0) return true;
    return false;
  }
};

class Flags {
 public:
  template <class T>
  void add(std::initializer_list<CLI::App*> subs, const std::string& name, const std::string& help,
           std::function<void(qrlab::RunConfig&, const T&)> set) {
    auto value = std::make_shared<T>();
    Binding b;
    for (CLI::App* s : subs) b.options.push_back(s->add_option(name, *value, help));
    b.apply = [value, set](qrlab::RunConfig& c) { set(c, *value); };
    bindings_.push_back(std::move(b));
  }
  void apply(qrlab::RunConfig& c) const {
    for (const Binding& b : bindings_)
      if (b.given()) b.apply(c);
  }

 private:
  std::vector<Binding> bindings_;
};

using C = qrlab::RunConfig;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qrlab: escape classification, spider's-web certificates and growth checks for quasiregular maps"};
  app.require_subcommand(1);

  CLI::App* render = app.add_subcommand("render", "classify a grid and write a P6 image");
  CLI::App* classify = app.add_subcommand("classify", "classify a grid and write CSV and P6 image");
  CLI::App* certify = app.add_subcommand("certify", "search and verify a spider's-web certificate");
  CLI::App* growth = app.add_subcommand("growth", "growth of f o h, decreasing intervals and density");
  CLI::App* check = app.add_subcommand("check", "modulus | escape-radius | ratio | hypothesis | covering | r-independence");
  const auto all = {render, classify, certify, growth, check};
  const auto field = {render, classify, check};

  std::string config_path;
  for (CLI::App* s : all) s->add_option("--config", config_path, "structured text config file");

  Flags f;
  using S = const std::string&;
  f.add<std::string>(all, "--map", "map reference, e.g. exp, lambda-exp:0.3, winding:2, exp@radial:2,0.5",
                     [](C& c, S v) { c.map_ref = v; });
  f.add<std::string>(all, "--profile", "modulus profile (exp, square, cube, sqrt, synthetic-square, ds-synthetic, "
                     "squaring-step[:r1])", [](C& c, S v) { c.profile_ref = v; });
  f.add<long long>(all, "--seed", "seed for random sample sets", [](C& c, const long long& v) { c.seed = v; });
  f.add<int>(all, "--threads", "worker cap (overrides QRLAB_THREADS)", [](C& c, const int& v) { c.threads = v; });
  f.add<std::string>(all, "--out", "output directory", [](C& c, S v) { c.out_dir = v; });
  f.add<std::string>(all, "--prefix", "output file prefix", [](C& c, S v) { c.prefix = v; });
  f.add<double>(all, "--R", "base radius R", [](C& c, const double& v) { c.R = v; });
  f.add<int>(all, "--N", "horizon / certificate length", [](C& c, const int& v) { c.N = v; });
  f.add<int>(all, "--budget", "sphere sample budget", [](C& c, const int& v) { c.budget = v; });

  f.add<std::string>(field, "--box", "per-axis lo:hi, comma separated", [](C& c, S v) { c.box = qrlab::parse_box(v); });
  f.add<std::string>(field, "--res", "cells per axis (one value or one per axis)",
                     [](C& c, S v) { c.res = qrlab::parse_resolution(v); });
  f.add<std::string>(field, "--criterion", "A1, A2 or hull", [](C& c, S v) { c.criterion = qrlab::parse_criterion(v); });
  f.add<int>(field, "--layer", "image slice of a 3D grid", [](C& c, const int& v) { c.layer = v; });
  f.add<int>(field, "--hull-res", "hull grid resolution", [](C& c, const int& v) { c.hull_resolution = v; });
  f.add<double>(field, "--bailout", "orbit bailout radius", [](C& c, const double& v) { c.bailout = v; });

  f.add<double>({certify}, "--a", "window start in units of M^n(R)", [](C& c, const double& v) { c.a = v; });
  f.add<double>({certify}, "--b", "window end in units of M^n(R)", [](C& c, const double& v) { c.b = v; });
  f.add<int>({certify}, "--candidates", "log-spaced candidates per level",
             [](C& c, const int& v) { c.candidates = v; });
  f.add<double>({certify, check}, "--alpha", "alpha (window [2, 2 alpha], hypothesis, covering)",
                [](C& c, const double& v) { c.alpha = v; });

  f.add<double>({growth}, "--r1", "base radius r1 > 1", [](C& c, const double& v) { c.r1 = v; });
  f.add<double>({growth}, "--rho", "stretch exponent in (0,1)", [](C& c, const double& v) { c.rho = v; });
  f.add<int>({growth}, "--nmax", "last generation", [](C& c, const int& v) { c.nmax = v; });
  f.add<int>({growth}, "--points", "grid points per generation",
             [](C& c, const int& v) { c.points_per_generation = v; });

  f.add<std::string>({check}, "name", "which check", [](C& c, S v) { c.check = v; });
  f.add<double>({check}, "--delta", "delta (hypothesis)", [](C& c, const double& v) { c.delta = v; });
  f.add<double>({check}, "--A", "factor for the ratio check", [](C& c, const double& v) { c.A = v; });
  f.add<double>({check}, "--r-lo", "grid start", [](C& c, const double& v) { c.r_lo = v; });
  f.add<double>({check}, "--r-hi", "grid end", [](C& c, const double& v) { c.r_hi = v; });
  f.add<int>({check}, "--grid-points", "grid size", [](C& c, const int& v) { c.grid_points = v; });
  f.add<double>({check}, "--r", "covering: inner radius", [](C& c, const double& v) { c.covering_r = v; });
  f.add<double>({check}, "--beta", "covering: target annulus ratio", [](C& c, const double& v) { c.beta = v; });
  f.add<int>({check}, "--points", "r-independence: random points", [](C& c, const int& v) { c.points = v; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    qrlab::RunConfig cfg = config_path.empty() ? qrlab::RunConfig{} : qrlab::load_config(config_path);
    cfg.command = qrlab::parse_command(app.get_subcommands().front()->get_name());
    f.apply(cfg);
    return qrlab::run(cfg, std::cout, std::cerr);
  } catch (const qrlab::Error& e) {
    std::cerr << "qrlab: " << e.what() << '\n';
    return qrlab::exit_code(e.kind());
  }
}
