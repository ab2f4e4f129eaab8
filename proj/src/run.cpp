#include "qrlab/run.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include "qrlab/growth.hpp"
#include "qrlab/maps.hpp"
#include "qrlab/modulus.hpp"
#include "qrlab/report_io.hpp"
#include "qrlab/spiderweb.hpp"

namespace qrlab {

const char* to_string(Command c) {
  switch (c) {
    case Command::render: return "render";
    case Command::classify: return "classify";
    case Command::certify: return "certify";
    case Command::growth: return "growth";
    case Command::check: return "check";
  }
  return "?";
}

Command parse_command(const std::string& text) {
  for (Command c : {Command::render, Command::classify, Command::certify, Command::growth, Command::check})
    if (text == to_string(c)) return c;
  fail(ErrorKind::config, "unknown command '" + text + "'");
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found: return 1;
    case ErrorKind::config:
    case ErrorKind::invalid_argument:
    case ErrorKind::io: return 2;
    case ErrorKind::numeric_overflow: return 3;
    case ErrorKind::unsupported: return 4;
  }
  return 2;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::config, what + ": '" + s + "' is not a number");
}

const std::vector<std::string> kChecks = {"modulus", "escape-radius", "ratio", "hypothesis", "covering",
                                          "r-independence"};

bool needs_map(const RunConfig& c) {
  if (c.command == Command::render || c.command == Command::classify) return true;
  if (c.command == Command::check) return c.check == "covering" || c.check == "r-independence";
  return false;
}

bool needs_profile(const RunConfig& c) {
  if (c.command == Command::certify) return true;
  return c.command == Command::check &&
         (c.check == "modulus" || c.check == "escape-radius" || c.check == "ratio" || c.check == "hypothesis");
}

ModulusProfile resolve_profile(const RunConfig& cfg) {
  if (!cfg.profile_ref.empty()) return profile_by_name(cfg.profile_ref);
  const MapDescriptor map = resolve_map(cfg);
  if (auto cf = ModulusProfile::closed_form_for(map)) return *cf;
  return ModulusProfile::sampled(map, cfg.budget);
}

double profile_alpha(const ModulusProfile& p, double fallback) {
  if (const auto* g = p.growth_profile(); g && g->kind() == growth::ProfileKind::ds_synthetic) return g->alpha();
  return fallback;
}

ClassifyParams classify_params(const RunConfig& cfg, double R) {
  ClassifyParams p;
  p.R = R;
  p.horizon = cfg.N;
  p.criterion = cfg.criterion;
  p.sphere_samples = cfg.budget;
  p.hull_resolution = cfg.hull_resolution;
  p.bailout = cfg.bailout;
  return p;
}

std::filesystem::path output_path(const RunConfig& cfg, const std::string& suffix) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) fail(ErrorKind::io, "cannot create output directory '" + cfg.out_dir + "': " + ec.message());
  return std::filesystem::path(cfg.out_dir) / (cfg.prefix + suffix);
}

template <class Fn>
void write_file(const RunConfig& cfg, const std::string& suffix, std::ostream& out, Fn&& fn) {
  const auto path = output_path(cfg, suffix);
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  fn(os);
  if (!os) fail(ErrorKind::io, "write failed for '" + path.string() + "'");
  out << "wrote " << path.string() << '\n';
}

int run_field(const RunConfig& cfg, std::ostream& out, bool with_csv) {
  const MapDescriptor map = resolve_map(cfg);
  const Classifier classifier(map, resolve_profile(cfg), classify_params(cfg, cfg.R));
  const grid::GridSpec spec = cfg.grid_spec();
  const ClassField field = classify_grid(classifier, spec, cfg.threads);
  std::size_t counts[3] = {0, 0, 0};
  for (const EscapeClass& c : field.cells) ++counts[static_cast<int>(c.status)];
  out << "map " << map.name() << " R " << format_double(cfg.R) << " N " << cfg.N << " criterion "
      << to_string(cfg.criterion) << " R0 " << format_double(classifier.R0()) << '\n';
  out << "cells " << field.cells.size() << " bounded-so-far " << counts[0] << " escaping " << counts[1] << " fast "
      << counts[2] << '\n';
  if (with_csv) write_file(cfg, ".csv", out, [&](std::ostream& os) { write_class_csv(field, os); });
  const int layer = spec.dimension() == 3 ? (cfg.layer >= 0 ? cfg.layer : spec.resolution(2) / 2) : 0;
  write_file(cfg, ".ppm", out, [&](std::ostream& os) { write_class_ppm(field, os, layer); });
  return 0;
}

int run_certify(const RunConfig& cfg, std::ostream& out) {
  const ModulusProfile profile = resolve_profile(cfg);
  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : profile_alpha(profile, 4.0);
  const double b = cfg.b > 0.0 ? cfg.b : 2.0 * alpha;
  const CertifyOutcome res = certify_spiderweb(profile, cfg.R, cfg.N, cfg.a, std::max(b, cfg.a), cfg.candidates);
  write_file(cfg, ".cert", out, [&](std::ostream& os) { write_certificate(res.certificate, os); });
  out << "profile " << profile.id() << " R " << format_double(cfg.R) << " window [" << format_double(cfg.a) << ", "
      << format_double(std::max(b, cfg.a)) << "]\n";
  out << "length " << res.certificate.entries.size() << (res.certificate.overflow_truncated ? " (truncated at overflow)" : "")
      << '\n';
  if (!res.success) {
    if (res.certificate.overflow_truncated && res.certificate.entries.empty())
      fail(ErrorKind::numeric_overflow, "certify: M^n(R) overflows before the first level");
    out << "certificate FAILED at n = " << res.failed_at.value_or(0) << ", log shortfall "
        << format_double(res.log_shortfall) << '\n';
    return 1;
  }
  // Re-read what was written so the verified object is the serialized one.
  std::ifstream is(output_path(cfg, ".cert"));
  const SpiderwebCertificate back = read_certificate(is);
  const VerifyReport v = verify_certificate(back, profile);
  out << "verify " << (v.ok ? "pass" : "FAIL");
  if (v.first_failure) out << " first failure at n = " << *v.first_failure;
  out << '\n';
  return v.ok ? 0 : 1;
}

int run_growth(const RunConfig& cfg, std::ostream& out) {
  const GrowthSummary s = growth_summary(cfg.r1, cfg.rho, cfg.nmax, cfg.points_per_generation);
  write_file(cfg, "_growth.csv", out, [&](std::ostream& os) { write_growth_csv(s, os); });
  write_file(cfg, "_growth.txt", out, [&](std::ostream& os) { write_growth_summary(s, cfg.rho, os); });
  write_growth_summary(s, cfg.rho, out);
  return s.all_verified ? 0 : 1;
}

int run_r_independence(const RunConfig& cfg, std::ostream& out) {
  const MapDescriptor map = resolve_map(cfg);
  const ModulusProfile profile = resolve_profile(cfg);
  const Classifier c1(map, profile, classify_params(cfg, cfg.R));
  const Classifier c2(map, profile, classify_params(cfg, 2.0 * cfg.R));
  std::mt19937_64 rng(cfg.seed);
  const int m = map.dimension();
  const int floor = fast_level_floor(cfg.N);
  int disagreements = 0;
  std::ostringstream csv;
  csv << "point,level_R,level_2R,fast_R,fast_2R,agree\r\n";
  for (int i = 0; i < cfg.points; ++i) {
    Point x = Point::zeros(m);
    for (int a = 0; a < m; ++a) {
      const grid::Interval& iv = cfg.box[static_cast<std::size_t>(std::min<int>(a, static_cast<int>(cfg.box.size()) - 1))];
      x[a] = std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
    }
    const EscapeClass e1 = c1.classify(x), e2 = c2.classify(x);
    const bool f1 = e1.status == EscapeStatus::fast, f2 = e2.status == EscapeStatus::fast;
    bool agree = (!f2 || f1) && (!f1 || (e2.level && *e2.level >= floor - 1));
    if (e1.level && e2.level) agree = agree && *e1.level - *e2.level >= 0 && *e1.level - *e2.level <= 1;
    if (!agree) ++disagreements;
    csv << i << ',' << (e1.level ? std::to_string(*e1.level) : "") << ',' << (e2.level ? std::to_string(*e2.level) : "")
        << ',' << f1 << ',' << f2 << ',' << agree << "\r\n";
  }
  write_file(cfg, "_rindep.csv", out, [&](std::ostream& os) { os << csv.str(); });
  out << "r-independence: " << disagreements << " disagreements on " << cfg.points << " points\n";
  return disagreements == 0 ? 0 : 1;
}

int run_check(const RunConfig& cfg, std::ostream& out) {
  if (cfg.check == "covering") {
    const MapDescriptor map = resolve_map(cfg);
    const double alpha = cfg.alpha > 0.0 ? cfg.alpha : 2.0;
    const CoveringReport rep = covering_check(map, cfg.covering_r, alpha, cfg.beta, cfg.budget > 0 ? cfg.budget : 4096);
    out << "covering " << (rep.holds ? "holds" : "FAILS") << " M(r) " << format_double(rep.M_r) << " R "
        << format_double(rep.R) << " samples " << rep.angular_samples << 'x' << rep.radial_samples << " log_bin "
        << format_double(rep.log_bin) << " angular_bins " << rep.angular_bins << '\n';
    return rep.holds ? 0 : 1;
  }
  if (cfg.check == "r-independence") return run_r_independence(cfg, out);

  const ModulusProfile profile = resolve_profile(cfg);
  const std::vector<double> rg = log_grid(cfg.r_lo, cfg.r_hi, cfg.grid_points);
  if (cfg.check == "modulus") {
    write_file(cfg, "_modulus.csv", out, [&](std::ostream& os) { write_modulus_csv(profile, rg, os); });
    return 0;
  }
  if (cfg.check == "escape-radius") {
    const EscapeRadius er = find_escape_radius(profile, 2.0, 1e-3, cfg.r_hi);
    out << "R0 " << format_double(er.R0) << " margin " << format_double(er.margin) << '\n';
    return 0;
  }
  if (cfg.check == "ratio") {
    const RatioReport rep = check_M_ratio_divergence(profile, cfg.A, rg);
    write_file(cfg, "_ratio.csv", out, [&](std::ostream& os) { write_ratio_csv(rep, os); });
    out << "ratio tail " << (rep.tail_increasing ? "increasing" : "NOT increasing") << '\n';
    return rep.tail_increasing ? 0 : 1;
  }
  const double alpha = cfg.alpha > 0.0 ? cfg.alpha : profile_alpha(profile, 2.0);
  const HypothesisReport rep = check_min_modulus_hypothesis(profile, alpha, cfg.delta, rg);
  write_file(cfg, "_hypothesis.csv", out, [&](std::ostream& os) { write_hypothesis_csv(rep, os); });
  std::size_t passed = 0;
  for (const auto& row : rep.rows) passed += row.pass ? 1 : 0;
  out << "hypothesis alpha " << format_double(alpha) << " delta " << format_double(cfg.delta) << ": " << passed << '/'
      << rep.rows.size() << " rows pass, verdict " << (rep.verdict ? "pass" : "FAIL") << '\n';
  return rep.verdict ? 0 : 1;
}

}  // namespace

grid::GridSpec RunConfig::grid_spec() const {
  std::vector<int> r = res;
  if (r.size() == 1) r.assign(box.size(), res.front());
  if (r.size() != box.size()) fail(ErrorKind::config, "grid: resolution count does not match the box dimension");
  try {
    return grid::GridSpec(box, r);
  } catch (const Error& e) {
    fail(ErrorKind::config, std::string("grid: ") + e.what());
  }
}

std::vector<grid::Interval> parse_box(const std::string& text) {
  std::vector<grid::Interval> box;
  for (const std::string& part : split(text, ',')) {
    const auto colon = part.find(':', part.empty() || part[0] != '-' ? 0 : 1);
    if (colon == std::string::npos) fail(ErrorKind::config, "box: expected lo:hi, got '" + part + "'");
    box.push_back({to_double(part.substr(0, colon), "box"), to_double(part.substr(colon + 1), "box")});
  }
  if (box.size() != 2 && box.size() != 3) fail(ErrorKind::config, "box: need 2 or 3 axes");
  return box;
}

std::vector<int> parse_resolution(const std::string& text) {
  std::vector<int> r;
  for (const std::string& part : split(text, ',')) {
    const double v = to_double(part, "res");
    if (v != std::floor(v) || v < 2 || v > 1 << 20) fail(ErrorKind::config, "res: '" + part + "' is not a valid cell count");
    r.push_back(static_cast<int>(v));
  }
  if (r.empty()) fail(ErrorKind::config, "res: empty");
  return r;
}

RunConfig config_from_document(const ConfigDocument& doc) {
  doc.expect_sections({"run", "grid", "escape", "certify", "growth", "check", "output"}, {"map."});
  RunConfig c;
  auto doc_ptr = std::make_shared<const ConfigDocument>(doc);
  c.document = doc_ptr;
  auto convert = [](const ConfigSection& s, const std::string& key, auto&& fn) {
    if (!s.has(key)) return;
    try {
      fn();
    } catch (const Error& e) {
      s.error_at(key, e.what());
    }
  };
  if (const ConfigSection* s = doc.find("run")) {
    s->expect_keys({"command", "map", "profile", "seed", "threads"});
    convert(*s, "command", [&] { c.command = parse_command(s->get_string("command")); });
    c.map_ref = s->get_string("map", "");
    c.profile_ref = s->get_string("profile", "");
    c.seed = static_cast<std::uint64_t>(s->get_int("seed", 1));
    c.threads = static_cast<int>(s->get_int("threads", 0));
  }
  if (const ConfigSection* s = doc.find("grid")) {
    s->expect_keys({"box", "res", "layer"});
    convert(*s, "box", [&] { c.box = parse_box(s->get_string("box")); });
    convert(*s, "res", [&] { c.res = parse_resolution(s->get_string("res")); });
    c.layer = static_cast<int>(s->get_int("layer", -1));
  }
  if (const ConfigSection* s = doc.find("escape")) {
    s->expect_keys({"R", "N", "criterion", "budget", "hull_resolution", "bailout"});
    c.R = s->get_double("R", c.R);
    c.N = static_cast<int>(s->get_int("N", c.N));
    convert(*s, "criterion", [&] { c.criterion = parse_criterion(s->get_string("criterion")); });
    c.budget = static_cast<int>(s->get_int("budget", c.budget));
    c.hull_resolution = static_cast<int>(s->get_int("hull_resolution", c.hull_resolution));
    c.bailout = s->get_double("bailout", c.bailout);
  }
  if (const ConfigSection* s = doc.find("certify")) {
    s->expect_keys({"a", "b", "candidates"});
    c.a = s->get_double("a", c.a);
    c.b = s->get_double("b", c.b);
    c.candidates = static_cast<int>(s->get_int("candidates", c.candidates));
  }
  if (const ConfigSection* s = doc.find("growth")) {
    s->expect_keys({"r1", "rho", "nmax", "points"});
    c.r1 = s->get_double("r1", c.r1);
    c.rho = s->get_double("rho", c.rho);
    c.nmax = static_cast<int>(s->get_int("nmax", c.nmax));
    c.points_per_generation = static_cast<int>(s->get_int("points", c.points_per_generation));
  }
  if (const ConfigSection* s = doc.find("check")) {
    s->expect_keys({"name", "alpha", "delta", "A", "r_lo", "r_hi", "grid_points", "r", "beta", "points"});
    c.check = s->get_string("name", c.check);
    c.alpha = s->get_double("alpha", c.alpha);
    c.delta = s->get_double("delta", c.delta);
    c.A = s->get_double("A", c.A);
    c.r_lo = s->get_double("r_lo", c.r_lo);
    c.r_hi = s->get_double("r_hi", c.r_hi);
    c.grid_points = static_cast<int>(s->get_int("grid_points", c.grid_points));
    c.covering_r = s->get_double("r", c.covering_r);
    c.beta = s->get_double("beta", c.beta);
    c.points = static_cast<int>(s->get_int("points", c.points));
  }
  if (const ConfigSection* s = doc.find("output")) {
    s->expect_keys({"dir", "prefix"});
    c.out_dir = s->get_string("dir", c.out_dir);
    c.prefix = s->get_string("prefix", c.prefix);
  }
  // Report an unresolvable map reference at its position in the file.
  if (!c.map_ref.empty()) {
    const ConfigSection& s = doc.section("run");
    try {
      resolve_map(c);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::config || !doc.find("map." + c.map_ref)) s.error_at("map", e.what());
      throw;
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) { return config_from_document(ConfigDocument::load(path)); }

MapDescriptor resolve_map(const RunConfig& cfg) {
  if (cfg.map_ref.empty()) fail(ErrorKind::config, std::string(to_string(cfg.command)) + ": a map reference is required");
  if (cfg.document && cfg.document->find("map." + cfg.map_ref)) return map_from_config(*cfg.document, cfg.map_ref);
  try {
    return parse_map_reference(cfg.map_ref);
  } catch (const Error& e) {
    fail(ErrorKind::config, "map '" + cfg.map_ref + "' is neither a [map." + cfg.map_ref +
                                "] section nor a valid reference: " + e.what());
  }
}

void validate(const RunConfig& cfg) {
  if (needs_map(cfg) && cfg.map_ref.empty())
    fail(ErrorKind::config, std::string(to_string(cfg.command)) + ": a map reference is required");
  if (needs_profile(cfg) && cfg.map_ref.empty() && cfg.profile_ref.empty())
    fail(ErrorKind::config, std::string(to_string(cfg.command)) + ": a profile or map reference is required");
  if (cfg.command == Command::check && std::find(kChecks.begin(), kChecks.end(), cfg.check) == kChecks.end())
    fail(ErrorKind::config, "check: unknown check '" + cfg.check + "'");
  if (!cfg.map_ref.empty()) resolve_map(cfg);
  if (!cfg.profile_ref.empty()) profile_by_name(cfg.profile_ref);
  if (cfg.N < 2) fail(ErrorKind::config, "N must be at least 2");
  if (!(cfg.R > 0.0) || !std::isfinite(cfg.R)) fail(ErrorKind::config, "R must be positive and finite");
  if (cfg.budget != 0 && cfg.budget < 8) fail(ErrorKind::config, "budget must be 0 or at least 8");
  if (cfg.points < 1) fail(ErrorKind::config, "points must be positive");
  if (cfg.command == Command::growth) {
    if (!(cfg.r1 > 1.0) || !std::isfinite(cfg.r1)) fail(ErrorKind::config, "growth: r1 must exceed 1");
    if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) fail(ErrorKind::config, "growth: rho must lie in (0,1)");
    if (cfg.nmax < 1 || cfg.points_per_generation < 2) fail(ErrorKind::config, "growth: nmax >= 1 and points >= 2");
  }
  if (cfg.command == Command::render || cfg.command == Command::classify) (void)cfg.grid_spec();
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    validate(cfg);
    switch (cfg.command) {
      case Command::render: return run_field(cfg, out, false);
      case Command::classify: return run_field(cfg, out, true);
      case Command::certify: return run_certify(cfg, out);
      case Command::growth: return run_growth(cfg, out);
      case Command::check: return run_check(cfg, out);
    }
  } catch (const Error& e) {
    err << "qrlab: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "qrlab: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace qrlab
