#include "qrlab/spiderweb.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "qrlab/error.hpp"

namespace qrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::config, "certificate:" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

ModulusProfile for_certification(const ModulusProfile& p) {
  return p.source() == ProfileSource::sphere_sampled ? p.with_min_refinement() : p;
}

}  // namespace

namespace {
const double kLogDoubleMax = std::log(std::numeric_limits<double>::max());
}  // namespace

CertifyOutcome certify_spiderweb(const ModulusProfile& profile, double R, int N, double a, double b,
                                 int candidates) {
  require(std::isfinite(R) && R > 0.0, "certify: R must be positive");
  require(N >= 2, "certify: N must be at least 2");
  require(a > 1.0 && b >= a, "certify: window needs 1 < a <= b");
  require(candidates >= 1, "certify: need at least one candidate");
  const ModulusProfile p = for_certification(profile);

  CertifyOutcome out;
  SpiderwebCertificate& cert = out.certificate;
  cert.profile_id = p.id();
  cert.R = R;
  cert.N = N;
  cert.budget = p.source() == ProfileSource::sphere_sampled ? p.budget() : 0;

  const MaxModulusTower tower = iterate_max_modulus(p, R, N);
  const double la = std::log(a), lb = std::log(b);
  const int K = a == b ? 1 : candidates;
  double prev_log_m = kInf;
  for (int n = 1; n <= N; ++n) {
    const double Ln = tower.log_values[n - 1];
    // Radii must stay representable: stop once b M^n(R) leaves double range.
    if (!std::isfinite(Ln) || !(lb + Ln < kLogDoubleMax)) {
      cert.overflow_truncated = true;
      break;
    }
    std::optional<CertificateEntry> best;
    for (int i = 0; i < K; ++i) {
      const double c = K == 1 ? la + Ln : la + Ln + (lb - la) * i / (K - 1);
      if (n > 1 && !(c <= prev_log_m + kCertificateLogTolerance)) break;
      const double lm = p.log_min(c);
      if (!best || lm > best->log_m_rho) best = CertificateEntry{n, c, Ln, lm};
    }
    if (!best) {
      out.failed_at = n - 1;
      out.log_shortfall = la + Ln - prev_log_m;
      return out;
    }
    cert.entries.push_back(*best);
    prev_log_m = best->log_m_rho;
  }
  out.success = !cert.entries.empty();
  return out;
}

VerifyReport verify_certificate(const SpiderwebCertificate& cert, const ModulusProfile& profile) {
  VerifyReport rep;
  if (cert.entries.empty()) {
    rep.ok = true;
    rep.degenerate = true;
    return rep;
  }
  ModulusProfile p = profile;
  if (p.source() == ProfileSource::sphere_sampled)
    p = p.with_budget(2 * std::max(cert.budget, p.budget())).with_min_refinement();
  const std::size_t len = cert.entries.size();
  const MaxModulusTower tower = iterate_max_modulus(p, cert.R, static_cast<int>(len));
  for (std::size_t i = 0; i < len; ++i) {
    const CertificateEntry& e = cert.entries[i];
    const int n = static_cast<int>(i) + 1;
    const double rho_margin = e.log_rho - tower.log_values[i];
    rep.rho_margin.push_back(rho_margin);
    bool good = e.n == n && rho_margin > 0.0;
    if (i + 1 < len) {
      const double chain = p.log_min(e.log_rho) - cert.entries[i + 1].log_rho;
      rep.chain_margin.push_back(chain);
      good = good && chain >= -kCertificateLogTolerance;
    }
    if (!good && !rep.first_failure) rep.first_failure = n;
  }
  rep.ok = !rep.first_failure;
  return rep;
}

void write_certificate(const SpiderwebCertificate& cert, std::ostream& os) {
  os << "# qrlab spider's web certificate\n";
  os << "profile " << cert.profile_id << '\n';
  os << "R " << fmt(cert.R) << '\n';
  os << "N " << cert.N << '\n';
  os << "budget " << cert.budget << '\n';
  os << "truncated " << (cert.overflow_truncated ? 1 : 0) << '\n';
  os << "entries " << cert.entries.size() << '\n';
  os << "# n log_rho log_M^n log_m(rho)\n";
  for (const CertificateEntry& e : cert.entries)
    os << e.n << ' ' << fmt(e.log_rho) << ' ' << fmt(e.log_Mn) << ' ' << fmt(e.log_m_rho) << '\n';
}

SpiderwebCertificate read_certificate(std::istream& is) {
  SpiderwebCertificate cert;
  std::string line;
  int lineno = 0;
  std::optional<std::size_t> expected;
  auto bad = [&](const std::string& msg) { fail(ErrorKind::config, "certificate:" + std::to_string(lineno) + ": " + msg); };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) bad("expected 'key value'");
    const std::string key = line.substr(0, sp);
    const std::string rest = line.substr(sp + 1);
    if (key == "profile") {
      cert.profile_id = rest;
    } else if (key == "R") {
      cert.R = parse_double(rest, lineno);
    } else if (key == "N") {
      cert.N = std::stoi(rest);
    } else if (key == "budget") {
      cert.budget = std::stoi(rest);
    } else if (key == "truncated") {
      cert.overflow_truncated = rest == "1";
    } else if (key == "entries") {
      expected = static_cast<std::size_t>(std::stoull(rest));
    } else {
      std::istringstream ls(line);
      std::string n, r, m, mm, extra;
      if (!(ls >> n >> r >> m >> mm) || (ls >> extra)) bad("expected 'n log_rho log_M^n log_m(rho)'");
      CertificateEntry e;
      try {
        e.n = std::stoi(n);
      } catch (const std::exception&) {
        bad("bad index '" + n + "'");
      }
      e.log_rho = parse_double(r, lineno);
      e.log_Mn = parse_double(m, lineno);
      e.log_m_rho = parse_double(mm, lineno);
      cert.entries.push_back(e);
    }
  }
  if (expected && *expected != cert.entries.size()) bad("entry count does not match the header");
  return cert;
}

grid::GridMask level_mask(const ClassField& field, int L) {
  grid::GridMask m(field.spec);
  for (std::size_t i = 0; i < field.cells.size(); ++i)
    if (field.cells[i].level && *field.cells[i].level >= L) m.set(i);
  return m;
}

BoundedComplementReport detect_bounded_complement(const ClassField& field, int L) {
  BoundedComplementReport rep;
  rep.level = L;
  const grid::ComponentLabeling lab = grid::components(level_mask(field, L), true);
  for (std::size_t k = 0; k < lab.count(); ++k)
    if (lab.bounded[k]) rep.components.push_back(lab.component_mask(static_cast<std::int32_t>(k)));
  rep.count = rep.components.size();
  return rep;
}

HoleLoopSequence fundamental_holes(const std::vector<grid::GridMask>& masks, int first_level) {
  HoleLoopSequence seq;
  if (masks.empty()) return seq;
  const grid::GridSpec& spec = masks.front().spec();
  const double origin[3] = {0.0, 0.0, 0.0};
  const auto zero = spec.nearest_cell(std::span<const double>(origin, static_cast<std::size_t>(spec.dimension())));
  require(zero.has_value(), "fundamental_holes: 0 must lie in the grid box");
  for (std::size_t k = 0; k < masks.size(); ++k) {
    require(masks[k].spec() == spec, "fundamental_holes: level masks must share a grid");
    HoleLoop e;
    e.level = first_level + static_cast<int>(k);
    if (!masks[k].at(*zero)) {
      const grid::ComponentLabeling lab = grid::components(masks[k], true);
      grid::GridMask hole = lab.component_mask(lab.labels[*zero]);
      e.loop = grid::dilate(hole, 1) & masks[k];
      e.hole = std::move(hole);
    }
    seq.entries.push_back(std::move(e));
  }
  for (std::size_t k = 0; k + 1 < seq.entries.size(); ++k) {
    const auto& h0 = seq.entries[k].hole;
    const auto& h1 = seq.entries[k + 1].hole;
    if (h0 && h1 && !h0->subset_of(*h1)) {
      seq.nesting_ok = false;
      seq.nesting_violations.push_back(seq.entries[k].level);
    }
  }
  const std::size_t n = seq.entries.size();
  seq.disjoint_from.assign(n, std::nullopt);
  for (std::size_t k = 0; k < n; ++k) {
    if (!seq.entries[k].loop || k + 1 == n) continue;
    std::size_t last_meet = 0;
    for (std::size_t d = 1; k + d < n; ++d) {
      const auto& other = seq.entries[k + d].loop;
      if (other && !(*seq.entries[k].loop & *other).empty()) last_meet = d;
    }
    if (k + last_meet + 1 < n) seq.disjoint_from[k] = static_cast<int>(last_meet + 1);
  }
  return seq;
}

HoleLoopSequence fundamental_holes(const ClassField& field, int level_lo, int level_hi) {
  require(level_hi >= level_lo, "fundamental_holes: empty level range");
  std::vector<grid::GridMask> masks;
  for (int L = level_lo; L <= level_hi; ++L) masks.push_back(level_mask(field, L));
  return fundamental_holes(masks, level_lo);
}

}  // namespace qrlab
