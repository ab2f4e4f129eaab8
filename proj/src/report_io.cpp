#include "qrlab/report_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "qrlab/error.hpp"

namespace qrlab {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

Rgb hsv(double h, double s, double v) {
  h = std::fmod(h, 360.0) / 60.0;
  const int i = static_cast<int>(h);
  const double f = h - i;
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r = v, g = t, b = p;
  switch (i) {
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    case 5: r = v, g = p, b = q; break;
    default: break;
  }
  auto c = [](double x) { return static_cast<unsigned char>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
  return {c(r), c(g), c(b)};
}

}  // namespace

void write_class_csv(const ClassField& field, std::ostream& os) {
  const int m = field.spec.dimension();
  os << "index,x,y" << (m == 3 ? ",z" : "") << ",status,level,first_exit,overflow\r\n";
  for (std::size_t i = 0; i < field.cells.size(); ++i) {
    const EscapeClass& c = field.cells[i];
    const grid::Coords p = field.spec.center(i);
    os << i;
    for (int a = 0; a < m; ++a) os << ',' << format_double(p[a]);
    os << ',' << to_string(c.status) << ',' << opt_int(c.level) << ',' << opt_int(c.first_exit) << ','
       << (c.overflow_extrapolated ? 1 : 0) << "\r\n";
  }
}

Rgb class_color(const EscapeClass& c, int horizon) {
  switch (c.status) {
    case EscapeStatus::bounded_so_far:
      return {0, 0, 0};
    case EscapeStatus::escaping: {
      const int n = c.first_exit.value_or(horizon);
      const double t = horizon > 1 ? static_cast<double>(n - 1) / (horizon - 1) : 0.0;
      const auto g = static_cast<unsigned char>(std::lround(224.0 - 160.0 * std::clamp(t, 0.0, 1.0)));
      return {g, g, g};
    }
    case EscapeStatus::fast: {
      const int lo = fast_level_floor(horizon);
      const double t = static_cast<double>(c.level.value_or(lo) - lo) / std::max(1, horizon - lo);
      return hsv(270.0 * std::clamp(t, 0.0, 1.0), 0.85, 1.0);
    }
  }
  return {};
}

void write_class_ppm(const ClassField& field, std::ostream& os, int layer) {
  const grid::GridSpec& s = field.spec;
  const int w = s.resolution(0), h = s.resolution(1);
  if (s.dimension() == 3) require(layer >= 0 && layer < s.resolution(2), "write_class_ppm: layer out of range");
  os << "P6\n" << w << ' ' << h << "\n255\n";
  for (int row = 0; row < h; ++row) {
    const int j = h - 1 - row;
    for (int i = 0; i < w; ++i) {
      const std::size_t idx = s.index({i, j, s.dimension() == 3 ? layer : 0});
      const Rgb c = class_color(field.cells[idx], field.params.horizon);
      os.put(static_cast<char>(c.r)).put(static_cast<char>(c.g)).put(static_cast<char>(c.b));
    }
  }
}

GrowthSummary growth_summary(double r1, double rho, int nmax, int points_per_generation) {
  require(nmax >= 1, "growth: nmax must be at least 1");
  require(points_per_generation >= 2, "growth: need at least two points per generation");
  GrowthSummary s;
  const growth::ComposedGrowth F(r1, rho);
  s.intervals = growth::decreasing_intervals(r1, rho, 1, nmax);
  s.all_verified = std::all_of(s.intervals.begin(), s.intervals.end(), [](const auto& iv) { return iv.verified; });
  std::vector<growth::LogInterval> ivs;
  for (const auto& iv : s.intervals) ivs.push_back(iv.log_range);
  s.density = growth::lower_log_density(ivs, F.log_rn(nmax));
  s.target = (1.0 - rho) / (1.0 + rho);

  auto emit = [&](double u) {
    GrowthRow row;
    row.log_r = u;
    row.log_M = F.log_max(u);
    row.ratio = row.log_M / u;
    for (const auto& iv : s.intervals)
      if (iv.log_range.contains(u)) {
        row.decreasing_interval = true;
        row.interval_index = iv.n;
      }
    s.rows.push_back(row);
  };
  const double a = std::log(r1);
  for (int i = 0; i < points_per_generation; ++i) emit(0.5 * a + 0.5 * a * i / points_per_generation);
  for (int n = 1; n <= nmax; ++n) {
    const double lo = F.log_rn(n), hi = F.log_rn(n + 1);
    for (int i = 0; i < points_per_generation; ++i) emit(lo + (hi - lo) * i / points_per_generation);
  }
  emit(F.log_rn(nmax + 1));
  return s;
}

void write_growth_csv(const GrowthSummary& s, std::ostream& os) {
  os << "r,log_r,log_M,log_M_over_log_r,in_decreasing_interval,interval_n\r\n";
  for (const GrowthRow& r : s.rows)
    os << format_double(std::exp(r.log_r)) << ',' << format_double(r.log_r) << ',' << format_double(r.log_M) << ','
       << format_double(r.ratio) << ',' << (r.decreasing_interval ? 1 : 0) << ',' << r.interval_index << "\r\n";
}

void write_growth_summary(const GrowthSummary& s, double rho, std::ostream& os) {
  os << "rho " << format_double(rho) << '\n';
  for (const auto& iv : s.intervals)
    os << "interval " << iv.n << " log_r [" << format_double(iv.log_range.lo) << ", " << format_double(iv.log_range.hi)
       << "] max_slope " << format_double(iv.max_slope) << (iv.verified ? " decreasing" : " NOT-DECREASING") << '\n';
  os << "lower_log_density " << format_double(s.density) << " target " << format_double(s.target) << '\n';
}

void write_modulus_csv(const ModulusProfile& profile, const std::vector<double>& r_grid, std::ostream& os) {
  os << "r,M,m,log_M,log_m\r\n";
  for (double r : r_grid) {
    const double u = std::log(r);
    const double lM = profile.log_max(u), lm = profile.log_min(u);
    os << format_double(r) << ',' << format_double(std::exp(lM)) << ',' << format_double(std::exp(lm)) << ','
       << format_double(lM) << ',' << format_double(lm) << "\r\n";
  }
}

void write_ratio_csv(const RatioReport& rep, std::ostream& os) {
  os << "r,log_ratio,ratio\r\n";
  for (std::size_t i = 0; i < rep.r.size(); ++i)
    os << format_double(rep.r[i]) << ',' << format_double(rep.log_ratio[i]) << ','
       << format_double(std::exp(rep.log_ratio[i])) << "\r\n";
}

void write_hypothesis_csv(const HypothesisReport& rep, std::ostream& os) {
  os << "r,best_s,log_m_s,log_delta_M,pass\r\n";
  for (const HypothesisRow& row : rep.rows)
    os << format_double(row.r) << ',' << format_double(row.best_s) << ',' << format_double(row.log_m_s) << ','
       << format_double(row.log_delta_M) << ',' << (row.pass ? 1 : 0) << "\r\n";
}

}  // namespace qrlab
