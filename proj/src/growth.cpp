#include "qrlab/growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qrlab/error.hpp"
#include "qrlab/maps.hpp"

namespace qrlab::growth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Profiles are tabulated up to this log radius; beyond it log M is reported as overflow.
constexpr double kMaxLogR = 1e300;

}  // namespace

GrowthProfile GrowthProfile::squaring_step(double r1) {
  require(std::isfinite(r1) && r1 > 1.0, "squaring-step profile: r1 must exceed 1");
  GrowthProfile p;
  p.kind_ = ProfileKind::squaring_step;
  p.base_radius_ = r1;
  const double a = std::log(r1);
  p.segments_.push_back({0.0, a, 1.0, 1.0});
  double lo = a;
  for (int n = 2; 2.0 * lo <= kMaxLogR; ++n) {
    p.segments_.push_back({lo, 2.0 * lo, static_cast<double>(n), static_cast<double>(n)});
    lo *= 2.0;
  }
  p.finalize();
  return p;
}

GrowthProfile GrowthProfile::ds_synthetic(const DsParameters& q) {
  require(q.dimension == 2 || q.dimension == 3, "ds-synthetic: dimension must be 2 or 3");
  require(q.n0 >= 1, "ds-synthetic: n0 must be positive");
  require(q.r_n0 > 1.0, "ds-synthetic: r_n0 must exceed 1");
  require(q.theta >= 1.0 / (q.dimension + 1) && q.theta < 1.0, "ds-synthetic: theta must lie in [1/(m+1), 1)");
  require(q.delta > 0.0 && q.delta <= 1.0, "ds-synthetic: delta must lie in (0,1]");
  require(q.gap_constant > 0.0, "ds-synthetic: gap constant must be positive");
  require(q.width_growth >= 1.0, "ds-synthetic: width growth must be at least 1");

  GrowthProfile p;
  p.kind_ = ProfileKind::ds_synthetic;
  p.base_radius_ = q.r_n0;
  p.delta_ = q.delta;
  const double half_log_m = 0.5 * std::log(static_cast<double>(q.dimension));
  const double max_gap = q.gap_constant * std::log((q.n0 + 1.0) / q.n0);
  const double min_width = 2.0 * half_log_m + max_gap;
  const double w0 = q.first_width > 0.0 ? q.first_width : min_width + 1.0;
  require(w0 >= min_width, "ds-synthetic: first width too small for the covering constant");
  // A little slack so every window [r, alpha r] meets a power sphere in a set
  // of positive length, not just at an endpoint.
  p.alpha_ = std::exp(half_log_m + max_gap + 0.05);

  double u = std::log(q.r_n0);
  p.segments_.push_back({0.0, u, static_cast<double>(q.n0), static_cast<double>(q.n0)});
  double w = w0;
  for (int n = q.n0;; ++n) {
    const double us = u + w;
    const double g = q.gap_constant * std::log((n + 1.0) / n);
    if (!(us + g <= kMaxLogR)) break;
    p.segments_.push_back({u, us, static_cast<double>(n), n + q.theta});
    p.segments_.push_back({us, us + g, n + q.theta, n + 1.0});
    p.power_spheres_.push_back({u + half_log_m, us});
    u = us + g;
    w *= q.width_growth;
  }
  p.finalize();
  return p;
}

GrowthProfile GrowthProfile::custom(const std::vector<double>& breakpoints, const std::vector<double>& values) {
  require(values.size() == breakpoints.size() + 1, "custom profile: need one more value than breakpoints");
  GrowthProfile p;
  p.kind_ = ProfileKind::custom;
  double lo = 0.0;
  double prev_nu = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    require(values[k] > 0.0 && values[k] >= prev_nu, "custom profile: nu must be positive and nondecreasing");
    prev_nu = values[k];
    if (k < breakpoints.size()) {
      require(breakpoints[k] > 1.0, "custom profile: breakpoints must exceed 1");
      const double hi = std::log(breakpoints[k]);
      require(hi > lo, "custom profile: breakpoints must be strictly increasing");
      p.segments_.push_back({lo, hi, values[k], values[k]});
      lo = hi;
    } else {
      p.segments_.push_back({lo, kInf, values[k], values[k]});
    }
  }
  p.base_radius_ = breakpoints.empty() ? 1.0 : breakpoints.front();
  p.extends_to_infinity_ = true;
  p.finalize();
  return p;
}

void GrowthProfile::finalize() {
  cumulative_.assign(segments_.size(), 0.0);
  double acc = 0.0;
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    cumulative_[k] = acc;
    const NuSegment& s = segments_[k];
    if (std::isfinite(s.u1)) acc += 0.5 * (s.nu0 + s.nu1) * (s.u1 - s.u0);
  }
  max_u_ = extends_to_infinity_ ? kInf : segments_.back().u1;
}

namespace {

std::size_t find_segment(const std::vector<NuSegment>& segs, double u) {
  // First segment whose upper end is >= u.
  auto it = std::lower_bound(segs.begin(), segs.end(), u, [](const NuSegment& s, double v) { return s.u1 < v; });
  if (it == segs.end()) return segs.size() - 1;
  return static_cast<std::size_t>(it - segs.begin());
}

}  // namespace

double GrowthProfile::nu(double log_r) const {
  if (log_r <= 0.0) return segments_.front().nu0;
  if (log_r > max_u_) return segments_.back().nu1;
  // Right-continuous at step breakpoints.
  auto it = std::upper_bound(segments_.begin(), segments_.end(), log_r,
                             [](double v, const NuSegment& s) { return v < s.u0; });
  const NuSegment& s = *(it - 1);
  if (!std::isfinite(s.u1) || s.u1 == s.u0) return s.nu0;
  const double t = std::clamp((log_r - s.u0) / (s.u1 - s.u0), 0.0, 1.0);
  return s.nu0 + t * (s.nu1 - s.nu0);
}

double GrowthProfile::log_growth(double log_r) const {
  if (std::isnan(log_r)) return log_r;
  if (log_r <= 0.0) return segments_.front().nu0 * log_r;
  if (log_r > max_u_) return kInf;
  const std::size_t k = find_segment(segments_, log_r);
  const NuSegment& s = segments_[k];
  const double du = log_r - s.u0;
  if (!std::isfinite(s.u1) || s.nu0 == s.nu1) return cumulative_[k] + s.nu0 * du;
  const double nu_here = s.nu0 + (s.nu1 - s.nu0) * du / (s.u1 - s.u0);
  return cumulative_[k] + 0.5 * (s.nu0 + nu_here) * du;
}

bool GrowthProfile::in_power_sphere(double log_r) const {
  auto it = std::lower_bound(power_spheres_.begin(), power_spheres_.end(), log_r,
                             [](const LogInterval& iv, double v) { return iv.hi < v; });
  return it != power_spheres_.end() && it->contains(log_r);
}

double growth_integral(const GrowthProfile& profile, double r) {
  require(r >= 1.0, "growth_integral: r must be at least 1");
  return profile.log_growth(std::log(r));
}

double PsiForm::operator()(double t) const {
  require(!segments.empty(), "psi: empty form");
  auto it = std::lower_bound(segments.begin(), segments.end(), t, [](const PsiSegment& s, double v) { return s.t1 < v; });
  const PsiSegment& s = it == segments.end() ? segments.back() : *it;
  return s.slope * t + s.intercept;
}

PsiForm psi_form(const GrowthProfile& profile) {
  require(profile.kind() == ProfileKind::squaring_step, "psi_form: needs a squaring-step profile");
  PsiForm out;
  int n = 1;
  for (const NuSegment& s : profile.segments()) {
    const double slope = s.nu0;
    out.segments.push_back({n, s.u0, s.u1, slope, profile.log_growth(s.u0) - slope * s.u0});
    ++n;
  }
  return out;
}

ComposedGrowth::ComposedGrowth(double r1, double rho) : r1_(r1), rho_(rho), f_(GrowthProfile::squaring_step(r1)) {
  require(rho > 0.0 && rho < 1.0, "composed growth: rho must lie in (0,1)");
}

double ComposedGrowth::log_max(double log_r) const {
  return f_.log_growth(radial_power_log_norm(r1_, rho_, log_r));
}

double ComposedGrowth::log_rn(int n) const { return std::log(r1_) * std::exp2(n - 1); }

double composed_log_growth(double r1, double rho, double r) {
  require(r >= 1.0, "composed_log_growth: r must be at least 1");
  return ComposedGrowth(r1, rho).log_max(std::log(r));
}

std::vector<DecreasingInterval> decreasing_intervals(double r1, double rho, int n_first, int n_last) {
  std::vector<DecreasingInterval> out;
  if (n_last < n_first) return out;
  require(n_first >= 1, "decreasing_intervals: indices start at 1");
  const ComposedGrowth F(r1, rho);
  if (!(2.0 * F.log_rn(n_last + 2) <= F.outer().max_log_r()))
    fail(ErrorKind::numeric_overflow, "decreasing_intervals: index range overflows");
  constexpr int kPoints = 32;
  for (int n = n_first; n <= n_last; ++n) {
    const double lrn = F.log_rn(n);
    DecreasingInterval iv{n, {(1.0 + rho) * lrn, 2.0 * lrn}, -kInf, true};
    const double spacing = iv.log_range.length() / (kPoints + 1);
    for (int i = 1; i <= kPoints; ++i) {
      const double u = iv.log_range.lo + i * spacing;
      const double h = std::min(1e-6 * u, 0.25 * spacing);
      const double slope = (F.ratio(u + h) - F.ratio(u - h)) / (2.0 * h);
      iv.max_slope = std::max(iv.max_slope, slope);
      if (!(slope < 0.0)) iv.verified = false;
    }
    out.push_back(iv);
  }
  return out;
}

double lower_log_density(const std::vector<LogInterval>& intervals, double log_r_max, double tail_fraction) {
  require(log_r_max > 0.0, "lower_log_density: window must extend beyond r = 1");
  require(tail_fraction >= 0.0 && tail_fraction < 1.0, "lower_log_density: tail fraction must lie in [0,1)");
  auto measure_below = [&](double u) {
    double s = 0.0;
    for (const LogInterval& iv : intervals) {
      const double lo = std::max(iv.lo, 0.0);
      const double hi = std::min(iv.hi, u);
      if (hi > lo) s += hi - lo;
    }
    return s;
  };
  constexpr int kGrid = 4096;
  const double start = tail_fraction * log_r_max;
  std::vector<double> probes;
  probes.reserve(kGrid + intervals.size() + 1);
  for (int i = 1; i <= kGrid; ++i) probes.push_back(start + (log_r_max - start) * i / kGrid);
  // The ratio is smallest at the left ends of intervals.
  for (const LogInterval& iv : intervals)
    if (iv.lo > start && iv.lo > 0.0 && iv.lo <= log_r_max) probes.push_back(iv.lo);
  double best = kInf;
  for (double u : probes) best = std::min(best, measure_below(u) / u);
  return best;
}

}  // namespace qrlab::growth
