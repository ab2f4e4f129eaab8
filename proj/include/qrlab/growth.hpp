#pragma once

// Prescribed growth: M(r) = exp \int_1^r nu(t)/t dt for step or piecewise
// linear nu, the piecewise linear psi with log M(r) = psi(log r), growth of
// the composition with the radial stretch, and logarithmic densities.
//
// All arithmetic is in u = log r and log M coordinates.

#include <cstddef>
#include <vector>

namespace qrlab::growth {

// nu is linear in u = log r on [u0, u1], from nu0 to nu1 (nu0 == nu1 for steps).
struct NuSegment {
  double u0 = 0.0;
  double u1 = 0.0;
  double nu0 = 1.0;
  double nu1 = 1.0;
};

struct LogInterval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double u) const { return u >= lo && u <= hi; }
};

enum class ProfileKind { squaring_step, ds_synthetic, custom };

// Synthetic model of the annulus structure: power-behaviour annuli
// V_n = closed A_inf(r_n, s_n) with nu(r_n) = n, nu(s_n) = n + theta, separated
// by gaps with log(r_{n+1}/s_n) = gap_constant * log((n+1)/n).
struct DsParameters {
  int dimension = 2;
  int n0 = 4;
  double r_n0 = 2.0;
  // log(s_n / r_n) = first_width * width_growth^(n - n0); 0 selects the
  // smallest width for which alpha = sqrt(m) exp(max gap + 0.05) works.
  double first_width = 0.0;
  double width_growth = 2.0;
  double gap_constant = 2.0;
  double theta = 0.5;
  double delta = 0.3;
};

class GrowthProfile {
 public:
  // nu = 1 on [1, r1], nu = n on [r_{n-1}, r_n] with r_{n+1} = r_n^2.
  static GrowthProfile squaring_step(double r1);
  static GrowthProfile ds_synthetic(const DsParameters& params);
  // nu = values[k] on [breakpoints[k-1], breakpoints[k]] (breakpoints[-1] = 1);
  // the last value continues to infinity, so values.size() == breakpoints.size() + 1.
  static GrowthProfile custom(const std::vector<double>& breakpoints, const std::vector<double>& values);

  ProfileKind kind() const { return kind_; }
  double base_radius() const { return base_radius_; }
  const std::vector<NuSegment>& segments() const { return segments_; }
  // Largest log r covered; log_growth beyond it is +infinity (overflow).
  double max_log_r() const { return max_u_; }

  double nu(double log_r) const;
  // \int_0^{log r} nu(u) du = log M(r); for log r < 0 the first value extends as a power.
  double log_growth(double log_r) const;

  // Radii (log) of spheres on which the map behaves like a power map
  // (ds_synthetic only), and the constants of the covering property.
  const std::vector<LogInterval>& power_spheres() const { return power_spheres_; }
  bool in_power_sphere(double log_r) const;
  double alpha() const { return alpha_; }
  double delta() const { return delta_; }

 private:
  void finalize();

  ProfileKind kind_ = ProfileKind::custom;
  double base_radius_ = 1.0;
  std::vector<NuSegment> segments_;
  std::vector<double> cumulative_;  // integral up to segments_[k].u0
  double max_u_ = 0.0;
  bool extends_to_infinity_ = false;
  std::vector<LogInterval> power_spheres_;
  double alpha_ = 0.0;
  double delta_ = 0.0;
};

// log M(r) for r >= 1 (throws for r < 1).
double growth_integral(const GrowthProfile& profile, double r);

struct PsiSegment {
  int n = 1;
  double t0 = 0.0;
  double t1 = 0.0;
  double slope = 1.0;
  double intercept = 0.0;
};

struct PsiForm {
  std::vector<PsiSegment> segments;
  double operator()(double t) const;
  const PsiSegment& segment(int n) const { return segments.at(static_cast<std::size_t>(n - 1)); }
};

// Piecewise linear psi(t) = n t + d_n on [log r_{n-1}, log r_n]; intercepts
// are read off the integral, giving d_n = (1 - 2^{n-1}) log r1.
PsiForm psi_form(const GrowthProfile& profile);

// log M(r, f o h) where f has the squaring-step growth with base r1 and h is
// the radial stretch with the same r1 and rho.
class ComposedGrowth {
 public:
  ComposedGrowth(double r1, double rho);
  double r1() const { return r1_; }
  double rho() const { return rho_; }
  const GrowthProfile& outer() const { return f_; }
  // Argument and result in log coordinates.
  double log_max(double log_r) const;
  // log M(r,F) / log r.
  double ratio(double log_r) const { return log_max(log_r) / log_r; }
  // log r_n = 2^{n-1} log r1.
  double log_rn(int n) const;

 private:
  double r1_;
  double rho_;
  GrowthProfile f_;
};

double composed_log_growth(double r1, double rho, double r);

struct DecreasingInterval {
  int n = 0;
  LogInterval log_range;  // [(1+rho) log r_n, 2 log r_n]
  double max_slope = 0.0;  // largest finite-difference slope of log M/log r in u
  bool verified = false;   // all sampled slopes strictly negative
};

// Intervals [r_n^{1+rho}, r_n^2], n in [n_first, n_last], with a 32-point
// finite-difference check of the decrease. n_last < n_first gives an empty list.
std::vector<DecreasingInterval> decreasing_intervals(double r1, double rho, int n_first, int n_last);

// Finite-window lower logarithmic density of the union of `intervals` (log
// coordinates, assumed disjoint): the minimum over log r in
// [tail_fraction * log_r_max, log_r_max] of |A cap [1,r]|_log / log r.
double lower_log_density(const std::vector<LogInterval>& intervals, double log_r_max, double tail_fraction = 0.5);

}  // namespace qrlab::growth
