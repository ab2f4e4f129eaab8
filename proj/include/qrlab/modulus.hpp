#pragma once

// Maximum and minimum modulus M(r,f), m(r,f): sphere sampling, closed forms,
// iteration M^n(R), escape radius search and the growth hypotheses used for
// fast escape and spider's webs.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qrlab/growth.hpp"
#include "qrlab/maps.hpp"

namespace qrlab {

// Direction in which a sampled extremum can be off the true value.
enum class Bias { exact, lower_bound, upper_bound };

struct ModulusEstimate {
  double value = 0.0;
  Bias bias = Bias::exact;
  bool overflow = false;  // some sample evaluated to a non-finite point
  int samples = 0;        // 0 when a closed form was used
};

inline constexpr int kDefaultSamples2d = 4096;
inline constexpr int kDefaultSamples3d = 16384;
int default_samples(int dimension);

// Points on the unit sphere: uniform angles 2 pi k / n in 2D, spherical
// Fibonacci lattice in 3D.
std::vector<Point> sphere_directions(int dimension, int n);

ModulusEstimate max_modulus(const MapDescriptor& map, double r, int samples, bool use_closed_form = true);
ModulusEstimate min_modulus(const MapDescriptor& map, double r, int samples, bool use_closed_form = true);
// Doubles the budget until the sampled minimum moves by less than rel_tol.
ModulusEstimate refined_min_modulus(const MapDescriptor& map, double r, int start_samples, double rel_tol = 1e-3,
                                    int max_samples = 1 << 22);

enum class ProfileSource { closed_form, nu_derived, sphere_sampled };

class ModulusProfile {
 public:
  // Both functions take and return logarithms: u = log r -> log M(r), log m(r).
  using LogFn = std::function<double(double)>;

  static ModulusProfile closed_form(std::string id, LogFn log_max, LogFn log_min);
  static ModulusProfile exp();
  // M(r) = r^d = m(r).
  static ModulusProfile power(double d);
  // M(r) = r^2, m(r) = r^2 / 2.
  static ModulusProfile synthetic_square();
  // M from the growth integral. m = delta M on the profile's power spheres and 0
  // elsewhere (ds_synthetic); m = 0 for the other kinds, whose minimum is not modelled.
  static ModulusProfile from_growth(std::string id, growth::GrowthProfile profile);
  static ModulusProfile sampled(MapDescriptor map, int budget = 0, bool refine_min = false);
  // Closed form for the map if one is known.
  static std::optional<ModulusProfile> closed_form_for(const MapDescriptor& map);

  const std::string& id() const { return id_; }
  ProfileSource source() const { return source_; }
  double log_max(double log_r) const { return log_max_(log_r); }
  double log_min(double log_r) const { return log_min_(log_r); }
  // Linear values; +infinity once exp overflows.
  double max(double r) const;
  double min(double r) const;

  Bias max_bias() const { return source_ == ProfileSource::sphere_sampled ? Bias::lower_bound : Bias::exact; }
  Bias min_bias() const { return source_ == ProfileSource::sphere_sampled ? Bias::upper_bound : Bias::exact; }

  int budget() const { return budget_; }
  bool refines_min() const { return refine_min_; }
  // Copies with a different sampling budget / with refined minima; identity for
  // non-sampled profiles.
  ModulusProfile with_budget(int budget) const;
  ModulusProfile with_min_refinement() const;
  const growth::GrowthProfile* growth_profile() const { return growth_.get(); }
  const MapDescriptor* map() const { return map_.get(); }

 private:
  ModulusProfile() = default;
  void bind_sampler();

  std::string id_;
  ProfileSource source_ = ProfileSource::closed_form;
  LogFn log_max_;
  LogFn log_min_;
  int budget_ = 0;
  bool refine_min_ = false;
  std::shared_ptr<const growth::GrowthProfile> growth_;
  std::shared_ptr<const MapDescriptor> map_;
};

// Built-in profile names: exp, square (r^2), cube (r^3), sqrt (r^{1/2}),
// synthetic-square, squaring-step[:r1], ds-synthetic.
ModulusProfile profile_by_name(const std::string& name);

struct MaxModulusTower {
  std::vector<double> log_values;  // log M^k(R), k = 1..n; may end in +inf
  std::vector<double> values;      // linear values while finite
  std::optional<int> overflow_at;  // first k (1-based) whose linear value overflows
};

MaxModulusTower iterate_max_modulus(const ModulusProfile& profile, double R, int n);

struct EscapeRadius {
  double R0 = 0.0;
  double margin = 2.0;
};

// Smallest R on a geometric grid of `samples` points in [lo, hi] such that
// M(r) > margin * r for every grid r >= R. Throws ErrorKind::not_found otherwise.
EscapeRadius find_escape_radius(const ModulusProfile& profile, double margin, double lo, double hi, int samples = 256);

std::vector<double> log_grid(double lo, double hi, int count);

struct RatioReport {
  std::vector<double> r;
  std::vector<double> log_ratio;  // log M(Ar) - log M(r)
  bool tail_increasing = false;   // last third nondecreasing and strictly larger at its end
};

RatioReport check_M_ratio_divergence(const ModulusProfile& profile, double A, const std::vector<double>& r_grid);

struct HypothesisRow {
  double r = 0.0;
  double best_s = 0.0;
  double log_m_s = 0.0;        // log m(best_s)
  double log_delta_M = 0.0;    // log(delta M(r))
  bool pass = false;
};

struct HypothesisReport {
  std::vector<HypothesisRow> rows;
  double threshold = 0.0;
  bool verdict = false;  // every row with r >= threshold passes
};

// For every r: is there s in [r, alpha r] (log-spaced search) with m(s) >= delta M(r)?
HypothesisReport check_min_modulus_hypothesis(const ModulusProfile& profile, double alpha, double delta,
                                              const std::vector<double>& r_grid, int search_samples = 64,
                                              double threshold = 0.0);

}  // namespace qrlab
