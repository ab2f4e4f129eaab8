#include "qrlab/modulus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qrlab/error.hpp"

namespace qrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log of the closed-form |f| along radial factors, or nullopt if not radial.
std::optional<double> radial_log_norm(const MapDescriptor& m, double u) {
  if (const auto* p = std::get_if<maps::Power>(&m.kind())) return p->degree * u;
  if (const auto* w = std::get_if<maps::WindingPower>(&m.kind())) return w->degree * u;
  if (const auto* h = std::get_if<maps::RadialPower>(&m.kind())) return radial_power_log_norm(h->r1, h->rho, u);
  return std::nullopt;
}

double safe_exp(double v) { return v > 709.0 ? std::exp(std::min(v, 1000.0)) : std::exp(v); }

}  // namespace

int default_samples(int dimension) { return dimension == 3 ? kDefaultSamples3d : kDefaultSamples2d; }

std::vector<Point> sphere_directions(int dimension, int n) {
  require(n >= 1, "sphere sampling: need at least one point");
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(n));
  if (dimension == 2) {
    for (int k = 0; k < n; ++k) {
      const double th = 2.0 * std::numbers::pi * k / n;
      out.push_back(Point{std::cos(th), std::sin(th)});
    }
  } else if (dimension == 3) {
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < n; ++k) {
      const double z = 1.0 - (2.0 * k + 1.0) / n;
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double th = golden_angle * k;
      out.push_back(Point{s * std::cos(th), s * std::sin(th), z});
    }
  } else {
    fail(ErrorKind::unsupported, "sphere sampling: dimension must be 2 or 3");
  }
  return out;
}

namespace {

ModulusEstimate sampled_extremum(const MapDescriptor& map, double r, int samples, bool want_max) {
  require(std::isfinite(r) && r > 0.0, "modulus: r must be positive and finite");
  require(samples >= 8, "modulus: need at least 8 samples");
  ModulusEstimate est;
  est.samples = samples;
  est.bias = want_max ? Bias::lower_bound : Bias::upper_bound;
  double best = want_max ? 0.0 : kInf;
  for (const Point& d : sphere_directions(map.dimension(), samples)) {
    const Point y = map(r * d);
    double v = y.finite() ? y.norm() : kInf;
    if (!std::isfinite(v)) est.overflow = true;
    best = want_max ? std::max(best, v) : std::min(best, v);
  }
  est.value = best;
  return est;
}

}  // namespace

ModulusEstimate max_modulus(const MapDescriptor& map, double r, int samples, bool use_closed_form) {
  if (use_closed_form) {
    require(std::isfinite(r) && r > 0.0, "modulus: r must be positive and finite");
    if (auto cf = ModulusProfile::closed_form_for(map)) {
      const double v = cf->max(r);
      return {v, Bias::exact, !std::isfinite(v), 0};
    }
  }
  return sampled_extremum(map, r, samples, true);
}

ModulusEstimate min_modulus(const MapDescriptor& map, double r, int samples, bool use_closed_form) {
  if (use_closed_form) {
    require(std::isfinite(r) && r > 0.0, "modulus: r must be positive and finite");
    if (auto cf = ModulusProfile::closed_form_for(map)) {
      const double v = cf->min(r);
      return {v, Bias::exact, !std::isfinite(v), 0};
    }
  }
  return sampled_extremum(map, r, samples, false);
}

ModulusEstimate refined_min_modulus(const MapDescriptor& map, double r, int start_samples, double rel_tol,
                                    int max_samples) {
  ModulusEstimate cur = sampled_extremum(map, r, start_samples, false);
  while (cur.samples * 2 <= max_samples) {
    ModulusEstimate next = sampled_extremum(map, r, cur.samples * 2, false);
    const double moved = std::abs(next.value - cur.value);
    const bool settled = (next.value == cur.value) || moved < rel_tol * std::abs(cur.value);
    cur = next;
    if (settled) break;
  }
  return cur;
}

ModulusProfile ModulusProfile::closed_form(std::string id, LogFn log_max, LogFn log_min) {
  ModulusProfile p;
  p.id_ = std::move(id);
  p.source_ = ProfileSource::closed_form;
  p.log_max_ = std::move(log_max);
  p.log_min_ = std::move(log_min);
  return p;
}

ModulusProfile ModulusProfile::exp() {
  return closed_form("exp", [](double u) { return std::exp(u); }, [](double u) { return -std::exp(u); });
}

ModulusProfile ModulusProfile::power(double d) {
  require(d > 0.0, "power profile: exponent must be positive");
  return closed_form("power(" + std::to_string(d) + ")", [d](double u) { return d * u; },
                     [d](double u) { return d * u; });
}

ModulusProfile ModulusProfile::synthetic_square() {
  const double ln2 = std::numbers::ln2;
  return closed_form("synthetic-square", [](double u) { return 2.0 * u; }, [ln2](double u) { return 2.0 * u - ln2; });
}

ModulusProfile ModulusProfile::from_growth(std::string id, growth::GrowthProfile profile) {
  ModulusProfile p;
  p.id_ = std::move(id);
  p.source_ = ProfileSource::nu_derived;
  auto g = std::make_shared<const growth::GrowthProfile>(std::move(profile));
  p.growth_ = g;
  p.log_max_ = [g](double u) { return g->log_growth(u); };
  if (g->kind() == growth::ProfileKind::ds_synthetic) {
    const double log_delta = std::log(g->delta());
    p.log_min_ = [g, log_delta](double u) { return g->in_power_sphere(u) ? g->log_growth(u) + log_delta : -kInf; };
  } else {
    p.log_min_ = [](double) { return -kInf; };
  }
  return p;
}

ModulusProfile ModulusProfile::sampled(MapDescriptor map, int budget, bool refine_min) {
  ModulusProfile p;
  p.source_ = ProfileSource::sphere_sampled;
  p.budget_ = budget > 0 ? budget : default_samples(map.dimension());
  require(p.budget_ >= 8, "sampled profile: budget must be at least 8");
  p.refine_min_ = refine_min;
  p.id_ = "sampled:" + map.name();
  p.map_ = std::make_shared<const MapDescriptor>(std::move(map));
  p.bind_sampler();
  return p;
}

void ModulusProfile::bind_sampler() {
  auto m = map_;
  const int budget = budget_;
  const bool refine = refine_min_;
  log_max_ = [m, budget](double u) {
    const double r = std::exp(u);
    if (!std::isfinite(r)) return kInf;
    if (r <= 0.0) return -kInf;
    return std::log(sampled_extremum(*m, r, budget, true).value);
  };
  log_min_ = [m, budget, refine](double u) {
    const double r = std::exp(u);
    if (!std::isfinite(r)) return kInf;
    if (r <= 0.0) return -kInf;
    const ModulusEstimate e = refine ? refined_min_modulus(*m, r, budget) : sampled_extremum(*m, r, budget, false);
    return std::log(e.value);
  };
}

ModulusProfile ModulusProfile::with_budget(int budget) const {
  if (source_ != ProfileSource::sphere_sampled) return *this;
  require(budget >= 8, "sampled profile: budget must be at least 8");
  ModulusProfile p = *this;
  p.budget_ = budget;
  p.bind_sampler();
  return p;
}

ModulusProfile ModulusProfile::with_min_refinement() const {
  if (source_ != ProfileSource::sphere_sampled) return *this;
  ModulusProfile p = *this;
  p.refine_min_ = true;
  p.bind_sampler();
  return p;
}

double ModulusProfile::max(double r) const {
  require(r > 0.0, "modulus profile: r must be positive");
  return safe_exp(log_max(std::log(r)));
}

double ModulusProfile::min(double r) const {
  require(r > 0.0, "modulus profile: r must be positive");
  return safe_exp(log_min(std::log(r)));
}

std::optional<ModulusProfile> ModulusProfile::closed_form_for(const MapDescriptor& map) {
  const std::string id = map.name();
  auto base = [&](const MapDescriptor& m) -> std::optional<std::pair<LogFn, LogFn>> {
    const auto& k = m.kind();
    if (std::holds_alternative<maps::Exp>(k) || std::holds_alternative<maps::Zorich>(k))
      return std::pair<LogFn, LogFn>{[](double u) { return std::exp(u); }, [](double u) { return -std::exp(u); }};
    if (const auto* l = std::get_if<maps::LambdaExp>(&k)) {
      const double ll = std::log(std::abs(l->lambda));
      return std::pair<LogFn, LogFn>{[ll](double u) { return ll + std::exp(u); },
                                     [ll](double u) { return ll - std::exp(u); }};
    }
    if (m.is_radial()) {
      auto f = [m](double u) { return *radial_log_norm(m, u); };
      return std::pair<LogFn, LogFn>{f, f};
    }
    return std::nullopt;
  };

  if (const auto* c = std::get_if<maps::Composition>(&map.kind())) {
    for (std::size_t i = 1; i < c->factors.size(); ++i)
      if (!c->factors[i].is_radial()) return std::nullopt;
    auto outer = base(c->factors.front());
    if (!outer) return std::nullopt;
    std::vector<MapDescriptor> inner(c->factors.begin() + 1, c->factors.end());
    auto chain = [inner](double u) {
      for (auto it = inner.rbegin(); it != inner.rend(); ++it) u = *radial_log_norm(*it, u);
      return u;
    };
    auto [fmax, fmin] = *outer;
    return closed_form(id, [fmax, chain](double u) { return fmax(chain(u)); },
                       [fmin, chain](double u) { return fmin(chain(u)); });
  }
  auto b = base(map);
  if (!b) return std::nullopt;
  return closed_form(id, b->first, b->second);
}

ModulusProfile profile_by_name(const std::string& name) {
  if (name == "exp") return ModulusProfile::exp();
  if (name == "square") return ModulusProfile::power(2.0);
  if (name == "cube") return ModulusProfile::power(3.0);
  if (name == "sqrt") return ModulusProfile::power(0.5);
  if (name == "synthetic-square") return ModulusProfile::synthetic_square();
  if (name == "ds-synthetic") return ModulusProfile::from_growth(name, growth::GrowthProfile::ds_synthetic({}));
  if (name.rfind("squaring-step", 0) == 0) {
    double r1 = 2.0;
    if (name.size() > 14 && name[13] == ':') r1 = std::stod(name.substr(14));
    else if (name != "squaring-step") fail(ErrorKind::config, "unknown profile '" + name + "'");
    return ModulusProfile::from_growth(name, growth::GrowthProfile::squaring_step(r1));
  }
  fail(ErrorKind::config, "unknown profile '" + name + "'");
}

MaxModulusTower iterate_max_modulus(const ModulusProfile& profile, double R, int n) {
  require(n >= 1, "iterate_max_modulus: n must be at least 1");
  require(R > 0.0 && std::isfinite(R), "iterate_max_modulus: R must be positive");
  MaxModulusTower t;
  double u = std::log(R);
  for (int k = 1; k <= n; ++k) {
    u = std::isfinite(u) ? profile.log_max(u) : kInf;
    t.log_values.push_back(u);
    const double v = std::exp(u);
    if (!t.overflow_at) {
      if (std::isfinite(v)) t.values.push_back(v);
      else t.overflow_at = k;
    }
  }
  return t;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  require(lo > 0.0 && hi >= lo && count >= 1, "log_grid: need 0 < lo <= hi and count >= 1");
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(count));
  if (count == 1) return {lo};
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) g.push_back(i + 1 == count ? hi : std::exp(a + (b - a) * i / (count - 1)));
  g.front() = lo;
  return g;
}

EscapeRadius find_escape_radius(const ModulusProfile& profile, double margin, double lo, double hi, int samples) {
  require(margin > 1.0, "find_escape_radius: margin must exceed 1");
  require(samples >= 2, "find_escape_radius: need at least two samples");
  const std::vector<double> grid = log_grid(lo, hi, samples);
  const double log_margin = std::log(margin);
  std::optional<std::size_t> first_good;
  for (std::size_t i = grid.size(); i-- > 0;) {
    const double u = std::log(grid[i]);
    if (profile.log_max(u) > log_margin + u) first_good = i;
    else break;
  }
  if (!first_good)
    fail(ErrorKind::not_found, "find_escape_radius: M(r) > margin*r fails at the top of the search range (bounded or "
                               "polynomial-like growth, or range too small)");
  return {grid[*first_good], margin};
}

RatioReport check_M_ratio_divergence(const ModulusProfile& profile, double A, const std::vector<double>& r_grid) {
  require(A > 1.0, "ratio check: A must exceed 1");
  RatioReport rep;
  const double log_a = std::log(A);
  for (double r : r_grid) {
    const double u = std::log(r);
    rep.r.push_back(r);
    rep.log_ratio.push_back(profile.log_max(u + log_a) - profile.log_max(u));
  }
  const std::size_t n = rep.log_ratio.size();
  if (n >= 3) {
    const std::size_t start = n - n / 3 - 1;
    bool nondecreasing = true;
    for (std::size_t i = start + 1; i < n; ++i) {
      // Differences of large logs carry rounding noise; a plateau is not a drop.
      const double slack = 1e-12 * std::max(1.0, std::abs(rep.log_ratio[i - 1]));
      nondecreasing = nondecreasing && rep.log_ratio[i] >= rep.log_ratio[i - 1] - slack;
    }
    rep.tail_increasing = nondecreasing && rep.log_ratio[n - 1] > rep.log_ratio[start];
  }
  return rep;
}

HypothesisReport check_min_modulus_hypothesis(const ModulusProfile& profile, double alpha, double delta,
                                              const std::vector<double>& r_grid, int search_samples,
                                              double threshold) {
  require(alpha > 1.0, "hypothesis check: alpha must exceed 1");
  require(delta > 0.0 && delta <= 1.0, "hypothesis check: delta must lie in (0,1]");
  require(search_samples >= 2, "hypothesis check: need at least two search samples");
  HypothesisReport rep;
  rep.threshold = threshold;
  rep.verdict = true;
  const double log_delta = std::log(delta);
  const double log_alpha = std::log(alpha);
  for (double r : r_grid) {
    const double u = std::log(r);
    HypothesisRow row;
    row.r = r;
    row.log_delta_M = log_delta + profile.log_max(u);
    row.log_m_s = -kInf;
    row.best_s = r;
    for (int i = 0; i < search_samples; ++i) {
      const double us = i + 1 == search_samples ? u + log_alpha : u + log_alpha * i / (search_samples - 1);
      const double lm = profile.log_min(us);
      if (lm > row.log_m_s) {
        row.log_m_s = lm;
        row.best_s = std::exp(us);
      }
    }
    row.pass = row.log_m_s >= row.log_delta_M;
    if (r >= threshold && !row.pass) rep.verdict = false;
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace qrlab
