#include "qrlab/escape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qrlab/error.hpp"
#include "qrlab/parallel.hpp"

namespace qrlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_norm(const Point& p) {
  if (!p.finite()) return kInf;
  const double v = p.norm();
  return v > 0.0 ? std::log(v) : -kInf;
}

// Iterates k times; nullopt once the point stops being finite.
std::optional<Point> iterate(const MapDescriptor& f, Point y, int k) {
  for (int i = 0; i < k; ++i) {
    y = f(y);
    if (!y.finite() || !std::isfinite(y.norm())) return std::nullopt;
  }
  return y;
}

// Polyline images of circles |y| = c R under f^k, subdivided until consecutive
// image points are closer than `spacing`. Returns false on overflow or when the
// point cap is hit.
bool circle_images(const MapDescriptor& f, int k, double R, double spacing, std::size_t cap,
                   std::vector<Point>& out) {
  constexpr int kInitial = 512;
  constexpr int kMaxDepth = 24;
  for (double c : {1.0, 0.75, 0.5, 0.25}) {
    auto image = [&](double t) { return iterate(f, Point{c * R * std::cos(t), c * R * std::sin(t)}, k); };
    struct Arc {
      double t0, t1;
      Point p0, p1;
      int depth;
    };
    std::vector<Arc> stack;
    std::optional<Point> prev = image(0.0);
    if (!prev) return false;
    for (int i = 1; i <= kInitial; ++i) {
      const double t = 2.0 * std::numbers::pi * i / kInitial;
      std::optional<Point> cur = image(t);
      if (!cur) return false;
      stack.push_back({2.0 * std::numbers::pi * (i - 1) / kInitial, t, *prev, *cur, 0});
      prev = cur;
    }
    // Depth-first in reverse so points come out in parameter order.
    std::reverse(stack.begin(), stack.end());
    while (!stack.empty()) {
      Arc a = stack.back();
      stack.pop_back();
      const double gap = std::hypot(a.p1[0] - a.p0[0], a.p1[1] - a.p0[1]);
      if (gap <= spacing || a.depth >= kMaxDepth) {
        out.push_back(a.p0);
        if (out.size() > cap) return false;
        continue;
      }
      const double tm = 0.5 * (a.t0 + a.t1);
      std::optional<Point> pm = image(tm);
      if (!pm) return false;
      stack.push_back({tm, a.t1, *pm, a.p1, a.depth + 1});
      stack.push_back({a.t0, tm, a.p0, *pm, a.depth + 1});
    }
  }
  return true;
}

HullSet build_hull_set(const MapDescriptor& f, int k, double R, int res) {
  HullSet hs;
  // Coarse pass for the extent, then a fine pass at half the cell width.
  std::vector<Point> pts;
  double extent = 0.0;
  if (!circle_images(f, k, R, kInf, 1u << 22, pts)) {
    hs.everything = true;
    return hs;
  }
  for (int pass = 0; pass < 3; ++pass) {
    for (const Point& p : pts) extent = std::max(extent, std::max(std::abs(p[0]), std::abs(p[1])));
    extent = extent * 1.05 + 1e-12;
    const double spacing = 0.5 * (2.0 * extent / res);
    std::vector<Point> fine;
    if (!circle_images(f, k, R, spacing, 1u << 23, fine)) {
      hs.everything = true;
      return hs;
    }
    double fine_extent = 0.0;
    for (const Point& p : fine) fine_extent = std::max(fine_extent, std::max(std::abs(p[0]), std::abs(p[1])));
    pts = std::move(fine);
    if (fine_extent <= extent) break;
  }
  extent = 0.0;
  for (const Point& p : pts) extent = std::max(extent, std::max(std::abs(p[0]), std::abs(p[1])));
  extent = extent * 1.05 + 1e-12;
  grid::GridSpec spec = grid::GridSpec::square(-extent, extent, res);
  grid::GridMask m(spec);
  for (const Point& p : pts)
    if (auto c = spec.locate(p.coords())) m.set(*c);
  hs.mask = grid::hull(m);
  return hs;
}

}  // namespace

bool HullSet::contains(const Point& p) const {
  if (everything) return true;
  if (!mask) return false;
  auto c = mask->spec().locate(p.coords());
  return c && mask->at(*c);
}

OrbitRecord orbit(const MapDescriptor& map, const Point& x, int budget, double bailout) {
  require(budget >= 1, "orbit: budget must be at least 1");
  require(bailout > 0.0, "orbit: bailout must be positive");
  require(x.finite(), "orbit: seed must be finite");
  require(x.dimension() == map.dimension(), "orbit: seed dimension does not match the map");
  OrbitRecord rec;
  rec.seed = x;
  Point y = x;
  for (int n = 1; n <= budget; ++n) {
    y = map(y);
    const double v = y.finite() ? y.norm() : kInf;
    rec.norms.push_back(std::isfinite(v) ? v : kInf);
    if (v > bailout && !rec.bailout_index) rec.bailout_index = n;
    if (!std::isfinite(v)) {
      rec.status = OrbitStatus::overflow;
      return rec;
    }
  }
  rec.status = rec.bailout_index && rec.norms.back() <= bailout ? OrbitStatus::returned_below_threshold
                                                                 : OrbitStatus::budget_exhausted;
  return rec;
}

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::A1: return "A1";
    case Criterion::A2: return "A2";
    case Criterion::hull: return "hull";
  }
  return "?";
}

const char* to_string(EscapeStatus s) {
  switch (s) {
    case EscapeStatus::bounded_so_far: return "bounded-so-far";
    case EscapeStatus::escaping: return "escaping";
    case EscapeStatus::fast: return "fast";
  }
  return "?";
}

Criterion parse_criterion(const std::string& text) {
  if (text == "A1" || text == "a1") return Criterion::A1;
  if (text == "A2" || text == "a2") return Criterion::A2;
  if (text == "hull") return Criterion::hull;
  fail(ErrorKind::config, "unknown criterion '" + text + "' (expected A1, A2 or hull)");
}

int fast_level_floor(int horizon) { return -(horizon / 2); }

Classifier::Classifier(MapDescriptor map, ModulusProfile profile, ClassifyParams params)
    : map_(std::move(map)), profile_(std::move(profile)), params_(params) {
  require(params_.horizon >= 2, "classify: horizon must be at least 2");
  require(std::isfinite(params_.R) && params_.R > 0.0, "classify: R must be positive");
  if (params_.criterion == Criterion::hull && map_.dimension() != 2)
    fail(ErrorKind::unsupported, "classify: hull criterion needs a planar map");
  R0_ = params_.R0 > 0.0 ? params_.R0 : find_escape_radius(profile_, 2.0, 1e-3, 1e4).R0;
  if (!(params_.R > R0_))
    fail(ErrorKind::invalid_argument,
         "classify: R = " + std::to_string(params_.R) + " does not exceed the escape radius " + std::to_string(R0_));

  const int N = params_.horizon;
  const int K = 2 * N;
  const MaxModulusTower tower = iterate_max_modulus(profile_, params_.R, K);
  double largest = params_.R;
  for (double v : tower.values) largest = std::max(largest, v);
  bailout_ = params_.bailout > 0.0 ? params_.bailout : 10.0 * largest;
  if (!std::isfinite(bailout_)) bailout_ = std::numeric_limits<double>::max();

  log_thresholds_.assign(static_cast<std::size_t>(K) + 1, std::log(params_.R));
  switch (params_.criterion) {
    case Criterion::A2:
      for (int k = 1; k <= K; ++k) log_thresholds_[k] = tower.log_values[k - 1];
      break;
    case Criterion::A1: {
      const int samples = params_.sphere_samples > 0 ? params_.sphere_samples : default_samples(map_.dimension());
      const std::vector<Point> dirs = sphere_directions(map_.dimension(), samples);
      std::vector<std::vector<double>> per(dirs.size());
      parallel_for(dirs.size(), [&](std::size_t i) {
        std::vector<double> v(static_cast<std::size_t>(K), kInf);
        Point y = params_.R * dirs[i];
        for (int k = 1; k <= K; ++k) {
          y = map_(y);
          const double ln = log_norm(y);
          if (!std::isfinite(ln) && ln > 0.0) break;
          v[k - 1] = ln;
        }
        per[i] = std::move(v);
      });
      for (int k = 1; k <= K; ++k) {
        double best = -kInf;
        for (const auto& v : per) best = std::max(best, v[k - 1]);
        log_thresholds_[k] = best;
      }
      break;
    }
    case Criterion::hull: {
      hulls_.resize(static_cast<std::size_t>(K) + 1);
      bool everything = false;
      for (int k = 1; k <= K; ++k) {
        // Once an image overflows, so do all later ones.
        if (everything) {
          hulls_[k].everything = true;
          continue;
        }
        hulls_[k] = build_hull_set(map_, k, params_.R, params_.hull_resolution);
        everything = hulls_[k].everything;
      }
      break;
    }
  }
}

Classifier::LogOrbit Classifier::log_orbit(const Point& x, int horizon) const {
  require(x.dimension() == map_.dimension(), "classify: point dimension does not match the map");
  require(x.finite(), "classify: point must be finite");
  LogOrbit o;
  o.log_norms.assign(static_cast<std::size_t>(horizon), kInf);
  Point y = x;
  for (int n = 1; n <= horizon; ++n) {
    y = map_(y);
    const double ln = log_norm(y);
    if (ln == kInf) {
      o.overflow_from = n;
      break;
    }
    o.log_norms[n - 1] = ln;
    o.points.push_back(y);
  }
  return o;
}

bool Classifier::level_holds(const LogOrbit& o, int L, int horizon) const {
  for (int n = std::max(1, -L); n <= horizon; ++n) {
    const int k = n + L;
    const double v = o.log_norms[n - 1];
    if (v == kInf) continue;  // overflowed iterate: counted as passing, flagged by the caller
    const double t = log_thresholds_[k];
    switch (params_.criterion) {
      case Criterion::A2:
        if (!(v >= t)) return false;
        break;
      case Criterion::A1:
        if (!(v > t)) return false;
        break;
      case Criterion::hull:
        if (k == 0) {
          if (!(v > t)) return false;
        } else if (hulls_[k].contains(o.points[n - 1])) {
          return false;
        }
        break;
    }
  }
  return true;
}

bool Classifier::satisfies_level(const Point& x, int L, int horizon) const {
  require(horizon >= 1 && horizon <= params_.horizon, "classify: horizon outside the precomputed range");
  require(L >= -horizon && L <= horizon, "classify: level outside [-N, N]");
  return level_holds(log_orbit(x, horizon), L, horizon);
}

EscapeClass Classifier::classify(const Point& x) const { return classify(x, params_.horizon); }

EscapeClass Classifier::classify(const Point& x, int horizon) const {
  require(horizon >= 1 && horizon <= params_.horizon, "classify: horizon outside the precomputed range");
  const LogOrbit o = log_orbit(x, horizon);
  EscapeClass c;
  c.criterion = params_.criterion;
  // Upward search; stopping at the first failure keeps ties on the smaller L.
  for (int L = -horizon; L <= horizon; ++L) {
    if (!level_holds(o, L, horizon)) break;
    c.level = L;
  }
  const double log_R = std::log(params_.R);
  for (int n = 1; n <= horizon; ++n)
    if (o.log_norms[n - 1] > log_R) {
      c.first_exit = n;
      break;
    }
  const bool escaping = o.log_norms[horizon - 1] > log_R;
  c.overflow_extrapolated = o.overflow_from != 0;
  if (escaping) c.status = c.level && *c.level >= fast_level_floor(horizon) ? EscapeStatus::fast : EscapeStatus::escaping;
  return c;
}

EscapeClass classify_point(const MapDescriptor& map, const Point& x, const ModulusProfile& profile,
                           const ClassifyParams& params) {
  return Classifier(map, profile, params).classify(x);
}

ClassField classify_grid(const Classifier& classifier, const grid::GridSpec& spec, int threads) {
  if (spec.dimension() != classifier.map().dimension())
    fail(ErrorKind::unsupported, "classify_grid: grid and map dimensions differ");
  ClassField field{spec, classifier.params(), std::vector<EscapeClass>(spec.cell_count())};
  const int m = spec.dimension();
  parallel_for(
      spec.cell_count(),
      [&](std::size_t i) {
        const grid::Coords c = spec.center(i);
        field.cells[i] = classifier.classify(Point(std::span<const double>(c.data(), static_cast<std::size_t>(m))));
      },
      threads);
  return field;
}

ClassField classify_grid(const MapDescriptor& map, const grid::GridSpec& spec, const ModulusProfile& profile,
                         const ClassifyParams& params, int threads) {
  return classify_grid(Classifier(map, profile, params), spec, threads);
}

CoveringReport covering_check(const MapDescriptor& map, double r, double alpha, double beta, int samples) {
  require(r > 0.0 && std::isfinite(r), "covering_check: r must be positive");
  require(alpha > 1.0 && beta > 1.0, "covering_check: alpha and beta must exceed 1");
  require(samples >= 64, "covering_check: need at least 64 samples");
  const int m = map.dimension();
  CoveringReport rep;
  rep.M_r = max_modulus(map, r, samples).value;
  rep.angular_samples = samples;
  rep.radial_samples = m == 2 ? samples / 4 : 64;
  rep.log_bin = std::log(beta) / 32.0;
  if (!std::isfinite(rep.M_r)) return rep;

  // Angular binning: 2D by argument, 3D by (z, azimuth) equal-area cells.
  const int na = m == 2 ? std::max(8, samples / 16) : std::max(4, static_cast<int>(std::sqrt(samples / 16.0)));
  rep.angular_bins = na;
  const std::size_t bins_per_row = m == 2 ? static_cast<std::size_t>(na) : static_cast<std::size_t>(na) * 2 * na;
  auto angular_bin = [&](const Point& p, double norm) -> std::size_t {
    const double phi = std::atan2(p[1], p[0]) + std::numbers::pi;
    const int ia = std::min(2 * na - 1, static_cast<int>(phi / (2.0 * std::numbers::pi) * (m == 2 ? na : 2 * na)));
    if (m == 2) return static_cast<std::size_t>(std::min(ia, na - 1));
    const double z = std::clamp(p[2] / norm, -1.0, 1.0);
    const int iz = std::min(na - 1, static_cast<int>((z + 1.0) / 2.0 * na));
    return static_cast<std::size_t>(iz) * 2 * na + static_cast<std::size_t>(ia);
  };

  const double base = std::log(rep.M_r);
  constexpr std::size_t kMaxRows = 1u << 14;
  std::vector<std::vector<std::uint8_t>> rows;
  const std::vector<Point> dirs = sphere_directions(m, samples);
  const int nr = rep.radial_samples;
  for (int i = 0; i < nr; ++i) {
    const double rad = r * std::pow(alpha, static_cast<double>(i) / (nr - 1));
    for (const Point& d : dirs) {
      const Point y = map(rad * d);
      if (!y.finite()) continue;
      const double nv = y.norm();
      if (!(nv > 0.0) || !std::isfinite(nv)) continue;
      const double off = (std::log(nv) - base) / rep.log_bin;
      if (off < 0.0 || off >= static_cast<double>(kMaxRows)) continue;
      const std::size_t row = static_cast<std::size_t>(off);
      if (rows.size() <= row) rows.resize(row + 1);
      if (rows[row].empty()) rows[row].assign(bins_per_row, 0);
      rows[row][angular_bin(y, nv)] = 1;
    }
  }
  auto full = [&](std::size_t i) {
    return !rows[i].empty() && std::all_of(rows[i].begin(), rows[i].end(), [](std::uint8_t b) { return b != 0; });
  };
  const double log_beta = std::log(beta);
  double best = -kInf;
  std::size_t i = 0;
  while (i < rows.size()) {
    if (!full(i)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < rows.size() && full(j)) ++j;
    const double lo = base + static_cast<double>(i) * rep.log_bin;
    const double hi = base + static_cast<double>(j) * rep.log_bin;
    const double x = hi - log_beta;
    if (x >= lo && x > base) best = std::max(best, x);
    i = j;
  }
  if (std::isfinite(best)) {
    rep.holds = true;
    rep.R = std::exp(best);
  }
  return rep;
}

namespace {

// Marks the image grid cells hit by f on a k x k subsample of every occupied
// cell, k chosen from how far f stretches the cell.
grid::GridMask image_raster(const MapDescriptor& f, const grid::GridMask& U, const grid::GridSpec& out,
                            bool& inconclusive) {
  const grid::GridSpec& in = U.spec();
  grid::GridMask img(out);
  const double target = 0.5 * std::min(out.cell_width(0), out.cell_width(1));
  const double wx = in.cell_width(0), wy = in.cell_width(1);
  for (std::size_t idx = 0; idx < U.size(); ++idx) {
    if (!U.at(idx)) continue;
    const grid::Coords c = in.center(idx);
    const double x0 = c[0] - 0.5 * wx, y0 = c[1] - 0.5 * wy;
    const Point pc = f(Point{c[0], c[1]});
    double stretch = 0.0;
    for (int corner = 0; corner < 4; ++corner) {
      const Point q = f(Point{x0 + (corner & 1) * wx, y0 + (corner >> 1) * wy});
      if (!q.finite() || !pc.finite()) {
        stretch = kInf;
        break;
      }
      stretch = std::max(stretch, std::hypot(q[0] - pc[0], q[1] - pc[1]));
    }
    const int k = std::isfinite(stretch) ? std::clamp(static_cast<int>(std::ceil(2.0 * stretch / target)) + 1, 2, 64)
                                         : 64;
    for (int a = 0; a <= k; ++a)
      for (int b = 0; b <= k; ++b) {
        const Point q = f(Point{x0 + wx * a / k, y0 + wy * b / k});
        std::optional<std::size_t> cell;
        if (q.finite()) cell = out.locate(q.coords());
        if (cell) img.set(*cell);
        else inconclusive = true;
      }
  }
  return img;
}

}  // namespace

HullInclusionReport hull_image_inclusion_check(const MapDescriptor& map, const grid::GridMask& U,
                                               const grid::GridSpec& image_spec) {
  if (map.dimension() != 2 || U.spec().dimension() != 2 || image_spec.dimension() != 2)
    fail(ErrorKind::unsupported, "hull_image_inclusion_check: planar maps and grids only");
  HullInclusionReport rep;
  const grid::GridMask lhs = image_raster(map, grid::hull(U), image_spec, rep.inconclusive);
  const grid::GridMask rhs = grid::dilate(grid::hull(image_raster(map, U, image_spec, rep.inconclusive)), 1);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    if (lhs.at(i) && !rhs.at(i)) rep.violations.push_back(i);
  rep.holds = rep.violations.empty();
  return rep;
}

}  // namespace qrlab
