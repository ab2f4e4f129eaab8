#pragma once

// Seeded generators and independent oracles shared by the unit and
// acceptance tests. Nothing here calls into the code under test except to
// build inputs.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <vector>

#include "qrlab/grid.hpp"

namespace qrtest {

using qrlab::grid::GridMask;
using qrlab::grid::GridSpec;

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}
inline int uniform_int(std::mt19937_64& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

// --- mask generators -------------------------------------------------------

// Union of a few random discs and rings, centred anywhere in the box.
inline GridMask random_blob_mask(std::mt19937_64& g, const GridSpec& spec) {
  GridMask m(spec);
  const double lo = spec.axis(0).lo, hi = spec.axis(0).hi, w = hi - lo;
  const int shapes = uniform_int(g, 1, 5);
  for (int s = 0; s < shapes; ++s) {
    const double cx = uniform(g, lo, hi), cy = uniform(g, lo, hi);
    const double outer = uniform(g, 0.03, 0.3) * w;
    const double inner = uniform(g, 0.0, 1.0) < 0.5 ? uniform(g, 0.2, 0.8) * outer : 0.0;
    for (std::size_t i = 0; i < spec.cell_count(); ++i) {
      const auto c = spec.center(i);
      const double d = std::hypot(c[0] - cx, c[1] - cy);
      if (d < outer && d >= inner) m.set(i);
    }
  }
  return m;
}

// Salt noise on top of a blob mask, so hulls see ragged boundaries.
inline GridMask random_noisy_mask(std::mt19937_64& g, const GridSpec& spec) {
  GridMask m = random_blob_mask(g, spec);
  const double p = uniform(g, 0.0, 0.15);
  for (std::size_t i = 0; i < spec.cell_count(); ++i)
    if (uniform(g, 0.0, 1.0) < p) m.set(i, !m.at(i));
  return m;
}

// Annulus or disc around a random centre, kept away from the frame.
inline GridMask random_annulus_or_blob(std::mt19937_64& g, const GridSpec& spec) {
  GridMask m(spec);
  const double lo = spec.axis(0).lo, hi = spec.axis(0).hi, w = hi - lo;
  const double outer = uniform(g, 0.12, 0.3) * w;
  const double cx = uniform(g, lo + outer + 0.05 * w, hi - outer - 0.05 * w);
  const double cy = uniform(g, lo + outer + 0.05 * w, hi - outer - 0.05 * w);
  const bool ring = uniform(g, 0.0, 1.0) < 0.5;
  const double inner = ring ? uniform(g, 0.3, 0.7) * outer : 0.0;
  const double wobble = uniform(g, 0.0, 0.2);
  const int lobes = uniform_int(g, 2, 6);
  for (std::size_t i = 0; i < spec.cell_count(); ++i) {
    const auto c = spec.center(i);
    const double d = std::hypot(c[0] - cx, c[1] - cy);
    const double t = std::atan2(c[1] - cy, c[0] - cx);
    const double o = outer * (1.0 + wobble * std::sin(lobes * t));
    if (d < o && d >= inner) m.set(i);
  }
  return m;
}

// --- flood-fill oracle -----------------------------------------------------

struct OracleComponents {
  int total = 0;
  int bounded = 0;
};

// Breadth-first 4-neighbour flood fill on the unoccupied cells of a 2D mask.
inline OracleComponents oracle_complement_components(const GridMask& m) {
  const GridSpec& s = m.spec();
  const int nx = s.resolution(0), ny = s.resolution(1);
  std::vector<int> seen(static_cast<std::size_t>(nx) * ny, 0);
  auto at = [&](int x, int y) { return m.at(static_cast<std::size_t>(y) * nx + x); };
  OracleComponents out;
  for (int y0 = 0; y0 < ny; ++y0)
    for (int x0 = 0; x0 < nx; ++x0) {
      if (at(x0, y0) || seen[static_cast<std::size_t>(y0) * nx + x0]) continue;
      ++out.total;
      bool frame = false;
      std::deque<std::pair<int, int>> q{{x0, y0}};
      seen[static_cast<std::size_t>(y0) * nx + x0] = 1;
      while (!q.empty()) {
        auto [x, y] = q.front();
        q.pop_front();
        if (x == 0 || y == 0 || x == nx - 1 || y == ny - 1) frame = true;
        const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& e : d) {
          const int u = x + e[0], v = y + e[1];
          if (u < 0 || v < 0 || u >= nx || v >= ny) continue;
          const std::size_t k = static_cast<std::size_t>(v) * nx + u;
          if (at(u, v) || seen[k]) continue;
          seen[k] = 1;
          q.push_back({u, v});
        }
      }
      if (!frame) ++out.bounded;
    }
  return out;
}

// Hull oracle: everything not reachable from the frame through unoccupied cells.
inline GridMask oracle_hull(const GridMask& m) {
  const GridSpec& s = m.spec();
  const int nx = s.resolution(0), ny = s.resolution(1);
  std::vector<int> outside(static_cast<std::size_t>(nx) * ny, 0);
  std::deque<std::pair<int, int>> q;
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      const bool frame = x == 0 || y == 0 || x == nx - 1 || y == ny - 1;
      const std::size_t k = static_cast<std::size_t>(y) * nx + x;
      if (frame && !m.at(k)) {
        outside[k] = 1;
        q.push_back({x, y});
      }
    }
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop_front();
    const int d[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (const auto& e : d) {
      const int u = x + e[0], v = y + e[1];
      if (u < 0 || v < 0 || u >= nx || v >= ny) continue;
      const std::size_t k = static_cast<std::size_t>(v) * nx + u;
      if (m.at(k) || outside[k]) continue;
      outside[k] = 1;
      q.push_back({u, v});
    }
  }
  GridMask h(s);
  for (std::size_t k = 0; k < h.size(); ++k) h.set(k, !outside[k]);
  return h;
}

// --- growth oracles --------------------------------------------------------

// nu for the squaring-step construction: 1 on [1, r1], n on [r_{n-1}, r_n],
// r_n = r1^{2^{n-1}}; given and returned in linear radius.
inline double step_nu(double r1, double t) {
  if (t <= r1) return 1.0;
  double rn = r1;
  int n = 1;
  while (t > rn) {
    rn *= rn;
    ++n;
  }
  return n;
}

// Breakpoints r_1, r_2, ... up to (and including the first beyond) r.
inline std::vector<double> step_breakpoints(double r1, double r) {
  std::vector<double> b;
  double rn = r1;
  while (rn < r) {
    b.push_back(rn);
    rn *= rn;
  }
  return b;
}

// Adaptive Gauss-Kronrod on int_1^r nu(t)/t dt, split at the jumps of nu.
inline double quadrature_log_growth(const std::function<double(double)>& nu, const std::vector<double>& breaks,
                                    double r) {
  using boost::math::quadrature::gauss_kronrod;
  double lo = 1.0, acc = 0.0;
  std::vector<double> pts;
  for (double b : breaks)
    if (b > 1.0 && b < r) pts.push_back(b);
  pts.push_back(r);
  for (double hi : pts) {
    if (hi <= lo) continue;
    // Geometric sub-splits keep each piece's 1/t variation mild.
    const int pieces = std::max(1, static_cast<int>(std::ceil(std::log2(hi / lo))));
    const double ratio = std::pow(hi / lo, 1.0 / pieces);
    double a = lo;
    for (int i = 0; i < pieces; ++i) {
      const double b = i + 1 == pieces ? hi : a * ratio;
      acc += gauss_kronrod<double, 61>::integrate([&](double t) { return nu(t) / t; }, a, b, 15, 1e-15);
      a = b;
    }
    lo = hi;
  }
  return acc;
}

// |h|(s) of the radial stretch, from its three-branch definition.
inline double oracle_radial_norm(double r1, double rho, double s) {
  if (s <= r1) return r1 * s;
  double rn = r1;
  while (s > rn * rn) rn *= rn;
  if (s <= std::pow(rn, 1.0 + rho)) return std::pow(s, 1.0 / rho) * s * std::pow(rn, 1.0 - 1.0 / rho);
  return rn * rn * s;
}

}  // namespace qrtest
