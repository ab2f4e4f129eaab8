#pragma once

// Orbits and escape classification at level L:
//   A2:   |f^n(x)| >= M^{n+L}(R)               (iterated maximum modulus)
//   A1:   |f^n(x)| >  M(R, f^{n+L})            (sampled maximum of the iterate)
//   hull: f^n(x) outside T(f^{n+L}(B(0,R)))    (planar maps only)
// each required for every orbit index n in [max(1,-L), N], N the horizon.
// Larger L means faster escape.

#include <optional>
#include <string>
#include <vector>

#include "qrlab/grid.hpp"
#include "qrlab/maps.hpp"
#include "qrlab/modulus.hpp"

namespace qrlab {

enum class OrbitStatus { budget_exhausted, overflow, returned_below_threshold };

struct OrbitRecord {
  Point seed;
  std::vector<double> norms;         // |f^n(x)|, n = 1..; last entry +inf on overflow
  OrbitStatus status = OrbitStatus::budget_exhausted;
  std::optional<int> bailout_index;  // first n with |f^n(x)| > bailout
};

// Iterates up to `budget` times. Passing the bailout is recorded but does not
// stop the iteration; only overflow does.
OrbitRecord orbit(const MapDescriptor& map, const Point& x, int budget, double bailout);

enum class Criterion { A1, A2, hull };
enum class EscapeStatus { bounded_so_far, escaping, fast };

const char* to_string(Criterion c);
const char* to_string(EscapeStatus s);
Criterion parse_criterion(const std::string& text);

struct EscapeClass {
  EscapeStatus status = EscapeStatus::bounded_so_far;
  // Largest L (in [-N, N]) whose condition holds at the horizon, if any.
  std::optional<int> level;
  Criterion criterion = Criterion::A2;
  std::optional<int> first_exit;  // first n with |f^n(x)| > R
  bool overflow_extrapolated = false;
};

struct ClassifyParams {
  double R = 5.0;
  int horizon = 8;
  Criterion criterion = Criterion::A2;
  int sphere_samples = 0;   // A1 / hull sampling on |y| = R; 0 = default for the dimension
  int hull_resolution = 256;
  double bailout = 0.0;     // 0 = 10 x the largest finite M^k(R)
  // Escape radius: R must exceed it. 0 = search with find_escape_radius.
  double R0 = 0.0;
};

// Fast iff the level is at least -floor(N/2).
int fast_level_floor(int horizon);

// Rasterized T(f^k(B(0,R))) on an auto-sized square grid.
struct HullSet {
  bool everything = false;  // the image overflowed; treated as all of R^2
  std::optional<grid::GridMask> mask;
  bool contains(const Point& p) const;
};

// Precomputes everything that does not depend on the point: the tower
// M^k(R), the sampled maxima M(R,f^k) and the hull sets, for k = 0..2N.
class Classifier {
 public:
  Classifier(MapDescriptor map, ModulusProfile profile, ClassifyParams params);

  const ClassifyParams& params() const { return params_; }
  const MapDescriptor& map() const { return map_; }
  double R0() const { return R0_; }
  double bailout() const { return bailout_; }
  // log of the right-hand side threshold sequence, index k = 0..2N.
  const std::vector<double>& log_thresholds() const { return log_thresholds_; }
  const std::vector<HullSet>& hull_sets() const { return hulls_; }

  EscapeClass classify(const Point& x) const;
  // Classification with a shorter horizon (<= params().horizon), same thresholds.
  EscapeClass classify(const Point& x, int horizon) const;
  // Does level L hold for x at horizon N?
  bool satisfies_level(const Point& x, int L, int horizon) const;

 private:
  struct LogOrbit {
    std::vector<double> log_norms;  // index n-1
    std::vector<Point> points;      // finite iterates, index n-1
    int overflow_from = 0;          // first n whose value overflowed, 0 if none
  };
  LogOrbit log_orbit(const Point& x, int horizon) const;
  bool level_holds(const LogOrbit& o, int L, int horizon) const;

  MapDescriptor map_;
  ModulusProfile profile_;
  ClassifyParams params_;
  double R0_ = 0.0;
  double bailout_ = 0.0;
  std::vector<double> log_thresholds_;
  std::vector<HullSet> hulls_;
};

EscapeClass classify_point(const MapDescriptor& map, const Point& x, const ModulusProfile& profile,
                           const ClassifyParams& params);

struct ClassField {
  grid::GridSpec spec;
  ClassifyParams params;
  std::vector<EscapeClass> cells;
};

// Classifies the cell centers. 3D grids need a 3D map; deterministic for any
// worker count (threads = 0 uses thread_count()).
ClassField classify_grid(const Classifier& classifier, const grid::GridSpec& spec, int threads = 0);
ClassField classify_grid(const MapDescriptor& map, const grid::GridSpec& spec, const ModulusProfile& profile,
                         const ClassifyParams& params, int threads = 0);

struct CoveringReport {
  bool holds = false;
  double R = 0.0;          // largest R > M(r) with A(R, beta R) covered
  double M_r = 0.0;        // max modulus at r used as the lower limit
  int angular_samples = 0;
  int radial_samples = 0;
  double log_bin = 0.0;    // radial tolerance in log |y|
  int angular_bins = 0;    // angular tolerance 2 pi / angular_bins (per axis in 3D)
};

// Samples f on the closed annulus A(r, alpha r) and looks for rings of the
// image that are fully covered at the binning tolerance.
CoveringReport covering_check(const MapDescriptor& map, double r, double alpha, double beta, int samples);

struct HullInclusionReport {
  bool holds = false;
  bool inconclusive = false;  // some image point left the image grid
  std::vector<std::size_t> violations;  // cells of f(T(U)) outside the dilated T(f(U))
};

// f(T(U)) subset of T(f(U)) on the image grid, with one cell of dilation on
// the right-hand side.
HullInclusionReport hull_image_inclusion_check(const MapDescriptor& map, const grid::GridMask& U,
                                               const grid::GridSpec& image_spec);

}  // namespace qrlab
