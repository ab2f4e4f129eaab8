#pragma once

// CSV and image emission. CSV follows RFC 4180 with a header row; numbers are
// written in shortest round-trip form so equal inputs give equal bytes.

#include <iosfwd>
#include <string>
#include <vector>

#include "qrlab/escape.hpp"
#include "qrlab/growth.hpp"
#include "qrlab/modulus.hpp"

namespace qrlab {

std::string format_double(double v);

// index, center coordinates, status, level, first_exit, overflow flag.
void write_class_csv(const ClassField& field, std::ostream& os);

struct Rgb {
  unsigned char r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};
// bounded-so-far black; escaping gray, brighter for earlier exit; fast hue by level.
Rgb class_color(const EscapeClass& c, int horizon);
// P6 image of a 2D field, or of layer `layer` along the last axis of a 3D one.
void write_class_ppm(const ClassField& field, std::ostream& os, int layer = 0);

struct GrowthRow {
  double log_r = 0.0;
  double log_M = 0.0;
  double ratio = 0.0;
  bool decreasing_interval = false;
  int interval_index = 0;  // n of the enclosing interval, 0 if none
};

struct GrowthSummary {
  std::vector<GrowthRow> rows;
  std::vector<growth::DecreasingInterval> intervals;
  double density = 0.0;     // finite-window lower logarithmic density up to r_nmax
  double target = 0.0;      // (1 - rho) / (1 + rho)
  bool all_verified = false;
};

// Log grid (`points_per_generation` per doubling of log r) from r = r1^{1/2}
// up to r_{nmax}, for F = f o h with base r1 and stretch rho.
GrowthSummary growth_summary(double r1, double rho, int nmax, int points_per_generation = 64);
void write_growth_csv(const GrowthSummary& s, std::ostream& os);
void write_growth_summary(const GrowthSummary& s, double rho, std::ostream& os);

void write_modulus_csv(const ModulusProfile& profile, const std::vector<double>& r_grid, std::ostream& os);
void write_ratio_csv(const RatioReport& rep, std::ostream& os);
void write_hypothesis_csv(const HypothesisReport& rep, std::ostream& os);

}  // namespace qrlab
