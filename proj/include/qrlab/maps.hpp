#pragma once

// Explicit quasiregular maps: planar entire functions, Zorich-type map,
// the radial stretch used to break log-convexity of M(r), winding power maps
// and their compositions.

#include <array>
#include <complex>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qrlab {

class ConfigDocument;

class Point {
 public:
  Point() = default;
  Point(std::initializer_list<double> coords);
  explicit Point(std::span<const double> coords);
  static Point zeros(int dim);
  static Point from_complex(std::complex<double> z) { return Point{z.real(), z.imag()}; }

  int dimension() const { return dim_; }
  double operator[](int i) const { return c_[i]; }
  double& operator[](int i) { return c_[i]; }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  std::complex<double> as_complex() const { return {c_[0], c_[1]}; }

  double norm() const;
  bool finite() const;
  bool operator==(const Point&) const = default;

 private:
  std::array<double, 3> c_{};
  int dim_ = 0;
};

Point operator+(const Point& a, const Point& b);
Point operator*(double s, const Point& a);

namespace maps {

struct Exp {};
struct LambdaExp {
  std::complex<double> lambda;
};
// Coefficients from the constant term upward.
struct Polynomial {
  std::vector<std::complex<double>> coefficients;
};
struct Power {
  int degree = 2;
};
// Beam |x1|,|x2| <= scale/2 sent to the upper hemisphere times e^{x3}; period
// 2*scale in x1 and x2 after reflection.
struct Zorich {
  double scale = 1.0;
};
// h(x) = r1 x on |x| <= r1, |x|^{1/rho} x r_n^{1-1/rho} on [r_n, r_n^{1+rho}],
// r_n^2 x on [r_n^{1+rho}, r_n^2], with r_{n+1} = r_n^2.
struct RadialPower {
  double r1 = 2.0;
  double rho = 0.5;
  int dimension = 2;
};
// (r, theta) -> (r^d, d theta) in the plane.
struct WindingPower {
  int degree = 2;
};
struct Composition;

}  // namespace maps

class MapDescriptor;

namespace maps {
// Factors ordered outermost first: evaluation applies the last factor first.
struct Composition {
  std::vector<MapDescriptor> factors;
};
}  // namespace maps

class MapDescriptor {
 public:
  using Kind = std::variant<maps::Exp, maps::LambdaExp, maps::Polynomial, maps::Power, maps::Zorich,
                            maps::RadialPower, maps::WindingPower, maps::Composition>;

  static MapDescriptor exp();
  static MapDescriptor lambda_exp(std::complex<double> lambda);
  static MapDescriptor polynomial(std::vector<std::complex<double>> coefficients);
  static MapDescriptor power(int degree);
  static MapDescriptor zorich(double scale);
  static MapDescriptor radial_power(double r1, double rho, int dimension = 2);
  static MapDescriptor winding_power(int degree);

  const Kind& kind() const { return kind_; }
  int dimension() const { return dim_; }
  // Upper bound on the dilatation, carried as metadata only.
  std::optional<double> dilatation_bound() const { return dilatation_; }
  MapDescriptor with_dilatation_bound(double k) const;
  // Short human-readable name, e.g. "exp", "radial(2,0.5)", "exp@radial(2,0.5)".
  std::string name() const;
  // Maps on which |f(x)| depends on |x| only.
  bool is_radial() const;

  Point operator()(const Point& x) const;

 private:
  MapDescriptor(Kind kind, int dim, std::optional<double> dilatation);
  friend MapDescriptor compose(const MapDescriptor& outer, const MapDescriptor& inner);

  Kind kind_;
  int dim_ = 2;
  std::optional<double> dilatation_;
};

// Throws on dimension mismatch or non-finite input. Numeric overflow in the
// map itself shows up as non-finite output coordinates.
Point evaluate(const MapDescriptor& map, const Point& x);
MapDescriptor compose(const MapDescriptor& outer, const MapDescriptor& inner);
MapDescriptor zorich_map(double scale);
MapDescriptor winding_power_map(int degree);

// log |h|(s) for the radial stretch, given log s; s = 0 handled by callers.
double radial_power_log_norm(double r1, double rho, double log_s);

// Compact map references used on the command line:
//   exp | lambda-exp:RE[,IM] | poly:c0,c1,... | power:d | winding:d |
//   zorich:scale | radial:r1,rho[,m] and "outer@inner" for composition.
MapDescriptor parse_map_reference(const std::string& text);

// Structured text form: a [map.NAME] section with kind-specific keys;
// compositions list their factors, stored in [map.NAME.0], [map.NAME.1], ...
std::string map_to_config(const MapDescriptor& map, const std::string& name);
MapDescriptor map_from_config(const ConfigDocument& doc, const std::string& name);

}  // namespace qrlab
