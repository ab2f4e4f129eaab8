#include "qrlab/maps.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qrlab/config.hpp"
#include "qrlab/error.hpp"

namespace qrlab {

Point::Point(std::initializer_list<double> coords) : Point(std::span<const double>(coords.begin(), coords.size())) {}

Point::Point(std::span<const double> coords) {
  require(coords.size() >= 1 && coords.size() <= 3, "point: dimension must be 1..3");
  dim_ = static_cast<int>(coords.size());
  for (int i = 0; i < dim_; ++i) c_[i] = coords[i];
}

Point Point::zeros(int dim) {
  require(dim >= 1 && dim <= 3, "point: dimension must be 1..3");
  Point p;
  p.dim_ = dim;
  return p;
}

double Point::norm() const {
  if (dim_ == 2) return std::hypot(c_[0], c_[1]);
  if (dim_ == 3) return std::hypot(c_[0], c_[1], c_[2]);
  return std::abs(c_[0]);
}

bool Point::finite() const {
  for (int i = 0; i < dim_; ++i)
    if (!std::isfinite(c_[i])) return false;
  return true;
}

Point operator+(const Point& a, const Point& b) {
  require(a.dimension() == b.dimension(), "point: dimension mismatch");
  Point out = a;
  for (int i = 0; i < a.dimension(); ++i) out[i] += b[i];
  return out;
}

Point operator*(double s, const Point& a) {
  Point out = a;
  for (int i = 0; i < a.dimension(); ++i) out[i] *= s;
  return out;
}

MapDescriptor::MapDescriptor(Kind kind, int dim, std::optional<double> dilatation)
    : kind_(std::move(kind)), dim_(dim), dilatation_(dilatation) {}

MapDescriptor MapDescriptor::exp() { return {maps::Exp{}, 2, 1.0}; }

MapDescriptor MapDescriptor::lambda_exp(std::complex<double> lambda) {
  require(lambda != std::complex<double>(0.0, 0.0), "lambda-exp: lambda must be non-zero");
  return {maps::LambdaExp{lambda}, 2, 1.0};
}

MapDescriptor MapDescriptor::polynomial(std::vector<std::complex<double>> coefficients) {
  require(!coefficients.empty(), "polynomial: needs at least one coefficient");
  return {maps::Polynomial{std::move(coefficients)}, 2, 1.0};
}

MapDescriptor MapDescriptor::power(int degree) {
  require(degree >= 2, "power: degree must be at least 2");
  return {maps::Power{degree}, 2, 1.0};
}

MapDescriptor MapDescriptor::zorich(double scale) {
  require(std::isfinite(scale) && scale > 0.0, "zorich: scale must be positive");
  return {maps::Zorich{scale}, 3, std::nullopt};
}

MapDescriptor MapDescriptor::radial_power(double r1, double rho, int dimension) {
  require(r1 > 1.0 && std::isfinite(r1), "radial-power: r1 must exceed 1");
  require(rho > 0.0 && rho < 1.0, "radial-power: rho must lie in (0,1)");
  require(dimension == 2 || dimension == 3, "radial-power: dimension must be 2 or 3");
  return {maps::RadialPower{r1, rho, dimension}, dimension, std::nullopt};
}

MapDescriptor MapDescriptor::winding_power(int degree) {
  require(degree >= 2, "winding-power: degree must be at least 2");
  return {maps::WindingPower{degree}, 2, 1.0};
}

MapDescriptor MapDescriptor::with_dilatation_bound(double k) const {
  require(k >= 1.0, "dilatation bound must be at least 1");
  MapDescriptor out = *this;
  out.dilatation_ = k;
  return out;
}

namespace {

std::string fmt_num(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::string fmt_complex(std::complex<double> z) {
  if (z.imag() == 0.0) return fmt_num(z.real());
  return fmt_num(z.real()) + "|" + fmt_num(z.imag());
}

}  // namespace

std::string MapDescriptor::name() const {
  return std::visit(
      [](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, maps::Exp>) {
          return "exp";
        } else if constexpr (std::is_same_v<K, maps::LambdaExp>) {
          return "lambda-exp(" + fmt_complex(k.lambda) + ")";
        } else if constexpr (std::is_same_v<K, maps::Polynomial>) {
          std::string s = "poly(";
          for (std::size_t i = 0; i < k.coefficients.size(); ++i)
            s += (i ? "," : "") + fmt_complex(k.coefficients[i]);
          return s + ")";
        } else if constexpr (std::is_same_v<K, maps::Power>) {
          return "power(" + std::to_string(k.degree) + ")";
        } else if constexpr (std::is_same_v<K, maps::Zorich>) {
          return "zorich(" + fmt_num(k.scale) + ")";
        } else if constexpr (std::is_same_v<K, maps::RadialPower>) {
          return "radial(" + fmt_num(k.r1) + "," + fmt_num(k.rho) + "," + std::to_string(k.dimension) + ")";
        } else if constexpr (std::is_same_v<K, maps::WindingPower>) {
          return "winding(" + std::to_string(k.degree) + ")";
        } else {
          std::string s;
          for (std::size_t i = 0; i < k.factors.size(); ++i) s += (i ? "@" : "") + k.factors[i].name();
          return s;
        }
      },
      kind_);
}

bool MapDescriptor::is_radial() const {
  return std::holds_alternative<maps::RadialPower>(kind_) || std::holds_alternative<maps::Power>(kind_) ||
         std::holds_alternative<maps::WindingPower>(kind_);
}

double radial_power_log_norm(double r1, double rho, double log_s) {
  const double a = std::log(r1);
  if (log_s <= a) return a + log_s;
  // log r_n = 2^{n-1} a and log s in [log r_n, 2 log r_n].
  const double k = std::floor(std::log2(log_s / a));
  double log_rn = a * std::exp2(k);
  // Guard the floor against rounding at the seams.
  if (log_s < log_rn) log_rn *= 0.5;
  if (log_s > 2.0 * log_rn) log_rn *= 2.0;
  if (log_s <= (1.0 + rho) * log_rn) return (1.0 + 1.0 / rho) * log_s + (1.0 - 1.0 / rho) * log_rn;
  return log_s + 2.0 * log_rn;
}

namespace {

// Shirley-Chiu concentric map [-1,1]^2 -> unit disk.
std::pair<double, double> square_to_disk(double a, double b) {
  if (a == 0.0 && b == 0.0) return {0.0, 0.0};
  constexpr double q = std::numbers::pi / 4.0;
  double r, phi;
  if (std::abs(a) > std::abs(b)) {
    r = a;
    phi = q * (b / a);
  } else {
    r = b;
    phi = 2.0 * q - q * (a / b);
  }
  return {r * std::cos(phi), r * std::sin(phi)};
}

// Folds t into the fundamental interval [-1,1] of the reflection group
// generated by t -> 2 - t and t -> -2 - t; returns the parity of reflections.
std::pair<double, bool> fold(double t) {
  double u = t - 4.0 * std::floor((t + 1.0) / 4.0);
  if (u > 1.0) return {2.0 - u, true};
  return {u, false};
}

Point eval_zorich(const maps::Zorich& z, const Point& x) {
  const double half = 0.5 * z.scale;
  const auto [u, flip_u] = fold(x[0] / half);
  const auto [v, flip_v] = fold(x[1] / half);
  const auto [p, q] = square_to_disk(u, v);
  const double rho = std::min(1.0, std::hypot(p, q));
  const double theta = rho * std::numbers::pi / 2.0;
  double e0 = 0.0, e1 = 0.0;
  if (rho > 0.0) {
    e0 = std::sin(theta) * p / rho;
    e1 = std::sin(theta) * q / rho;
  }
  double e2 = std::cos(theta);
  if (flip_u != flip_v) e2 = -e2;
  const double s = std::exp(x[2]);
  return Point{s * e0, s * e1, s * e2};
}

Point eval_radial(const maps::RadialPower& h, const Point& x) {
  const double s = x.norm();
  if (s == 0.0) return x;
  const double log_h = radial_power_log_norm(h.r1, h.rho, std::log(s));
  // Scale factor |h|/|x| in log space to avoid spurious overflow.
  return std::exp(log_h - std::log(s)) * x;
}

std::complex<double> eval_poly(const maps::Polynomial& p, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (auto it = p.coefficients.rbegin(); it != p.coefficients.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::complex<double> int_power(std::complex<double> z, int d) {
  std::complex<double> acc = 1.0;
  for (int i = 0; i < d; ++i) acc *= z;
  return acc;
}

}  // namespace

Point MapDescriptor::operator()(const Point& x) const {
  return std::visit(
      [&](const auto& k) -> Point {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, maps::Exp>) {
          return Point::from_complex(std::exp(x.as_complex()));
        } else if constexpr (std::is_same_v<K, maps::LambdaExp>) {
          return Point::from_complex(k.lambda * std::exp(x.as_complex()));
        } else if constexpr (std::is_same_v<K, maps::Polynomial>) {
          return Point::from_complex(eval_poly(k, x.as_complex()));
        } else if constexpr (std::is_same_v<K, maps::Power>) {
          return Point::from_complex(int_power(x.as_complex(), k.degree));
        } else if constexpr (std::is_same_v<K, maps::Zorich>) {
          return eval_zorich(k, x);
        } else if constexpr (std::is_same_v<K, maps::RadialPower>) {
          return eval_radial(k, x);
        } else if constexpr (std::is_same_v<K, maps::WindingPower>) {
          const double r = x.norm();
          if (r == 0.0) return x;
          const double th = std::atan2(x[1], x[0]);
          const double rd = std::pow(r, k.degree);
          return Point{rd * std::cos(k.degree * th), rd * std::sin(k.degree * th)};
        } else {
          Point y = x;
          for (auto it = k.factors.rbegin(); it != k.factors.rend(); ++it) {
            y = (*it)(y);
            if (!y.finite()) break;
          }
          return y;
        }
      },
      kind_);
}

Point evaluate(const MapDescriptor& map, const Point& x) {
  require(x.dimension() == map.dimension(), "evaluate: point dimension differs from map dimension");
  require(x.finite(), "evaluate: non-finite input point");
  return map(x);
}

MapDescriptor compose(const MapDescriptor& outer, const MapDescriptor& inner) {
  require(outer.dimension() == inner.dimension(), "compose: dimension mismatch");
  maps::Composition c;
  auto append = [&](const MapDescriptor& m) {
    if (const auto* inner_c = std::get_if<maps::Composition>(&m.kind()))
      c.factors.insert(c.factors.end(), inner_c->factors.begin(), inner_c->factors.end());
    else
      c.factors.push_back(m);
  };
  append(outer);
  append(inner);
  std::optional<double> k;
  if (outer.dilatation_bound() && inner.dilatation_bound()) k = *outer.dilatation_bound() * *inner.dilatation_bound();
  return MapDescriptor(std::move(c), outer.dimension(), k);
}

MapDescriptor zorich_map(double scale) { return MapDescriptor::zorich(scale); }
MapDescriptor winding_power_map(int degree) { return MapDescriptor::winding_power(degree); }

namespace {

double parse_real(const std::string& s, const std::string& ctx) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(ErrorKind::config, ctx + ": cannot parse number '" + s + "'");
  return v;
}

int parse_degree(const std::string& s, const std::string& ctx) {
  const double v = parse_real(s, ctx);
  if (v != std::floor(v)) fail(ErrorKind::config, ctx + ": degree must be an integer");
  return static_cast<int>(v);
}

std::complex<double> parse_complex(const std::string& s, const std::string& ctx) {
  const auto bar = s.find('|');
  if (bar == std::string::npos) return {parse_real(s, ctx), 0.0};
  return {parse_real(s.substr(0, bar), ctx), parse_real(s.substr(bar + 1), ctx)};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

MapDescriptor parse_single(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::vector<std::string> args = colon == std::string::npos ? std::vector<std::string>{} : split(text.substr(colon + 1), ',');
  const std::string ctx = "map '" + text + "'";
  auto nargs = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) fail(ErrorKind::config, ctx + ": wrong number of parameters");
  };
  if (head == "exp") {
    nargs(0, 0);
    return MapDescriptor::exp();
  }
  if (head == "lambda-exp") {
    nargs(1, 2);
    const double im = args.size() == 2 ? parse_real(args[1], ctx) : 0.0;
    return MapDescriptor::lambda_exp({parse_real(args[0], ctx), im});
  }
  if (head == "poly") {
    nargs(1, 64);
    std::vector<std::complex<double>> c;
    for (const auto& a : args) c.push_back(parse_complex(a, ctx));
    return MapDescriptor::polynomial(std::move(c));
  }
  if (head == "power") {
    nargs(1, 1);
    return MapDescriptor::power(parse_degree(args[0], ctx));
  }
  if (head == "winding") {
    nargs(1, 1);
    return MapDescriptor::winding_power(parse_degree(args[0], ctx));
  }
  if (head == "zorich") {
    nargs(0, 1);
    return MapDescriptor::zorich(args.empty() ? 1.0 : parse_real(args[0], ctx));
  }
  if (head == "radial") {
    nargs(2, 3);
    const int m = args.size() == 3 ? parse_degree(args[2], ctx) : 2;
    return MapDescriptor::radial_power(parse_real(args[0], ctx), parse_real(args[1], ctx), m);
  }
  fail(ErrorKind::config, ctx + ": unknown map kind '" + head + "'");
}

}  // namespace

MapDescriptor parse_map_reference(const std::string& text) {
  const std::vector<std::string> parts = split(text, '@');
  require(!parts.empty(), "empty map reference");
  try {
    MapDescriptor acc = parse_single(parts.back());
    for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) acc = compose(parse_single(*it), acc);
    return acc;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_argument) fail(ErrorKind::config, "map '" + text + "': " + e.what());
    throw;
  }
}

std::string map_to_config(const MapDescriptor& map, const std::string& name) {
  std::ostringstream os;
  std::ostringstream nested;
  os << "[map." << name << "]\n";
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, maps::Exp>) {
          os << "kind = exp\n";
        } else if constexpr (std::is_same_v<K, maps::LambdaExp>) {
          os << "kind = lambda-exp\nlambda = " << fmt_complex(k.lambda) << '\n';
        } else if constexpr (std::is_same_v<K, maps::Polynomial>) {
          os << "kind = polynomial\ncoefficients = ";
          for (std::size_t i = 0; i < k.coefficients.size(); ++i) os << (i ? ", " : "") << fmt_complex(k.coefficients[i]);
          os << '\n';
        } else if constexpr (std::is_same_v<K, maps::Power>) {
          os << "kind = power\ndegree = " << k.degree << '\n';
        } else if constexpr (std::is_same_v<K, maps::Zorich>) {
          os << "kind = zorich\nscale = " << fmt_num(k.scale) << '\n';
        } else if constexpr (std::is_same_v<K, maps::RadialPower>) {
          os << "kind = radial-power\nr1 = " << fmt_num(k.r1) << "\nrho = " << fmt_num(k.rho)
             << "\ndimension = " << k.dimension << '\n';
        } else if constexpr (std::is_same_v<K, maps::WindingPower>) {
          os << "kind = winding-power\ndegree = " << k.degree << '\n';
        } else {
          os << "kind = composition\nfactors = " << k.factors.size() << '\n';
          for (std::size_t i = 0; i < k.factors.size(); ++i)
            nested << '\n' << map_to_config(k.factors[i], name + "." + std::to_string(i));
        }
      },
      map.kind());
  if (map.dilatation_bound()) os << "K = " << fmt_num(*map.dilatation_bound()) << '\n';
  os << nested.str();
  return os.str();
}

MapDescriptor map_from_config(const ConfigDocument& doc, const std::string& name) {
  const ConfigSection* sec = doc.find("map." + name);
  if (!sec) fail(ErrorKind::config, doc.source() + ": map '" + name + "' is not defined (no [map." + name + "] section)");
  const std::string kind = sec->get_string("kind");
  auto wrap = [&](auto&& make) -> MapDescriptor {
    try {
      return make();
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::invalid_argument) sec->error_at("kind", e.what());
      throw;
    }
  };
  MapDescriptor m = wrap([&]() -> MapDescriptor {
    if (kind == "exp") {
      sec->expect_keys({"kind", "K"});
      return MapDescriptor::exp();
    }
    if (kind == "lambda-exp") {
      sec->expect_keys({"kind", "lambda", "K"});
      return MapDescriptor::lambda_exp(parse_complex(sec->get_string("lambda"), "lambda"));
    }
    if (kind == "polynomial") {
      sec->expect_keys({"kind", "coefficients", "K"});
      std::vector<std::complex<double>> c;
      for (const auto& s : sec->get_list("coefficients")) c.push_back(parse_complex(s, "coefficients"));
      return MapDescriptor::polynomial(std::move(c));
    }
    if (kind == "power") {
      sec->expect_keys({"kind", "degree", "K"});
      return MapDescriptor::power(static_cast<int>(sec->get_int("degree")));
    }
    if (kind == "winding-power") {
      sec->expect_keys({"kind", "degree", "K"});
      return MapDescriptor::winding_power(static_cast<int>(sec->get_int("degree")));
    }
    if (kind == "zorich") {
      sec->expect_keys({"kind", "scale", "K"});
      return MapDescriptor::zorich(sec->get_double("scale", 1.0));
    }
    if (kind == "radial-power") {
      sec->expect_keys({"kind", "r1", "rho", "dimension", "K"});
      return MapDescriptor::radial_power(sec->get_double("r1"), sec->get_double("rho"),
                                         static_cast<int>(sec->get_int("dimension", 2)));
    }
    if (kind == "composition") {
      sec->expect_keys({"kind", "factors", "K"});
      const long long n = sec->get_int("factors");
      if (n < 2) sec->error_at("factors", "a composition needs at least two factors");
      MapDescriptor acc = map_from_config(doc, name + "." + std::to_string(n - 1));
      for (long long i = n - 2; i >= 0; --i) acc = compose(map_from_config(doc, name + "." + std::to_string(i)), acc);
      return acc;
    }
    sec->error_at("kind", "unknown map kind '" + kind + "'");
  });
  if (sec->has("K")) m = wrap([&] { return m.with_dilatation_bound(sec->get_double("K")); });
  return m;
}

}  // namespace qrlab
