#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "qrlab/config.hpp"
#include "qrlab/error.hpp"
#include "qrlab/maps.hpp"
#include "support.hpp"

using qrlab::MapDescriptor;
using qrlab::Point;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

// Winding number of the closed polygon f(r e^{it}) around 0, from summed
// principal-branch angle increments.
double winding_number(const MapDescriptor& f, double r, int n = 2000) {
  double total = 0.0;
  std::complex<double> prev = f(Point{r, 0.0}).as_complex();
  for (int k = 1; k <= n; ++k) {
    const double t = 2 * pi * k / n;
    const std::complex<double> cur = f(Point{r * std::cos(t), r * std::sin(t)}).as_complex();
    total += std::arg(cur / prev);
    prev = cur;
  }
  return total / (2 * pi);
}

}  // namespace

TEST_CASE("radial stretch examples") {
  const MapDescriptor h = MapDescriptor::radial_power(2.0, 0.5);
  const Point y = h(Point{1.0, 0.0});
  CHECK(y[0] == Approx(2.0));
  CHECK(y[1] == Approx(0.0));
  // Seam at s = r1 = 2: both branches give 4.
  CHECK(h(Point{2.0, 0.0}).norm() == Approx(4.0));
  CHECK(h(Point{0.0, 0.0}).norm() == 0.0);
}

TEST_CASE("radial stretch agrees with the three-branch oracle") {
  for (double rho : {0.2, 0.5, 0.8}) {
    const MapDescriptor h = MapDescriptor::radial_power(2.0, rho);
    for (double s = 0.1; s < 1e5; s *= 1.37) {
      const double want = qrtest::oracle_radial_norm(2.0, rho, s);
      CHECK(h(Point{0.0, s}).norm() == Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("exp and lambda exp") {
  const Point y = MapDescriptor::exp()(Point{0.0, pi});
  CHECK(y[0] == Approx(-1.0));
  CHECK(std::abs(y[1]) < 1e-15);
  const Point z = MapDescriptor::lambda_exp({0.5, 0.0})(Point{1.0, 0.0});
  CHECK(z[0] == Approx(0.5 * std::exp(1.0)));
}

TEST_CASE("composition order: outer applied last") {
  const MapDescriptor p = qrlab::compose(MapDescriptor::power(2), MapDescriptor::power(3));
  CHECK(p(Point{2.0, 0.0})[0] == Approx(64.0));
  const MapDescriptor e = qrlab::compose(MapDescriptor::exp(), MapDescriptor::radial_power(2.0, 0.5));
  CHECK(e(Point{1.0, 0.0})[0] == Approx(std::exp(2.0)));
  CHECK(e.name() == "exp@radial(2,0.5,2)");
  CHECK_THROWS_AS(qrlab::compose(MapDescriptor::exp(), MapDescriptor::zorich(1.0)), qrlab::Error);
}

TEST_CASE("zorich map: norm e^{x3}, unit value at the origin, period 2*scale") {
  const MapDescriptor z = MapDescriptor::zorich(1.0);
  const Point o = z(Point{0.0, 0.0, 0.0});
  CHECK(o.norm() == Approx(1.0));
  CHECK(o[2] == Approx(1.0));
  auto g = qrtest::rng(21);
  for (int i = 0; i < 200; ++i) {
    const Point x{qrtest::uniform(g, -3, 3), qrtest::uniform(g, -3, 3), qrtest::uniform(g, -4, 4)};
    const Point y = z(x);
    CHECK(y.norm() == Approx(std::exp(x[2])).epsilon(1e-12));
    const Point shifted = z(Point{x[0] + 2.0, x[1], x[2]});
    const Point shifted2 = z(Point{x[0], x[1] - 2.0, x[2]});
    for (int a = 0; a < 3; ++a) {
      CHECK(shifted[a] == Approx(y[a]).epsilon(1e-9));
      CHECK(shifted2[a] == Approx(y[a]).epsilon(1e-9));
    }
  }
  // Beam edge goes to the equator; across the edge the image changes hemisphere.
  CHECK(std::abs(z(Point{0.5, 0.0, 0.0})[2]) < 1e-12);
  CHECK(z(Point{0.7, 0.0, 0.0})[2] < 0.0);
  // Scale stretches the period.
  const MapDescriptor z3 = MapDescriptor::zorich(3.0);
  const Point a = z3(Point{0.4, 0.1, 0.2}), b = z3(Point{6.4, 0.1, 0.2});
  CHECK(a[0] == Approx(b[0]));
  CHECK(a[2] == Approx(b[2]));
}

TEST_CASE("winding power: i^2 = -1, norm r^d, winding number d") {
  const MapDescriptor w = MapDescriptor::winding_power(2);
  const Point y = w(Point{0.0, 1.0});
  CHECK(y[0] == Approx(-1.0));
  CHECK(std::abs(y[1]) < 1e-15);
  const MapDescriptor w3 = MapDescriptor::winding_power(3);
  CHECK(w3(Point{std::sqrt(2.0), std::sqrt(2.0)}).norm() == Approx(8.0));
  for (int d = 2; d <= 5; ++d)
    CHECK(winding_number(MapDescriptor::winding_power(d), 1.5) == Approx(d).epsilon(1e-9));
  CHECK(winding_number(MapDescriptor::power(3), 0.8) == Approx(3).epsilon(1e-9));
}

TEST_CASE("evaluate validates inputs") {
  CHECK_THROWS_AS(qrlab::evaluate(MapDescriptor::exp(), Point{1.0, 2.0, 3.0}), qrlab::Error);
  CHECK_THROWS_AS(qrlab::evaluate(MapDescriptor::exp(), Point{NAN, 0.0}), qrlab::Error);
  // Overflow shows up as a non-finite output, not an exception.
  CHECK_FALSE(qrlab::evaluate(MapDescriptor::exp(), Point{800.0, 0.0}).finite());
  CHECK_THROWS_AS(MapDescriptor::radial_power(1.0, 0.5), qrlab::Error);
  CHECK_THROWS_AS(MapDescriptor::radial_power(2.0, 1.0), qrlab::Error);
  CHECK_THROWS_AS(MapDescriptor::lambda_exp({0.0, 0.0}), qrlab::Error);
  CHECK_THROWS_AS(MapDescriptor::power(1), qrlab::Error);
}

TEST_CASE("map references and dimensions") {
  CHECK(qrlab::parse_map_reference("exp").name() == "exp");
  CHECK(qrlab::parse_map_reference("lambda-exp:0.3").name() == "lambda-exp(0.3)");
  CHECK(qrlab::parse_map_reference("zorich:2").dimension() == 3);
  CHECK(qrlab::parse_map_reference("radial:2,0.5,3").dimension() == 3);
  CHECK(qrlab::parse_map_reference("power:2@power:3")(Point{2.0, 0.0})[0] == Approx(64.0));
  CHECK(qrlab::parse_map_reference("poly:1,0|1")(Point{0.0, 1.0})[0] == Approx(0.0));  // 1 + i*i
  CHECK(qrlab::parse_map_reference("poly:0,0|1")(Point{2.0, 0.0})[1] == Approx(2.0));
  for (const char* bad : {"sin", "power:2.5", "radial:2", "exp:1", "zorich:-1", "power:x"}) {
    CAPTURE(bad);
    try {
      qrlab::parse_map_reference(bad);
      FAIL("accepted");
    } catch (const qrlab::Error& e) {
      CHECK(e.kind() == qrlab::ErrorKind::config);
    }
  }
}

TEST_CASE("structured text round trip of map descriptors") {
  const MapDescriptor maps[] = {
      MapDescriptor::exp(),
      MapDescriptor::lambda_exp({0.25, -0.5}),
      MapDescriptor::polynomial({{1.0, 0.0}, {0.0, 2.0}, {3.0, 0.0}}),
      MapDescriptor::zorich(1.5).with_dilatation_bound(4.0),
      qrlab::compose(MapDescriptor::exp(), MapDescriptor::radial_power(3.0, 0.25)),
      qrlab::compose(MapDescriptor::winding_power(2), qrlab::compose(MapDescriptor::power(3), MapDescriptor::exp())),
  };
  for (const auto& m : maps) {
    const std::string text = qrlab::map_to_config(m, "F");
    const auto doc = qrlab::ConfigDocument::parse(text);
    const MapDescriptor back = qrlab::map_from_config(doc, "F");
    CHECK(back.name() == m.name());
    CHECK(back.dilatation_bound() == m.dilatation_bound());
    const Point x = m.dimension() == 2 ? Point{0.3, -0.2} : Point{0.3, -0.2, 0.1};
    CHECK(back(x) == m(x));
  }
}

TEST_CASE("property: radial maps depend on |x| only and are increasing in |x|") {
  auto g = qrtest::rng(22);
  const MapDescriptor rs[] = {MapDescriptor::radial_power(2.0, 0.5), MapDescriptor::radial_power(3.0, 0.3, 3),
                              MapDescriptor::winding_power(3), MapDescriptor::power(2)};
  for (const auto& f : rs) {
    REQUIRE(f.is_radial());
    for (int i = 0; i < 300; ++i) {
      const double s = std::exp(qrtest::uniform(g, -3, 5));
      const double t = qrtest::uniform(g, 0, 2 * pi), ph = qrtest::uniform(g, 0, pi);
      Point a = f.dimension() == 2 ? Point{s, 0.0} : Point{s, 0.0, 0.0};
      Point b = f.dimension() == 2 ? Point{s * std::cos(t), s * std::sin(t)}
                                   : Point{s * std::sin(ph) * std::cos(t), s * std::sin(ph) * std::sin(t), s * std::cos(ph)};
      CHECK(f(b).norm() == Approx(f(a).norm()).epsilon(1e-12));
      const double s2 = s * (1.0 + qrtest::uniform(g, 1e-6, 1.0));
      Point c = f.dimension() == 2 ? Point{s2, 0.0} : Point{s2, 0.0, 0.0};
      CHECK(f(c).norm() > f(a).norm());
    }
  }
}

TEST_CASE("property: evaluation is pure and composition is associative") {
  auto g = qrtest::rng(23);
  const MapDescriptor f = MapDescriptor::lambda_exp({0.2, 0.1});
  const MapDescriptor h = MapDescriptor::radial_power(2.0, 0.4);
  const MapDescriptor k = MapDescriptor::power(2);
  const MapDescriptor left = qrlab::compose(qrlab::compose(f, h), k);
  const MapDescriptor right = qrlab::compose(f, qrlab::compose(h, k));
  for (int i = 0; i < 300; ++i) {
    const Point x{qrtest::uniform(g, -1.2, 1.2), qrtest::uniform(g, -1.2, 1.2)};
    const Point a = left(x), b = right(x);
    CHECK(left(x) == a);  // repeatable
    CHECK(std::abs(a[0] - b[0]) <= 1e-12 * std::max(1.0, a.norm()));
    CHECK(std::abs(a[1] - b[1]) <= 1e-12 * std::max(1.0, a.norm()));
    const Point direct = f(h(k(x)));
    CHECK(std::abs(a[0] - direct[0]) <= 1e-12 * std::max(1.0, a.norm()));
  }
}
