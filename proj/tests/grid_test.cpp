#include <cmath>
#include <sstream>

#include "doctest.h"
#include "qrlab/error.hpp"
#include "qrlab/grid.hpp"
#include "support.hpp"

using namespace qrlab::grid;

namespace {

// Ring of cells with centre distance in [inner, outer).
GridMask ring(const GridSpec& s, double inner, double outer) {
  GridMask m(s);
  for (std::size_t i = 0; i < s.cell_count(); ++i) {
    const auto c = s.center(i);
    const double d = std::hypot(c[0], c[1]);
    if (d >= inner && d < outer) m.set(i);
  }
  return m;
}

GridMask disk(const GridSpec& s, double radius) { return ring(s, -1.0, radius); }

}  // namespace

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(GridSpec({{0, 1}}, {4}), qrlab::Error);
  CHECK_THROWS_AS(GridSpec({{0, 1}, {0, 1}}, {1, 4}), qrlab::Error);
  CHECK_THROWS_AS(GridSpec({{0, 1}, {1, 1}}, {4, 4}), qrlab::Error);
  CHECK_THROWS_AS(GridSpec({{0, 1}, {0, 1}, {0, 1}, {0, 1}}, {2, 2, 2, 2}), qrlab::Error);
  const GridSpec s({{-1, 1}, {0, 4}}, {4, 8});
  CHECK(s.cell_count() == 32);
  CHECK(s.cell_width(0) == doctest::Approx(0.5));
  CHECK(s.cell_width(1) == doctest::Approx(0.5));
}

TEST_CASE("index and unravel round trip, first axis fastest") {
  const GridSpec s({{0, 1}, {0, 1}, {0, 1}}, {3, 4, 5});
  for (std::size_t i = 0; i < s.cell_count(); ++i) CHECK(s.index(s.unravel(i)) == i);
  CHECK(s.index({1, 0, 0}) == 1);
  CHECK(s.index({0, 1, 0}) == 3);
  CHECK(s.index({0, 0, 1}) == 12);
}

TEST_CASE("locate and nearest cell") {
  const GridSpec s = GridSpec::square(-2, 2, 4);
  const double p[2] = {-1.5, 1.9};
  CHECK(s.locate(p) == s.index({0, 3, 0}));
  const double edge[2] = {2.0, 2.0};
  CHECK(s.locate(edge) == s.index({3, 3, 0}));
  const double out[2] = {2.1, 0.0};
  CHECK_FALSE(s.locate(out).has_value());
  const double origin[2] = {0.0, 0.0};
  // Tie between four centres goes to the lower index on each axis.
  CHECK(s.nearest_cell(origin) == s.index({1, 1, 0}));
}

TEST_CASE("rasterize: ball B(0,1) on [-2,2]^2 at 4x4 occupies the 4 centre cells") {
  const GridSpec s = GridSpec::square(-2, 2, 4);
  const auto r = rasterize(Ball{{0.0, 0.0}, 1.0}, s);
  CHECK_FALSE(r.empty_intersection);
  CHECK(r.mask.count() == 4);
  // Oracle: direct centre-in-ball test.
  for (std::size_t i = 0; i < s.cell_count(); ++i) {
    const auto c = s.center(i);
    CHECK(r.mask.at(i) == (std::hypot(c[0], c[1]) < 1.0));
  }
}

TEST_CASE("rasterize: degenerate ball gives an empty mask with the warning flag") {
  const auto r = rasterize(Ball{{0.0, 0.0}, 0.0}, GridSpec::square(-2, 2, 8));
  CHECK(r.mask.empty());
  CHECK(r.empty_intersection);
  const auto far = rasterize(Ball{{10.0, 10.0}, 1.0}, GridSpec::square(-2, 2, 8));
  CHECK(far.empty_intersection);
}

TEST_CASE("rasterize: sup-norm annulus A_inf(1,2) on [-3,3]^2 is a square ring") {
  const GridSpec s = GridSpec::square(-3, 3, 12);
  const auto r = rasterize(SupNormAnnulus{1.0, 2.0}, s);
  std::size_t expect = 0;
  for (std::size_t i = 0; i < s.cell_count(); ++i) {
    const auto c = s.center(i);
    const double n = std::max(std::abs(c[0]), std::abs(c[1]));
    const bool in = n > 1.0 && n < 2.0;
    expect += in;
    CHECK(r.mask.at(i) == in);
  }
  CHECK(r.mask.count() == expect);
  CHECK(components(r.mask, true).bounded_count() == 1);
}

TEST_CASE("rasterize: euclidean annulus, half-space, cell list, 3D ball") {
  const GridSpec s = GridSpec::square(-3, 3, 30);
  const auto a = rasterize(EuclideanAnnulus{1.0, 2.5}, s);
  for (std::size_t i = 0; i < s.cell_count(); ++i) {
    const auto c = s.center(i);
    const double d = std::hypot(c[0], c[1]);
    CHECK(a.mask.at(i) == (d > 1.0 && d < 2.5));
  }
  const auto h = rasterize(HalfSpace{{1.0, 0.0}, 0.0}, s);
  CHECK(h.mask.count() == s.cell_count() / 2);
  const auto l = rasterize(CellList{{0, 5, 7}}, s);
  CHECK(l.mask.count() == 3);
  CHECK_THROWS_AS(rasterize(CellList{{s.cell_count()}}, s), qrlab::Error);

  const GridSpec c = GridSpec::cube(-2, 2, 8);
  const auto b = rasterize(Ball{{0.0, 0.0, 0.0}, 1.0}, c);
  // The 8 cells around the origin have centres at distance sqrt(3)/4 ... < 1.
  CHECK(b.mask.count() > 8);
  CHECK_THROWS_AS(rasterize(Ball{{0.0, 0.0}, 1.0}, c), qrlab::Error);
}

TEST_CASE("components: full mask has no complement components") {
  GridMask m(GridSpec::square(0, 1, 10));
  for (std::size_t i = 0; i < m.size(); ++i) m.set(i);
  CHECK(components(m, true).count() == 0);
  CHECK(components(m, false).count() == 1);
}

TEST_CASE("components: ring complement has bounded inside and unbounded outside") {
  const GridSpec s = GridSpec::square(-4, 4, 64);
  const auto lab = components(ring(s, 1.5, 2.5), true);
  CHECK(lab.count() == 2);
  CHECK(lab.bounded_count() == 1);
  // Scan order: the outer region owns cell 0 and gets label 0.
  CHECK(lab.labels[0] == 0);
  CHECK_FALSE(lab.bounded[0]);
}

TEST_CASE("components: two disjoint rings give 3 complement components, 2 bounded") {
  const GridSpec s = GridSpec::square(-6, 6, 96);
  GridMask m(s);
  for (std::size_t i = 0; i < s.cell_count(); ++i) {
    const auto c = s.center(i);
    const double d1 = std::hypot(c[0] + 3, c[1]), d2 = std::hypot(c[0] - 3, c[1]);
    if ((d1 >= 1 && d1 < 2) || (d2 >= 1 && d2 < 2)) m.set(i);
  }
  const auto lab = components(m, true);
  const auto oracle = qrtest::oracle_complement_components(m);
  CHECK(lab.count() == 3);
  CHECK(lab.bounded_count() == 2);
  CHECK(oracle.total == 3);
  CHECK(oracle.bounded == 2);
}

TEST_CASE("components: 3D spherical shell encloses one bounded component") {
  const GridSpec s = GridSpec::cube(-3, 3, 24);
  GridMask m(s);
  for (std::size_t i = 0; i < s.cell_count(); ++i) {
    const auto c = s.center(i);
    const double d = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
    if (d >= 1.5 && d < 2.5) m.set(i);
  }
  const auto lab = components(m, true);
  CHECK(lab.count() == 2);
  CHECK(lab.bounded_count() == 1);
  CHECK(components(m, false).count() == 1);
}

TEST_CASE("hull: ring becomes a solid disk, nested rings the outer disk") {
  const GridSpec s = GridSpec::square(-4, 4, 80);
  CHECK(hull(ring(s, 1.5, 2.5)) == disk(s, 2.5));
  const GridMask nested = ring(s, 0.5, 1.0) | ring(s, 2.0, 3.0);
  CHECK(hull(nested) == disk(s, 3.0));
  CHECK(hull(nested) == qrtest::oracle_hull(nested));
}

TEST_CASE("hull: convex blob unchanged; convexity predicate") {
  const GridSpec s = GridSpec::square(-4, 4, 40);
  const GridMask d = disk(s, 2.0);
  CHECK(hull(d) == d);
  CHECK(is_topologically_convex(d));
  CHECK_FALSE(is_topologically_convex(ring(s, 1.0, 2.0)));
  CHECK(is_topologically_convex(GridMask(s)));
}

TEST_CASE("property: hull agrees with the flood-fill oracle on random masks") {
  auto g = qrtest::rng(11);
  const GridSpec s = GridSpec::square(-1, 1, 48);
  for (int trial = 0; trial < 60; ++trial) {
    const GridMask m = qrtest::random_noisy_mask(g, s);
    const GridMask h = hull(m);
    CHECK(h == qrtest::oracle_hull(m));
    const auto lab = components(m, true);
    const auto o = qrtest::oracle_complement_components(m);
    CHECK(static_cast<int>(lab.count()) == o.total);
    CHECK(static_cast<int>(lab.bounded_count()) == o.bounded);
  }
}

TEST_CASE("property: complement labels partition the unoccupied cells") {
  auto g = qrtest::rng(12);
  const GridSpec s = GridSpec::square(-1, 1, 40);
  for (int trial = 0; trial < 40; ++trial) {
    const GridMask m = qrtest::random_noisy_mask(g, s);
    const auto lab = components(m, true);
    std::vector<std::size_t> sizes(lab.count(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.at(i)) {
        CHECK(lab.labels[i] == kNoLabel);
      } else {
        REQUIRE(lab.labels[i] >= 0);
        REQUIRE(static_cast<std::size_t>(lab.labels[i]) < lab.count());
        ++sizes[static_cast<std::size_t>(lab.labels[i])];
      }
    }
    CHECK(sizes == lab.sizes);
    // Same label => face-connected: each component mask is a single component.
    for (std::size_t k = 0; k < lab.count(); ++k)
      CHECK(components(lab.component_mask(static_cast<std::int32_t>(k)), false).count() == 1);
  }
}

TEST_CASE("property: hull laws on random masks (idempotent, extensive, monotone)") {
  auto g = qrtest::rng(13);
  const GridSpec s = GridSpec::square(-1, 1, 32);
  for (int trial = 0; trial < 80; ++trial) {
    const GridMask u = qrtest::random_noisy_mask(g, s);
    const GridMask v = u | qrtest::random_blob_mask(g, s);
    const GridMask hu = hull(u);
    CHECK(hull(hu) == hu);
    CHECK(u.subset_of(hu));
    CHECK(hu.subset_of(hull(v)));
  }
}

TEST_CASE("dilate and inner boundary") {
  const GridSpec s = GridSpec::square(0, 5, 5);
  GridMask m(s);
  m.set(s.index({2, 2, 0}));
  CHECK(dilate(m, 1).count() == 5);
  CHECK(dilate(m, 2).count() == 13);
  CHECK(dilate(m, 0) == m);
  GridMask block(s);
  for (int x = 1; x <= 3; ++x)
    for (int y = 1; y <= 3; ++y) block.set(s.index({x, y, 0}));
  CHECK(inner_boundary(block).count() == 8);
}

TEST_CASE("slice of a 3D mask") {
  const GridSpec s = GridSpec::cube(0, 1, 4);
  GridMask m(s);
  m.set(s.index({1, 2, 3}));
  const GridMask l = slice(m, 3);
  CHECK(l.spec().dimension() == 2);
  CHECK(l.count() == 1);
  CHECK(l.at(l.spec().index({1, 2, 0})));
  CHECK(slice(m, 0).empty());
}

TEST_CASE("P4 round trip and P5 header; top row is the largest y") {
  auto g = qrtest::rng(14);
  const GridSpec s({{0, 1}, {0, 1}}, {13, 7});
  const GridMask m = qrtest::random_noisy_mask(g, s);
  std::stringstream ss;
  write_pbm(m, ss);
  CHECK(read_pbm(ss, s) == m);

  GridMask corner(s);
  corner.set(s.index({0, 6, 0}));  // top-left cell
  std::stringstream p4;
  write_pbm(corner, p4);
  const std::string bytes = p4.str();
  const std::string header = "P4\n13 7\n";
  REQUIRE(bytes.substr(0, header.size()) == header);
  CHECK(static_cast<unsigned char>(bytes[header.size()]) == 0x80);

  std::stringstream p5;
  write_pgm(corner, p5);
  CHECK(p5.str().substr(0, 12) == "P5\n13 7\n255\n");
  CHECK(p5.str().size() == 12 + 13 * 7);
}

TEST_CASE("raw layout: magic, little-endian header, round trip in 2D and 3D") {
  auto g = qrtest::rng(15);
  const GridSpec s2 = GridSpec::square(-1, 1, 9);
  const GridMask m2 = qrtest::random_noisy_mask(g, s2);
  std::stringstream ss2;
  write_raw(m2, ss2);
  const std::string b2 = ss2.str();
  CHECK(b2.substr(0, 4) == "QRLB");
  CHECK(b2.size() == 16 + 81);
  CHECK(b2[4] == 2);
  CHECK(b2[8] == 9);
  CHECK(read_raw(ss2, {{-1, 1}, {-1, 1}}) == m2);

  const GridSpec s3({{0, 1}, {0, 1}, {0, 1}}, {3, 4, 5});
  GridMask m3(s3);
  for (std::size_t i = 0; i < m3.size(); i += 3) m3.set(i);
  std::stringstream ss3;
  write_raw(m3, ss3);
  CHECK(ss3.str().size() == 20 + 60);
  CHECK(read_raw(ss3, {{0, 1}, {0, 1}, {0, 1}}) == m3);

  std::stringstream bad("QRLX");
  CHECK_THROWS_AS(read_raw(bad, {{0, 1}, {0, 1}}), qrlab::Error);
}
