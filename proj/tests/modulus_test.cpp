#include <cmath>
#include <numbers>

#include "doctest.h"
#include "qrlab/error.hpp"
#include "qrlab/growth.hpp"
#include "qrlab/modulus.hpp"
#include "support.hpp"

using namespace qrlab;
using doctest::Approx;

TEST_CASE("sphere directions are unit vectors; 2D angles are uniform") {
  const auto d2 = sphere_directions(2, 16);
  CHECK(d2.size() == 16);
  CHECK(d2[4][0] == Approx(0.0).epsilon(1e-15));
  CHECK(d2[4][1] == Approx(1.0));
  for (const auto& p : sphere_directions(3, 1000)) CHECK(p.norm() == Approx(1.0));
  // Fibonacci lattice: roughly balanced hemispheres.
  int upper = 0;
  for (const auto& p : sphere_directions(3, 1000)) upper += p[2] > 0;
  CHECK(upper == 500);
  CHECK_THROWS_AS(sphere_directions(4, 10), Error);
}

TEST_CASE("max and min modulus examples") {
  const MapDescriptor e = MapDescriptor::exp();
  CHECK(max_modulus(e, 1.0, 4096).value == Approx(std::exp(1.0)));
  CHECK(max_modulus(e, 1.0, 4096).bias == Bias::exact);
  const auto s = max_modulus(e, 10.0, 4096, false);
  CHECK(s.bias == Bias::lower_bound);
  CHECK(s.samples == 4096);
  CHECK(std::abs(s.value - std::exp(10.0)) / std::exp(10.0) < 1e-4);
  CHECK(min_modulus(e, 1.0, 4096).value == Approx(std::exp(-1.0)));
  CHECK(min_modulus(e, 1.0, 4096, false).value == Approx(std::exp(-1.0)).epsilon(1e-6));
  CHECK(max_modulus(MapDescriptor::winding_power(3), 2.0, 64).value == Approx(8.0));
  CHECK(min_modulus(MapDescriptor::winding_power(2), 3.0, 64, false).value == Approx(9.0));
  CHECK(min_modulus(MapDescriptor::radial_power(2.0, 0.5), 2.0, 64, false).value == Approx(4.0));
  // The Fibonacci lattice tops out at height 1 - 1/n, a hair below the pole.
  const double zm = max_modulus(MapDescriptor::zorich(1.0), 2.0, 4096, false).value;
  CHECK(zm <= std::exp(2.0));
  CHECK(zm >= std::exp(2.0 * (1.0 - 1.0 / 4096)) * (1 - 1e-12));
  CHECK(max_modulus(MapDescriptor::zorich(1.0), 2.0, 4096, false).samples == 4096);
  CHECK_THROWS_AS(max_modulus(e, 0.0, 64), Error);
  CHECK_THROWS_AS(max_modulus(e, 1.0, 4, false), Error);
}

TEST_CASE("closed forms cover compositions with radial inner factors") {
  const auto c = compose(MapDescriptor::exp(), MapDescriptor::radial_power(2.0, 0.5));
  const auto cf = ModulusProfile::closed_form_for(c);
  REQUIRE(cf.has_value());
  CHECK(cf->max(1.0) == Approx(std::exp(2.0)));
  CHECK(cf->min(1.0) == Approx(std::exp(-2.0)));
  CHECK_FALSE(ModulusProfile::closed_form_for(MapDescriptor::polynomial({{0.0, 0.0}, {1.0, 0.0}})).has_value());
  CHECK_FALSE(ModulusProfile::closed_form_for(compose(MapDescriptor::power(2), MapDescriptor::exp())).has_value());
  const auto lam = ModulusProfile::closed_form_for(MapDescriptor::lambda_exp({0.5, 0.0}));
  CHECK(lam->max(2.0) == Approx(0.5 * std::exp(2.0)));
}

TEST_CASE("maximum modulus tower examples") {
  const auto sq = iterate_max_modulus(ModulusProfile::power(2.0), 2.0, 3);
  REQUIRE(sq.values.size() == 3);
  CHECK(sq.values[0] == Approx(4.0));
  CHECK(sq.values[1] == Approx(16.0));
  CHECK(sq.values[2] == Approx(256.0));
  CHECK_FALSE(sq.overflow_at.has_value());

  const auto ex = iterate_max_modulus(ModulusProfile::exp(), 1.0, 3);
  const double e = std::exp(1.0);
  CHECK(ex.values[0] == Approx(e));
  CHECK(ex.values[1] == Approx(std::exp(e)));
  CHECK(ex.values[2] == Approx(std::exp(std::exp(e))));

  const auto over = iterate_max_modulus(ModulusProfile::exp(), 1.0, 6);
  REQUIRE(over.overflow_at.has_value());
  // log values 1, e, e^e, e^{e^e} ~ 3.8e6, then exp of that is inf.
  CHECK(*over.overflow_at == 4);
  CHECK(over.values.size() == 3);
  CHECK(over.log_values.size() == 6);
  CHECK(std::isfinite(over.log_values[3]));
  CHECK(std::isinf(over.log_values[4]));

  // Squaring-step profile with r1 = 2: M(4) = exp(log 2 + 2 log 2) = 8.
  const auto st = iterate_max_modulus(profile_by_name("squaring-step"), 4.0, 2);
  CHECK(st.values[0] == Approx(8.0).epsilon(1e-12));
  const double oracle = std::exp(qrtest::quadrature_log_growth([](double t) { return qrtest::step_nu(2.0, t); },
                                                               qrtest::step_breakpoints(2.0, 8.0), 8.0));
  CHECK(st.values[1] == Approx(oracle).epsilon(1e-10));
  CHECK(st.values[1] == Approx(64.0).epsilon(1e-12));
}

TEST_CASE("escape radius search") {
  const auto sq = find_escape_radius(ModulusProfile::power(2.0), 2.0, 1.0, 4.0, 201);
  CHECK(sq.R0 > 2.0);
  CHECK(sq.R0 < 2.0 * std::pow(4.0, 1.0 / 200) + 1e-12);
  const auto ex = find_escape_radius(ModulusProfile::exp(), 2.0, 0.01, 10.0, 64);
  CHECK(ex.R0 == Approx(0.01));
  try {
    find_escape_radius(ModulusProfile::power(0.5), 2.0, 0.01, 1e4);
    FAIL("found a radius for sqrt growth");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::not_found);
  }
  CHECK_THROWS_AS(find_escape_radius(ModulusProfile::exp(), 1.0, 0.1, 1.0), Error);
}

TEST_CASE("ratio divergence examples") {
  const auto grid = log_grid(1.0, 50.0, 30);
  const auto ex = check_M_ratio_divergence(ModulusProfile::exp(), 2.0, grid);
  CHECK(ex.tail_increasing);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(ex.log_ratio[i] == Approx(grid[i]));
  const auto cube = check_M_ratio_divergence(ModulusProfile::power(3.0), 2.0, grid);
  CHECK_FALSE(cube.tail_increasing);
  for (double v : cube.log_ratio) CHECK(v == Approx(3 * std::log(2.0)));
  const auto step = check_M_ratio_divergence(profile_by_name("squaring-step"), 2.0, log_grid(10.0, 1e12, 64));
  CHECK(step.tail_increasing);
}

TEST_CASE("minimum modulus hypothesis examples") {
  const auto grid = log_grid(10.0, 1e6, 64);
  const auto syn = check_min_modulus_hypothesis(ModulusProfile::synthetic_square(), 2.0, 0.5, grid);
  CHECK(syn.verdict);
  for (const auto& row : syn.rows) CHECK(row.pass);
  const auto ex = check_min_modulus_hypothesis(ModulusProfile::exp(), 2.0, 0.01, log_grid(10.0, 100.0, 16));
  CHECK_FALSE(ex.verdict);
  for (const auto& row : ex.rows) CHECK_FALSE(row.pass);
  const auto ds = profile_by_name("ds-synthetic");
  const double alpha = ds.growth_profile()->alpha();
  const auto dsr = check_min_modulus_hypothesis(ds, alpha, 0.3, grid);
  CHECK(dsr.verdict);
  // Below threshold failures are tolerated.
  const auto thr = check_min_modulus_hypothesis(ModulusProfile::exp(), 2.0, 0.01, log_grid(10.0, 100.0, 16), 8, 1e9);
  CHECK(thr.verdict);
}

TEST_CASE("profile names") {
  CHECK(profile_by_name("square").log_max(1.0) == Approx(2.0));
  CHECK(profile_by_name("cube").log_max(1.0) == Approx(3.0));
  CHECK(profile_by_name("squaring-step:3").growth_profile()->base_radius() == Approx(3.0));
  CHECK(profile_by_name("ds-synthetic").source() == ProfileSource::nu_derived);
  CHECK_THROWS_AS(profile_by_name("gamma"), Error);
  CHECK_THROWS_AS(profile_by_name("squaring-stepx"), Error);
}

TEST_CASE("property: sampled max is monotone in nested budgets") {
  auto g = qrtest::rng(31);
  const MapDescriptor maps[] = {MapDescriptor::exp(), MapDescriptor::polynomial({{0.3, 0.0}, {1.0, 1.0}, {0.0, 0.0}, {1.0, 0.0}}),
                                MapDescriptor::lambda_exp({0.3, 0.2})};
  for (const auto& f : maps) {
    for (int t = 0; t < 10; ++t) {
      const double r = std::exp(qrtest::uniform(g, -1.0, 2.0));
      double prev = 0.0;
      for (int n = 16; n <= 4096; n *= 2) {
        const double v = max_modulus(f, r, n, false).value;
        CHECK(v >= prev);
        prev = v;
      }
    }
  }
}

TEST_CASE("property: M >= m for every profile and map") {
  auto g = qrtest::rng(32);
  const ModulusProfile profiles[] = {ModulusProfile::exp(), ModulusProfile::synthetic_square(), ModulusProfile::power(3.0),
                                     profile_by_name("ds-synthetic"), profile_by_name("squaring-step"),
                                     ModulusProfile::sampled(MapDescriptor::polynomial({{1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}}), 256)};
  for (const auto& p : profiles)
    for (int t = 0; t < 100; ++t) {
      const double u = qrtest::uniform(g, -2.0, 12.0);
      CHECK(p.log_max(u) >= p.log_min(u));
    }
}

TEST_CASE("property: tower strictly increasing above the escape radius") {
  auto g = qrtest::rng(33);
  const ModulusProfile profiles[] = {ModulusProfile::power(2.0), ModulusProfile::exp(), profile_by_name("squaring-step"),
                                     profile_by_name("ds-synthetic")};
  for (const auto& p : profiles) {
    const double R0 = find_escape_radius(p, 2.0, 1e-3, 1e4).R0;
    for (int t = 0; t < 20; ++t) {
      const double R = R0 * std::exp(qrtest::uniform(g, 1e-3, 2.0));
      const auto tower = iterate_max_modulus(p, R, 6);
      double prev = std::log(R);
      for (double lv : tower.log_values) {
        if (std::isinf(lv)) break;
        CHECK(lv > prev);
        prev = lv;
      }
    }
  }
}

TEST_CASE("property: radial maps have equal sampled max and min") {
  auto g = qrtest::rng(34);
  const MapDescriptor maps[] = {MapDescriptor::radial_power(2.0, 0.5), MapDescriptor::winding_power(3),
                                MapDescriptor::radial_power(3.0, 0.3, 3)};
  for (const auto& f : maps)
    for (int t = 0; t < 25; ++t) {
      const double r = std::exp(qrtest::uniform(g, -2.0, 4.0));
      const double M = max_modulus(f, r, 512, false).value, m = min_modulus(f, r, 512, false).value;
      CHECK(std::abs(M - m) <= 1e-10 * M);
    }
}

TEST_CASE("sampled profile budgets and refinement") {
  const auto p = ModulusProfile::sampled(MapDescriptor::exp(), 64);
  CHECK(p.max_bias() == Bias::lower_bound);
  CHECK(p.min_bias() == Bias::upper_bound);
  CHECK(p.with_budget(128).budget() == 128);
  CHECK(p.with_min_refinement().refines_min());
  CHECK(ModulusProfile::exp().with_budget(10).budget() == 0);
  const auto r = refined_min_modulus(MapDescriptor::polynomial({{0.0, 0.0}, {1.0, 0.0}, {0.5, 0.0}}), 1.5, 8);
  CHECK(r.samples > 8);
  CHECK(r.value == Approx(0.375).epsilon(1e-3));
}
