#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "symq/dynamics.hpp"
#include "symq/grid.hpp"
#include "symq/rng.hpp"

using namespace symq;

TEST_CASE("mountain car step by hand") {
  const SystemModel mc = mountain_car();
  const Vec a = step(mc, Vec{0.0, 0.0}, Vec{1.0});
  CHECK(a[0] == doctest::Approx(0.0));
  CHECK(a[1] == doctest::Approx(0.001 - 0.0025).epsilon(1e-12));

  const Vec b = step(mc, Vec{-0.5, 0.02}, Vec{0.0});
  CHECK(b[0] == doctest::Approx(-0.48).epsilon(1e-12));
  CHECK(b[1] == doctest::Approx(0.02 - 0.0025 * std::cos(-1.5)).epsilon(1e-12));
}

TEST_CASE("mountain car constants and rewards") {
  const SystemModel mc = mountain_car();
  CHECK(mc.lipschitz.f_state == 1.0025);
  CHECK(mc.lipschitz.f_action == 0.001);
  CHECK(mc.state_space.upper == Vec{0.6, 0.07});
  CHECK(mc.state_space.lower == Vec{-1.2, -0.07});
  CHECK(reward(mc, Vec{0.6, 0.0}, Vec{1.0}) == 0.0);
  CHECK(reward(mc, Vec{0.6, -0.05}, Vec{-1.0}) == 0.0);
  for (double u : {-1.0, 0.0, 1.0}) CHECK(reward(mc, Vec{-0.5, 0.0}, Vec{u}) == -1.0);
}

TEST_CASE("van der pol step and reward") {
  const SystemModel vdp = van_der_pol();
  CHECK(step(vdp, Vec{0.0, 0.0}, Vec{0.0}) == Vec{0.0, 0.0});
  const Vec s = step(vdp, Vec{1.0, 0.0}, Vec{0.0});
  CHECK(s[0] == doctest::Approx(1.0));
  CHECK(s[1] == doctest::Approx(-0.01).epsilon(1e-12));
  CHECK(reward(vdp, Vec{0.1, 0.1}, Vec{0.0}) == doctest::Approx(-0.02).epsilon(1e-12));
  CHECK(reward(vdp, Vec{0.0, 0.0}, Vec{0.0}) == 0.0);
  CHECK(vdp.parameters.at("tau") == 0.01);
}

TEST_CASE("step rejects bad arguments") {
  const SystemModel mc = mountain_car();
  CHECK_THROWS_AS(step(mc, Vec{0.0}, Vec{0.0}), std::invalid_argument);
  CHECK_THROWS_AS(step(mc, Vec{0.0, 0.0}, Vec{0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(step(mc, Vec{0.7, 0.0}, Vec{0.0}), std::domain_error);
  CHECK_THROWS_AS(step(mc, Vec{0.0, 0.0}, Vec{1.5}), std::domain_error);
  CHECK_THROWS_AS(reward(mc, Vec{-2.0, 0.0}, Vec{0.0}), std::domain_error);
  CHECK_THROWS_AS(builtin_model("pendulum"), std::invalid_argument);
}

TEST_CASE("step is deterministic and clipped into the box") {
  for (const SystemModel& m : {mountain_car(), van_der_pol()}) {
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
      Vec x(m.state_space.dim()), u(m.action_space.dim());
      for (std::size_t d = 0; d < x.size(); ++d) x[d] = rng.uniform(m.state_space.lower[d], m.state_space.upper[d]);
      for (std::size_t d = 0; d < u.size(); ++d) u[d] = rng.uniform(m.action_space.lower[d], m.action_space.upper[d]);
      const Vec a = step(m, x, u);
      const Vec b = step(m, x, u);
      REQUIRE(a == b);
      REQUIRE(m.state_space.contains(a));
    }
  }
}

TEST_CASE("lipschitz self-check") {
  const LipschitzCheck v = check_lipschitz(van_der_pol(), 20000, 3);
  CHECK(v.samples == 20000);
  CHECK(v.violations == 0);
  // Mountain car ships the published L_fξ, which is below ||A||_inf = 2.
  const LipschitzCheck m = check_lipschitz(mountain_car(), 20000, 3);
  CHECK(m.violations > 0);
  CHECK(m.empirical_state > 1.0025);
  CHECK(m.empirical_state <= 2.0 + 1e-9);
}

TEST_CASE("build_grid cell counts") {
  const GridPartition a = build_grid(Box({-1.2}, {0.6}), {0.45});
  CHECK(a.total_cells == 4);
  const GridPartition b = build_grid(Box({0.0}, {1.0}), {0.3});
  CHECK(b.total_cells == 4);
  CHECK(b.cell_lower(0, 3) == doctest::Approx(0.9));
  CHECK(b.cell_upper(0, 3) == 1.0);
  const GridPartition c = build_grid(Box({-1.0, -1.0}, {1.0, 1.0}), {0.5, 0.5});
  CHECK(c.total_cells == 16);
  CHECK(c.cells_per_axis == std::vector<std::size_t>{4, 4});
  CHECK_THROWS_AS(build_grid(Box({0.0}, {1.0}), {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Box({0.0}, {1.0}), {-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(build_grid(Box({0.0}, {1.0}), {1.5}), std::invalid_argument);
}

TEST_CASE("quantize and cell_center") {
  const GridPartition g = build_grid(Box({-1.2}, {0.6}), {0.45});
  CHECK(quantize(g, Vec{-1.2}) == 0);
  CHECK(quantize(g, Vec{0.6}) == 3);
  CHECK(quantize(g, Vec{-0.5}) == 1);
  CHECK_THROWS_AS(quantize(g, Vec{0.7}), std::domain_error);
  CHECK(cell_center(g, 1)[0] == doctest::Approx(-0.525));
  CHECK_THROWS_AS(cell_center(g, 4), std::invalid_argument);

  CHECK(cell_center(build_grid(Box({0.0}, {1.0}), {0.5}), 0)[0] == 0.25);
  const GridPartition sq = build_grid(Box({0.0, 0.0}, {1.0, 1.0}), {0.5, 0.5});
  const std::size_t mi[2] = {1, 1};
  CHECK(cell_center(sq, sq.flat_index(mi)) == Vec{0.75, 0.75});
}

TEST_CASE("cell ids are a row-major bijection") {
  const GridPartition g = build_grid_with_counts(Box({0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}), {3, 4, 5});
  CHECK(g.total_cells == 60);
  for (CellId id = 0; id < g.total_cells; ++id) {
    const auto mi = g.multi_index(id);
    REQUIRE(g.flat_index(mi) == id);
    REQUIRE(id == (mi[0] * 4 + mi[1]) * 5 + mi[2]);
    // the center quantizes back to the cell
    REQUIRE(quantize(g, cell_center(g, id)) == id);
  }
}

TEST_CASE("grid cells cover the box with disjoint interiors") {
  const GridPartition g = build_grid(Box({0.0, -1.0}, {1.0, 1.0}), {0.3, 0.7});
  Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const Vec p{rng.uniform(0.0, 1.0), rng.uniform(-1.0, 1.0)};
    const CellId c = quantize(g, p);
    int containing = 0;
    for (CellId id = 0; id < g.total_cells; ++id) {
      const Box b = g.cell_box(id);
      bool inside = true;
      for (std::size_t d = 0; d < 2; ++d) inside = inside && p[d] >= b.lower[d] && p[d] < b.upper[d];
      containing += inside;
    }
    REQUIRE(containing == 1);
    REQUIRE(g.cell_box(c).contains(p));
  }
}

TEST_CASE("level grid centers are the action levels") {
  const GridPartition g = build_level_grid(Box({-1.0}, {1.0}), {3});
  CHECK(g.total_cells == 3);
  CHECK(cell_center(g, 0)[0] == doctest::Approx(-1.0));
  CHECK(cell_center(g, 1)[0] == doctest::Approx(0.0));
  CHECK(cell_center(g, 2)[0] == doctest::Approx(1.0));
  CHECK(g.spacing[0] == doctest::Approx(1.0));
}
