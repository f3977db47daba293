#include "picproj/advection.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace picproj;

namespace {

std::vector<Vec2> all_positions(const ParticleSet& set) {
  std::vector<Vec2> out;
  for (Index c = 0; c < set.mesh().num_cells(); ++c)
    for (const auto& p : set.particles(c)) out.push_back(p.x);
  return out;
}

VelocityField constant(const Vec2& a) {
  return [a](const Vec2&, double) { return a; };
}

// Final-position error of one particle after `steps` steps along a quarter
// (or full) turn of the rotating field.
double rotation_error(Scheme scheme, int steps, double turns) {
  static const auto mesh = build_disk_mesh(std::sqrt(0.5), 0.1);
  const double pi = std::numbers::pi;
  const std::vector<Vec2> x{Vec2(0.3, 0.1)};
  auto set = create_particles(mesh, x, {}, {}).set;
  const double T = 2.0 * turns;
  AdvectionConfig config{scheme, T / steps, [pi](const Vec2& y, double) { return Vec2(-pi * y.y(), pi * y.x()); }};
  for (int s = 0; s < steps; ++s) do_step(set, config, s * config.dt);
  const double angle = pi * T;
  const Vec2 exact(std::cos(angle) * x[0].x() - std::sin(angle) * x[0].y(), std::sin(angle) * x[0].x() + std::cos(angle) * x[0].y());
  return (all_positions(set).at(0) - exact).norm();
}

}  // namespace

TEST_CASE("scheme names") {
  CHECK(parse_scheme("rk3") == Scheme::kRk3);
  CHECK(to_string(Scheme::kRk2) == "rk2");
  CHECK_THROWS_AS(parse_scheme("rk4"), InvalidArgument);
}

TEST_CASE("zero velocity moves nothing") {
  const auto mesh = build_rectangle_mesh(5, 5);
  const auto x = generate_random_cell(mesh, 4, 1);
  auto set = create_particles(mesh, x, {}, {}).set;
  const auto before = all_positions(set);
  const auto report = do_step(set, AdvectionConfig{Scheme::kRk3, 0.1, constant(Vec2::Zero())}, 0.0);
  CHECK(report.moved == 0);
  CHECK(report.deleted == 0);
  CHECK(all_positions(set) == before);
}

TEST_CASE("integer translations on the bi-periodic square return every particle") {
  const auto mesh = oracle::periodic_square(10);
  const auto x = generate_random_cell(mesh, 5, 3);
  std::vector<double> ids(x.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = double(i);
  auto set = create_particles(mesh, x, {{"id", 1}}, {ids}).set;
  const AdvectionConfig config{Scheme::kEuler, 0.1, constant(Vec2(1.0, 1.0))};
  for (int s = 0; s < 100; ++s) do_step(set, config, s * 0.1);
  CHECK(set.size() == static_cast<Index>(x.size()));
  CHECK_FALSE(set.find_misplaced().has_value());
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    for (const auto& p : set.particles(c)) {
      const auto id = static_cast<std::size_t>(set.value(p, 1));
      CHECK((p.x - x[id]).norm() <= 1e-10);
    }
  }
}

TEST_CASE("particle distribution stays uniform under translation") {
  const auto mesh = oracle::periodic_square(12);
  const auto n = static_cast<Index>(std::lround(std::sqrt(15.0 * double(mesh.num_cells()))));
  const auto x = generate_lattice(Rectangle{}, n, n);
  auto set = create_particles(mesh, x, {}, {}).set;
  const AdvectionConfig config{Scheme::kEuler, 0.0137, constant(Vec2(1.0, 0.7))};
  const double mean = double(set.size()) / double(mesh.num_cells());
  for (int s = 0; s < 100; ++s) {
    do_step(set, config, s * config.dt);
    for (Index c = 0; c < mesh.num_cells(); ++c) {
      CHECK(double(set.cell_count(c)) >= 0.5 * mean);
      CHECK(double(set.cell_count(c)) <= 1.5 * mean);
    }
  }
}

TEST_CASE("single particle host after one step") {
  const auto mesh = build_rectangle_mesh(2, 2);
  const std::vector<Vec2> x{Vec2(0.05, 0.1)};
  auto set = create_particles(mesh, x, {}, {}).set;
  do_step(set, AdvectionConfig{Scheme::kEuler, 0.3, constant(Vec2(1.0, 0.0))}, 0.0);
  const Index expected = mesh.locate_point_brute_force(Vec2(0.35, 0.1));
  REQUIRE(expected != kNone);
  CHECK(set.cell_count(expected) == 1);
  CHECK((set.particles(expected)[0].x - Vec2(0.35, 0.1)).norm() <= 1e-15);
}

TEST_CASE("track") {
  const auto mesh = build_rectangle_mesh(4, 4);
  SUBCASE("motion along a facet direction stays in the cell") {
    const Index c = 5;
    const Vec2 x0 = mesh.centroid(c);
    const Index f = mesh.cell_facets(c)[0];
    const Vec2 along = mesh.vertex(mesh.facet(f)[1]) - mesh.vertex(mesh.facet(f)[0]);
    const auto r = track(mesh, c, x0, 0.01 * along, 1.0);
    CHECK(r.cell == c);
    CHECK(r.hops == 0);
  }
  SUBCASE("visited cells match dense sampling of the segment") {
    const Vec2 x0(0.05, 0.13), x1(0.93, 0.41);
    const Index start = mesh.locate_point(x0);
    std::vector<Index> visited;
    const auto r = track(mesh, start, x0, x1 - x0, 1.0, 0, &visited);
    std::vector<Index> sampled;
    for (int i = 0; i <= 10000; ++i) {
      const Index c = mesh.locate_point(x0 + (i / 10000.0) * (x1 - x0));
      if (sampled.empty() || sampled.back() != c) sampled.push_back(c);
    }
    CHECK(visited == sampled);
    CHECK(visited.size() >= 3);
    CHECK(r.cell == sampled.back());
    CHECK((r.x - x1).norm() <= 1e-14);
  }
  SUBCASE("start on a facet moving inward") {
    for (Index f = 0; f < mesh.num_facets(); ++f) {
      if (mesh.is_boundary(f)) continue;
      const auto [a, b] = mesh.facet_cells(f);
      const Vec2 m = mesh.facet_midpoint(f);
      // the stored normal points from a into b
      const auto into_b = track(mesh, a, m, 0.01 * mesh.facet_normal(f), 1.0);
      CHECK(into_b.cell == b);
      CHECK(mesh.contains(b, into_b.x));
      const auto into_a = track(mesh, a, m, -0.01 * mesh.facet_normal(f), 1.0);
      CHECK(into_a.cell == a);
      CHECK(mesh.contains(a, into_a.x));
    }
  }
  SUBCASE("closed wall reflects") {
    const Vec2 x0(0.1, 0.5);
    const auto r = track(mesh, mesh.locate_point(x0), x0, Vec2(-1.0, 0.0), 0.3);
    CHECK(r.reflections == 1);
    CHECK((r.x - Vec2(0.2, 0.5)).norm() <= 1e-14);
    CHECK((r.velocity - Vec2(1.0, 0.0)).norm() == 0.0);
    CHECK(mesh.contains(r.cell, r.x));
  }
  SUBCASE("open wall loses the particle") {
    auto open = mesh;
    open.set_boundary_markers([](const Vec2&) { return marker::kOpen; });
    const Vec2 x0(0.1, 0.5);
    const auto r = track(open, open.locate_point(x0), x0, Vec2(-1.0, 0.0), 0.3);
    CHECK(r.cell == kLostCell);
    CHECK(r.time == doctest::Approx(0.3));

    const std::vector<Vec2> x{x0, Vec2(0.5, 0.5)};
    auto set = create_particles(open, x, {}, {}).set;
    const auto report = do_step(set, AdvectionConfig{Scheme::kEuler, 0.3, constant(Vec2(-1.0, 0.0))}, 0.0);
    CHECK(report.deleted == 1);
    CHECK(set.size() == 1);
  }
  SUBCASE("runaway particles carry their trace") {
    const Vec2 x0(0.05, 0.13);
    try {
      track(mesh, mesh.locate_point(x0), x0, Vec2(0.88, 0.28), 1.0, 2);
      FAIL("expected a runaway error");
    } catch (const RunawayParticle& e) {
      REQUIRE(!e.trace().empty());
      CHECK(e.trace().front() == x0);
      CHECK(e.trace().size() == 4);
    }
  }
}

TEST_CASE("time consumed equals the step") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto periodic = oracle::periodic_square(7);
  const auto closed = build_disk_mesh(1.0, 0.2);
  for (const auto* mesh : {&periodic, &closed}) {
    const auto x = generate_random_cell(*mesh, 3, 8);
    for (const auto& x0 : x) {
      const Vec2 v(u(rng), u(rng));
      const double dt = 0.37;
      const auto r = track(*mesh, mesh->locate_point(x0), x0, v, dt);
      CHECK(std::abs(r.time - dt) <= 1e-12 * dt);
      CHECK(mesh->contains(r.cell, r.x, 1e-10));
      CHECK(std::abs(r.velocity.norm() - v.norm()) <= 1e-13 * v.norm());
    }
  }
}

TEST_CASE("apply_closed") {
  CHECK(apply_closed(Vec2(0, -1), Vec2(0, -1)) == Vec2(0, 1));
  CHECK(apply_closed(Vec2(1, 0), Vec2(0, -1)) == Vec2(1, 0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 v(u(rng), u(rng));
    const Vec2 n = Vec2(u(rng), u(rng)).normalized();
    const Vec2 r = apply_closed(v, n);
    CHECK(std::abs(r.norm() - v.norm()) <= 1e-14);
    CHECK(std::abs(r.dot(n) + v.dot(n)) <= 1e-14);
  }
}

TEST_CASE("apply_periodic") {
  const auto mesh = oracle::periodic_square(4);
  SUBCASE("exit on the right re-enters on the left") {
    Index right = kNone;
    for (Index f = 0; f < mesh.num_facets(); ++f) {
      const Vec2 m = mesh.facet_midpoint(f);
      if (mesh.is_boundary(f) && std::abs(m.x() - 1.0) < 1e-14 && std::abs(m.y() - 0.375) < 1e-14) right = f;
    }
    REQUIRE(right != kNone);
    const auto [x, cell] = apply_periodic(mesh, Vec2(1.0, 0.3), right);
    CHECK((x - Vec2(0.0, 0.3)).norm() <= 1e-15);
    CHECK(mesh.contains(cell, x));
  }
  SUBCASE("diagonal exit near the corner wraps both coordinates") {
    const Vec2 x0(0.97, 0.98);
    const auto r = track(mesh, mesh.locate_point(x0), x0, Vec2(0.1, 0.1), 1.0);
    CHECK(r.wraps == 2);
    CHECK((r.shift - Vec2(-1.0, -1.0)).norm() <= 1e-15);
    CHECK((r.x - Vec2(0.07, 0.08)).norm() <= 1e-14);
    CHECK(mesh.contains(r.cell, r.x));
  }
  SUBCASE("missing pairing") {
    auto unpaired = build_rectangle_mesh(4, 4);
    unpaired.set_boundary_markers([](const Vec2&) { return marker::kPeriodic; });
    Index f = 0;
    while (!unpaired.is_boundary(f)) ++f;
    CHECK_THROWS_AS(apply_periodic(unpaired, unpaired.facet_midpoint(f), f), ConfigurationError);
    const Vec2 x0(0.1, 0.5);
    CHECK_THROWS_AS(track(unpaired, unpaired.locate_point(x0), x0, Vec2(-1, 0), 0.3), ConfigurationError);
  }
}

TEST_CASE("Runge-Kutta orders over a quarter turn") {
  struct Case {
    Scheme scheme;
    double order;
  };
  for (const auto& [scheme, order] : {Case{Scheme::kEuler, 1.0}, Case{Scheme::kRk2, 2.0}, Case{Scheme::kRk3, 3.0}}) {
    const double coarse = rotation_error(scheme, 40, 0.25);
    const double fine = rotation_error(scheme, 80, 0.25);
    INFO(to_string(scheme), " ", coarse, " ", fine);
    CHECK(std::abs(std::log2(coarse / fine) - order) <= 0.2);
  }
}

TEST_CASE("threaded steps are deterministic and leave properties untouched") {
  const auto mesh = build_disk_mesh(std::sqrt(0.5), 0.08);
  const auto x = generate_random_cell(mesh, 6, 12);
  std::vector<double> ids(x.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = 0.5 * double(i);
  auto serial = create_particles(mesh, x, {{"id", 1}}, {ids}).set;
  auto threaded = create_particles(mesh, x, {{"id", 1}}, {ids}).set;
  const double pi = std::numbers::pi;
  AdvectionConfig config{Scheme::kRk3, 0.02, [pi](const Vec2& y, double) { return Vec2(-pi * y.y(), pi * y.x()); }};
  for (int s = 0; s < 10; ++s) do_step(serial, config, s * config.dt);
  config.threads = 4;
  for (int s = 0; s < 10; ++s) do_step(threaded, config, s * config.dt);
  CHECK(all_positions(serial) == all_positions(threaded));
  std::vector<double> seen;
  for (Index c = 0; c < mesh.num_cells(); ++c) {
    for (std::size_t i = 0; i < serial.particles(c).size(); ++i) {
      CHECK(serial.value(serial.particles(c)[i], 1) == threaded.value(threaded.particles(c)[i], 1));
      seen.push_back(serial.value(serial.particles(c)[i], 1));
    }
  }
  std::sort(seen.begin(), seen.end());
  CHECK(seen == ids);
  CHECK_FALSE(serial.find_misplaced().has_value());
}
