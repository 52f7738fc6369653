#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "test_support.hpp"
#include "trajset/core.hpp"

using namespace trajset;
using testing::make_traj;
using testing::random_traj;

TEST_CASE("ade identity and constant offset") {
  Rng rng(11);
  const Trajectory a = random_traj(rng, 8);
  CHECK(ade(a, a) == doctest::Approx(0.0));

  Trajectory b = a;
  for (Point2& p : b.points) {
    p.x += 3.0;
    p.y += 4.0;
  }
  CHECK(ade(a, b) == doctest::Approx(5.0));
}

TEST_CASE("ade hand-computed three-point example") {
  const Trajectory a = make_traj({{0, 0}, {1, 0}, {2, 0}});
  const Trajectory b = make_traj({{0, 1}, {1, 2}, {2, 0}});
  // distances 1, 2, 0 -> mean 1
  CHECK(ade(a, b) == doctest::Approx(1.0));
}

TEST_CASE("ade rejects length mismatch") {
  const Trajectory a = make_traj({{0, 0}, {1, 0}});
  const Trajectory b = make_traj({{0, 0}});
  CHECK_THROWS_AS(ade(a, b), std::invalid_argument);
  CHECK_THROWS_AS(fde(a, b), std::invalid_argument);
}

TEST_CASE("ade is a metric on fixed-length trajectories") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t len = 1 + rng.bounded(10);
    const Trajectory a = random_traj(rng, len);
    const Trajectory b = random_traj(rng, len);
    const Trajectory c = random_traj(rng, len);
    const double dab = ade(a, b);
    const double dba = ade(b, a);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-12));
    CHECK(dab >= 0.0);
    CHECK(ade(a, c) <= dab + ade(b, c) + 1e-9);
  }
  const Trajectory a = random_traj(rng, 5);
  Trajectory b = a;
  CHECK(ade(a, b) == 0.0);
  b.points[2].x += 1e-6;
  CHECK(ade(a, b) > 0.0);
}

TEST_CASE("fde endpoint distances") {
  const Trajectory a = make_traj({{5, 5}, {0, 0}});
  const Trajectory b = make_traj({{5, 5}, {3, 4}});
  CHECK(fde(a, a) == doctest::Approx(0.0));
  CHECK(fde(a, b) == doctest::Approx(5.0));
  const Trajectory c = make_traj({{0, 0}, {1, 1}});
  const Trajectory d = make_traj({{0, 0}, {1, 3}});
  CHECK(fde(c, d) == doctest::Approx(2.0));
}

TEST_CASE("to_local_frame stationary agent keeps identity rotation") {
  const std::vector<Point2> track(6, Point2{4.0, -2.0});
  const LocalizedTrack result = to_local_frame(track, 6);
  CHECK(result.frame.rotation == doctest::Approx(0.0));
  CHECK(result.frame.origin.x == doctest::Approx(4.0));
  CHECK(result.frame.origin.y == doctest::Approx(-2.0));
  for (const Point2& p : result.points) {
    CHECK(p.x == doctest::Approx(0.0));
    CHECK(p.y == doctest::Approx(0.0));
  }
}

TEST_CASE("to_local_frame maps heading onto +x") {
  // Moving due north; a future point 10 m ahead lands at (10, 0).
  const std::vector<Point2> track = {
      {0, 0}, {0, 1}, {0, 2}, {0, 12}};
  const LocalizedTrack result = to_local_frame(track, 3);
  CHECK(result.points[2].x == doctest::Approx(0.0));
  CHECK(result.points[2].y == doctest::Approx(0.0));
  CHECK(result.points[3].x == doctest::Approx(10.0));
  CHECK(result.points[3].y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("to_local_frame round-trips and preserves distances") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory traj = testing::random_walk_traj(rng, 12);
    const LocalizedTrack result = to_local_frame(traj.points, 8);
    for (std::size_t i = 0; i < traj.points.size(); ++i) {
      const Point2 back = result.frame.to_global(result.points[i]);
      CHECK(std::abs(back.x - traj.points[i].x) < 1e-9);
      CHECK(std::abs(back.y - traj.points[i].y) < 1e-9);
      for (std::size_t j = i + 1; j < traj.points.size(); ++j) {
        const double before = distance(traj.points[i], traj.points[j]);
        const double after = distance(result.points[i], result.points[j]);
        CHECK(std::abs(before - after) < 1e-9);
      }
    }
  }
}

TEST_CASE("min_turn_radius straight line is infinite") {
  const Trajectory traj =
      make_traj({{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}});
  CHECK(std::isinf(min_turn_radius(traj, {0, 0})));
}

TEST_CASE("min_turn_radius recovers circle radius") {
  Trajectory traj;
  traj.dt = 0.1;
  for (int i = 1; i <= 8; ++i) {
    const double angle = 0.4 * i;
    traj.points.push_back({std::cos(angle), std::sin(angle)});
  }
  const double radius = min_turn_radius(traj, {1.0, 0.0});
  CHECK(std::abs(radius - 1.0) < 1e-6);
}

TEST_CASE("min_turn_radius all points identical is infinite") {
  const Trajectory traj = make_traj({{2, 2}, {2, 2}, {2, 2}, {2, 2}});
  CHECK(std::isinf(min_turn_radius(traj, {2, 2})));
}

TEST_CASE("min_turn_radius is rigid-transform invariant") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    Trajectory traj;
    traj.dt = 0.1;
    // Curved path with varying curvature so the radius is finite.
    double angle = rng.uniform(-M_PI, M_PI);
    Point2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const Point2 last_observed = p;
    const double turn = rng.uniform(0.05, 0.4);
    for (int i = 0; i < 10; ++i) {
      angle += turn;
      p.x += std::cos(angle);
      p.y += std::sin(angle);
      traj.points.push_back(p);
    }
    const double base = min_turn_radius(traj, last_observed);

    LocalFrame frame{{rng.uniform(-50, 50), rng.uniform(-50, 50)},
                     rng.uniform(-3, 3)};
    Trajectory moved = traj;
    for (Point2& q : moved.points) q = frame.to_global(q);
    const double transformed =
        min_turn_radius(moved, frame.to_global(last_observed));
    if (std::isinf(base)) {
      CHECK(std::isinf(transformed));
    } else {
      CHECK(std::abs(transformed - base) / base < 1e-6);
    }
  }
}

TEST_CASE("class grouping is total") {
  CHECK(group_of(AgentClass::Vehicle) == ClassGroup::NonVulnerable);
  CHECK(group_of(AgentClass::Bus) == ClassGroup::NonVulnerable);
  CHECK(group_of(AgentClass::Motorcyclist) == ClassGroup::NonVulnerable);
  CHECK(group_of(AgentClass::Cyclist) == ClassGroup::Vulnerable);
  CHECK(group_of(AgentClass::Pedestrian) == ClassGroup::Vulnerable);
}
