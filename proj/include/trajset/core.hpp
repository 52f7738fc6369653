#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace trajset {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline bool is_finite(const Point2& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

inline double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// A fixed-horizon sequence of 2D positions in a metric frame. `dt` is the
/// time between consecutive points.
struct Trajectory {
  std::vector<Point2> points;
  double dt = 0.1;
};

enum class AgentClass { Vehicle, Bus, Motorcyclist, Cyclist, Pedestrian };

enum class ClassGroup { NonVulnerable, Vulnerable };

ClassGroup group_of(AgentClass cls);

std::string to_string(AgentClass cls);
std::string to_string(ClassGroup group);
AgentClass agent_class_from_string(const std::string& s);

/// Rigid transform between the global frame and an agent-local frame whose
/// +x axis is the agent heading and whose origin is the last observed
/// position. `rotation` is the heading angle in the global frame, kept in
/// (-pi, pi].
struct LocalFrame {
  Point2 origin;
  double rotation = 0.0;

  Point2 to_local(const Point2& global) const {
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    const double dx = global.x - origin.x;
    const double dy = global.y - origin.y;
    return {c * dx + s * dy, -s * dx + c * dy};
  }

  Point2 to_global(const Point2& local) const {
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    return {origin.x + c * local.x - s * local.y,
            origin.y + s * local.x + c * local.y};
  }
};

/// Average displacement error: mean pointwise Euclidean distance between two
/// equal-length trajectories. Throws std::invalid_argument on length
/// mismatch or empty input.
double ade(const Trajectory& a, const Trajectory& b);

/// Final displacement error: Euclidean distance between the two endpoints.
double fde(const Trajectory& a, const Trajectory& b);

struct LocalizedTrack {
  LocalFrame frame;
  std::vector<Point2> points;  // all input points, expressed in `frame`
};

/// Builds the local frame from the first `num_observed` points (origin at the
/// last observed position, heading from the last displacement with norm
/// >= 1e-2 m, identity rotation for stationary tracks) and transforms every
/// input point into it.
LocalizedTrack to_local_frame(std::span<const Point2> track,
                              std::size_t num_observed);

/// Minimum circumradius over consecutive point triples of
/// [last_observed] ++ traj. Near-duplicate points (consecutive distance
/// < 1e-3 m) are dropped first; triples that are still degenerate (any chord
/// < 1e-3 m or area < 1e-12 m^2) count as infinite. Returns +inf when no
/// finite triple remains.
double min_turn_radius(const Trajectory& traj, const Point2& last_observed);

inline constexpr double kInfiniteRadius =
    std::numeric_limits<double>::infinity();

}  // namespace trajset
