#include "trajset/core.hpp"

#include <algorithm>
#include <stdexcept>

namespace trajset {

namespace {

constexpr double kHeadingMinDisplacement = 1e-2;  // m
constexpr double kDuplicateChord = 1e-3;          // m
constexpr double kDegenerateArea = 1e-12;         // m^2

void check_equal_lengths(const Trajectory& a, const Trajectory& b) {
  if (a.points.empty() || b.points.empty()) {
    throw std::invalid_argument("trajectory must not be empty");
  }
  if (a.points.size() != b.points.size()) {
    throw std::invalid_argument("trajectory length mismatch: " +
                                std::to_string(a.points.size()) + " vs " +
                                std::to_string(b.points.size()));
  }
}

double normalize_angle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

// Circumradius of the triangle (a, b, c); +inf for near-collinear triples.
double circumradius(const Point2& a, const Point2& b, const Point2& c) {
  const double ab = distance(a, b);
  const double bc = distance(b, c);
  const double ca = distance(c, a);
  if (ab < kDuplicateChord || bc < kDuplicateChord || ca < kDuplicateChord) {
    return kInfiniteRadius;
  }
  const double cross =
      (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double area = 0.5 * std::abs(cross);
  if (area < kDegenerateArea) {
    return kInfiniteRadius;
  }
  return ab * bc * ca / (4.0 * area);
}

}  // namespace

ClassGroup group_of(AgentClass cls) {
  switch (cls) {
    case AgentClass::Vehicle:
    case AgentClass::Bus:
    case AgentClass::Motorcyclist:
      return ClassGroup::NonVulnerable;
    case AgentClass::Cyclist:
    case AgentClass::Pedestrian:
      return ClassGroup::Vulnerable;
  }
  throw std::invalid_argument("unknown agent class");
}

std::string to_string(AgentClass cls) {
  switch (cls) {
    case AgentClass::Vehicle: return "vehicle";
    case AgentClass::Bus: return "bus";
    case AgentClass::Motorcyclist: return "motorcyclist";
    case AgentClass::Cyclist: return "cyclist";
    case AgentClass::Pedestrian: return "pedestrian";
  }
  throw std::invalid_argument("unknown agent class");
}

std::string to_string(ClassGroup group) {
  return group == ClassGroup::NonVulnerable ? "nonvulnerable" : "vulnerable";
}

AgentClass agent_class_from_string(const std::string& s) {
  if (s == "vehicle") return AgentClass::Vehicle;
  if (s == "bus") return AgentClass::Bus;
  if (s == "motorcyclist") return AgentClass::Motorcyclist;
  if (s == "cyclist") return AgentClass::Cyclist;
  if (s == "pedestrian") return AgentClass::Pedestrian;
  throw std::invalid_argument("unknown agent class: " + s);
}

double ade(const Trajectory& a, const Trajectory& b) {
  check_equal_lengths(a, b);
  double sum = 0.0;
  for (std::size_t t = 0; t < a.points.size(); ++t) {
    sum += distance(a.points[t], b.points[t]);
  }
  return sum / static_cast<double>(a.points.size());
}

double fde(const Trajectory& a, const Trajectory& b) {
  check_equal_lengths(a, b);
  return distance(a.points.back(), b.points.back());
}

LocalizedTrack to_local_frame(std::span<const Point2> track,
                              std::size_t num_observed) {
  if (num_observed == 0 || num_observed > track.size()) {
    throw std::invalid_argument("need at least one observed point");
  }

  LocalFrame frame;
  frame.origin = track[num_observed - 1];
  frame.rotation = 0.0;

  // Heading from the most recent past displacement that is long enough to
  // carry direction; stationary tracks keep the identity rotation.
  for (std::size_t i = num_observed - 1; i > 0; --i) {
    const Point2& from = track[i - 1];
    const Point2& to = track[i];
    if (distance(from, to) >= kHeadingMinDisplacement) {
      frame.rotation = normalize_angle(std::atan2(to.y - from.y, to.x - from.x));
      break;
    }
  }

  LocalizedTrack out;
  out.frame = frame;
  out.points.reserve(track.size());
  for (const Point2& p : track) {
    out.points.push_back(frame.to_local(p));
  }
  return out;
}

double min_turn_radius(const Trajectory& traj, const Point2& last_observed) {
  if (traj.points.size() < 2) {
    throw std::invalid_argument("min_turn_radius needs at least 2 points");
  }

  std::vector<Point2> pts;
  pts.reserve(traj.points.size() + 1);
  pts.push_back(last_observed);
  for (const Point2& p : traj.points) {
    if (distance(pts.back(), p) >= kDuplicateChord) {
      pts.push_back(p);
    }
  }
  if (pts.size() < 3) {
    return kInfiniteRadius;
  }

  double min_radius = kInfiniteRadius;
  for (std::size_t i = 0; i + 2 < pts.size(); ++i) {
    min_radius = std::min(min_radius,
                          circumradius(pts[i], pts[i + 1], pts[i + 2]));
  }
  return min_radius;
}

}  // namespace trajset
