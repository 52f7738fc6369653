#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trajset/core.hpp"

namespace trajset {

enum class AgentRole { Focal, Other, Av };

std::string to_string(AgentRole role);
AgentRole agent_role_from_string(const std::string& s);

/// One agent in a scenario. The first `num_observed` points are observed
/// history (the last of them is the current position); the remaining points
/// are future ground truth (focal) or the planned future (av). Timesteps are
/// contiguous.
struct AgentTrack {
  std::string agent_id;
  AgentRole role = AgentRole::Other;
  AgentClass agent_class = AgentClass::Vehicle;
  std::vector<Point2> points;
  std::size_t num_observed = 0;
};

struct Scenario {
  std::string id;
  std::vector<AgentTrack> tracks;  // exactly one focal, at most one av

  const AgentTrack& focal() const;
  const AgentTrack* av() const;  // nullptr when absent
};

/// Labeled collection of scenarios sharing a sampling profile. Coordinates
/// are stored in the frame named by `frame` (the generator emits the
/// focal-local convention: origin at the focal agent's last observed
/// position, heading on +x).
struct Dataset {
  double dt = 0.1;
  int t_past = 20;
  int t_future = 60;
  std::string frame = "local-heading+x";
  std::map<std::string, std::string> meta;
  std::vector<Scenario> scenarios;

  Trajectory focal_future(const Scenario& s) const;
  Trajectory focal_past(const Scenario& s) const;
  std::optional<Trajectory> av_future(const Scenario& s) const;

  /// Focal futures of every scenario, in scenario order.
  std::vector<Trajectory> futures() const;
};

/// Checks the structural invariants (one focal, at most one av, focal track
/// of exactly t_past observed + t_future future points, contiguous tracks).
/// Throws std::invalid_argument naming the offending scenario.
void validate(const Dataset& dataset);

struct LabeledTrajectory {
  Trajectory trajectory;
  AgentClass agent_class = AgentClass::Vehicle;
};

/// Focal futures together with their agent class.
std::vector<LabeledTrajectory> labeled_futures(const Dataset& dataset);

}  // namespace trajset
