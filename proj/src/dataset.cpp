#include "trajset/dataset.hpp"

#include <stdexcept>

namespace trajset {

std::string to_string(AgentRole role) {
  switch (role) {
    case AgentRole::Focal: return "focal";
    case AgentRole::Other: return "other";
    case AgentRole::Av: return "av";
  }
  throw std::invalid_argument("unknown agent role");
}

AgentRole agent_role_from_string(const std::string& s) {
  if (s == "focal") return AgentRole::Focal;
  if (s == "other") return AgentRole::Other;
  if (s == "av") return AgentRole::Av;
  throw std::invalid_argument("unknown agent role: " + s);
}

const AgentTrack& Scenario::focal() const {
  for (const AgentTrack& t : tracks) {
    if (t.role == AgentRole::Focal) return t;
  }
  throw std::invalid_argument("scenario " + id + " has no focal agent");
}

const AgentTrack* Scenario::av() const {
  for (const AgentTrack& t : tracks) {
    if (t.role == AgentRole::Av) return &t;
  }
  return nullptr;
}

Trajectory Dataset::focal_future(const Scenario& s) const {
  const AgentTrack& track = s.focal();
  Trajectory out;
  out.dt = dt;
  out.points.assign(track.points.begin() + track.num_observed,
                    track.points.end());
  return out;
}

Trajectory Dataset::focal_past(const Scenario& s) const {
  const AgentTrack& track = s.focal();
  Trajectory out;
  out.dt = dt;
  out.points.assign(track.points.begin(),
                    track.points.begin() + track.num_observed);
  return out;
}

std::optional<Trajectory> Dataset::av_future(const Scenario& s) const {
  const AgentTrack* track = s.av();
  if (track == nullptr || track->points.size() <= track->num_observed) {
    return std::nullopt;
  }
  Trajectory out;
  out.dt = dt;
  out.points.assign(track->points.begin() + track->num_observed,
                    track->points.end());
  return out;
}

std::vector<Trajectory> Dataset::futures() const {
  std::vector<Trajectory> out;
  out.reserve(scenarios.size());
  for (const Scenario& s : scenarios) {
    out.push_back(focal_future(s));
  }
  return out;
}

void validate(const Dataset& dataset) {
  for (const Scenario& s : dataset.scenarios) {
    int focal_count = 0;
    int av_count = 0;
    for (const AgentTrack& t : s.tracks) {
      if (t.num_observed > t.points.size()) {
        throw std::invalid_argument("scenario " + s.id + " agent " +
                                    t.agent_id +
                                    ": observed count exceeds track length");
      }
      for (const Point2& p : t.points) {
        if (!is_finite(p)) {
          throw std::invalid_argument("scenario " + s.id + " agent " +
                                      t.agent_id + ": non-finite point");
        }
      }
      if (t.role == AgentRole::Focal) {
        ++focal_count;
        if (t.num_observed != static_cast<std::size_t>(dataset.t_past) ||
            t.points.size() !=
                static_cast<std::size_t>(dataset.t_past + dataset.t_future)) {
          throw std::invalid_argument(
              "scenario " + s.id + ": focal track must have exactly " +
              std::to_string(dataset.t_past) + " observed + " +
              std::to_string(dataset.t_future) + " future points");
        }
      } else if (t.role == AgentRole::Av) {
        ++av_count;
      }
    }
    if (focal_count != 1) {
      throw std::invalid_argument("scenario " + s.id +
                                  ": exactly one focal agent required");
    }
    if (av_count > 1) {
      throw std::invalid_argument("scenario " + s.id +
                                  ": at most one av agent allowed");
    }
  }
}

std::vector<LabeledTrajectory> labeled_futures(const Dataset& dataset) {
  std::vector<LabeledTrajectory> out;
  out.reserve(dataset.scenarios.size());
  for (const Scenario& s : dataset.scenarios) {
    out.push_back({dataset.focal_future(s), s.focal().agent_class});
  }
  return out;
}

}  // namespace trajset
