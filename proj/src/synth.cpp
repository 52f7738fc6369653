#include "trajset/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trajset/rng.hpp"

namespace trajset::synth {

namespace {

constexpr double kBranchSeparation = 5.0;  // m, interaction contract

std::vector<Point2> straight_past(const Point2& current, double heading,
                                  double speed, int t_past, double dt) {
  std::vector<Point2> past(t_past);
  const double cx = std::cos(heading);
  const double cy = std::sin(heading);
  for (int i = 0; i < t_past; ++i) {
    const double back = static_cast<double>(t_past - 1 - i) * speed * dt;
    past[i] = {current.x - cx * back, current.y - cy * back};
  }
  return past;
}

std::vector<Control> constant_controls(std::size_t steps, double accel,
                                       double steering) {
  return std::vector<Control>(steps, Control{accel, steering});
}

/// Constant deceleration that brings `speed` to rest after `dist` meters.
double stopping_decel(double speed, double dist) {
  return -speed * speed / (2.0 * std::max(dist, 0.5));
}

Trajectory walker_future(Rng& rng, const Point2& start, double heading,
                         double speed, int steps, double dt,
                         double heading_noise) {
  Trajectory out;
  out.dt = dt;
  out.points.reserve(steps);
  Point2 p = start;
  double h = heading;
  double v = speed;
  for (int t = 0; t < steps; ++t) {
    h += rng.normal(0.0, heading_noise);
    v = std::clamp(v + rng.normal(0.0, 0.05), 0.1, 2.5);
    p.x += v * std::cos(h) * dt;
    p.y += v * std::sin(h) * dt;
    out.points.push_back(p);
  }
  return out;
}

AgentTrack localized_track(const LocalFrame& frame, std::string agent_id,
                           AgentRole role, AgentClass cls,
                           const std::vector<Point2>& global_points,
                           std::size_t num_observed) {
  AgentTrack track;
  track.agent_id = std::move(agent_id);
  track.role = role;
  track.agent_class = cls;
  track.num_observed = num_observed;
  track.points.reserve(global_points.size());
  for (const Point2& p : global_points) {
    track.points.push_back(frame.to_local(p));
  }
  return track;
}

std::string scenario_id(const char* prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, index);
  return buf;
}

Scenario make_agent_scenario(const DatasetProfile& profile, AgentClass cls,
                             std::size_t index, Rng rng) {
  const int t_past = profile.t_past;
  const int t_future = profile.t_future;
  const double dt = profile.dt;

  const Point2 current{rng.uniform(-100.0, 100.0), rng.uniform(-100.0, 100.0)};
  const double heading = rng.uniform(-M_PI, M_PI);

  double speed = 0.0;
  Trajectory future;
  future.dt = dt;

  if (group_of(cls) == ClassGroup::NonVulnerable) {
    switch (cls) {
      case AgentClass::Bus: speed = rng.uniform(2.0, 10.0); break;
      case AgentClass::Motorcyclist: speed = rng.uniform(3.0, 18.0); break;
      default:
        speed = rng.uniform(profile.vehicle_speed_min,
                            profile.vehicle_speed_max);
    }
    const BicycleState state{current.x, current.y, heading, speed};
    const std::size_t steps = static_cast<std::size_t>(t_future);
    const double w_total = profile.w_straight + profile.w_turn +
                           profile.w_stop + profile.w_lane_change;
    if (!(w_total > 0.0)) {
      throw std::invalid_argument("maneuver weights must not all be zero");
    }
    const double maneuver = rng.uniform() * w_total;
    if (maneuver < profile.w_straight) {  // straight
      future = rollout_bicycle(
          state, constant_controls(steps, rng.uniform(-0.3, 0.5), 0.0),
          profile.wheelbase, steps, dt);
    } else if (maneuver < profile.w_straight + profile.w_turn) {
      // turn, radius kept well above the feasibility thresholds
      const double min_radius =
          std::max(cls == AgentClass::Bus ? 14.0 : 10.0,
                   speed * static_cast<double>(t_future) * dt / 3.5);
      const double radius = rng.uniform(min_radius, min_radius + 50.0);
      const double steer = std::atan(profile.wheelbase / radius);
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      future = rollout_bicycle(state,
                               constant_controls(steps, 0.0, sign * steer),
                               profile.wheelbase, steps, dt);
    } else if (maneuver <
               profile.w_straight + profile.w_turn + profile.w_stop) {  // stop
      const double brake_time = rng.uniform(2.0, 5.0);
      future = rollout_bicycle(
          state, constant_controls(steps, -speed / brake_time, 0.0),
          profile.wheelbase, steps, dt);
    } else {  // lane change: one sine period of steering, then straight
      const double amplitude = rng.uniform(0.04, 0.10);
      const double sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
      const int period = std::min(t_future, 30);
      std::vector<Control> controls(steps);
      for (std::size_t t = 0; t < steps; ++t) {
        const double phase =
            t < static_cast<std::size_t>(period)
                ? std::sin(2.0 * M_PI * static_cast<double>(t) /
                           static_cast<double>(period))
                : 0.0;
        controls[t] = {0.0, sign * amplitude * phase};
      }
      future = rollout_bicycle(state, controls, profile.wheelbase, steps, dt);
    }
  } else {
    speed = cls == AgentClass::Cyclist
                ? rng.uniform(2.0, 6.0)
                : rng.uniform(profile.pedestrian_speed_min,
                              profile.pedestrian_speed_max);
    const double noise = cls == AgentClass::Cyclist ? 0.05 : 0.15;
    future = walker_future(rng, current, heading, speed, t_future, dt, noise);
  }

  std::vector<Point2> track_points =
      straight_past(current, heading, speed, t_past, dt);
  track_points.insert(track_points.end(), future.points.begin(),
                      future.points.end());

  const LocalizedTrack localized = to_local_frame(
      track_points, static_cast<std::size_t>(t_past));

  Scenario scenario;
  scenario.id = scenario_id("scn", index);
  AgentTrack focal;
  focal.agent_id = "focal";
  focal.role = AgentRole::Focal;
  focal.agent_class = cls;
  focal.points = localized.points;
  focal.num_observed = static_cast<std::size_t>(t_past);
  scenario.tracks.push_back(std::move(focal));

  // A few context agents with observed-only straight tracks.
  const std::size_t n_others = rng.bounded(3);
  for (std::size_t o = 0; o < n_others; ++o) {
    const Point2 other_pos{current.x + rng.uniform(-30.0, 30.0),
                           current.y + rng.uniform(-30.0, 30.0)};
    const double other_heading = rng.uniform(-M_PI, M_PI);
    const double other_speed = rng.uniform(0.0, 12.0);
    std::vector<Point2> other_points =
        straight_past(other_pos, other_heading, other_speed, t_past, dt);
    scenario.tracks.push_back(localized_track(
        localized.frame, "other" + std::to_string(o), AgentRole::Other,
        AgentClass::Vehicle, other_points, other_points.size()));
  }
  return scenario;
}

}  // namespace

Trajectory rollout_bicycle(const BicycleState& initial,
                           std::span<const Control> controls,
                           double wheelbase, std::size_t steps, double dt) {
  if (steps < 1) {
    throw std::invalid_argument("steps must be at least 1");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("dt must be positive");
  }
  if (!(wheelbase > 0.0)) {
    throw std::invalid_argument("wheelbase must be positive");
  }
  if (controls.size() != steps) {
    throw std::invalid_argument("need exactly one control per step");
  }
  for (const Control& c : controls) {
    if (!(std::abs(c.steering) < M_PI / 2.0)) {
      throw std::invalid_argument("|steering| must be below pi/2");
    }
  }

  Trajectory out;
  out.dt = dt;
  out.points.reserve(steps);
  double x = initial.x;
  double y = initial.y;
  double heading = initial.heading;
  double speed = std::max(0.0, initial.speed);
  for (std::size_t t = 0; t < steps; ++t) {
    heading += speed / wheelbase * std::tan(controls[t].steering) * dt;
    x += speed * std::cos(heading) * dt;
    y += speed * std::sin(heading) * dt;
    speed = std::max(0.0, speed + controls[t].accel * dt);
    out.points.push_back({x, y});
  }
  return out;
}

Dataset make_dataset(const DatasetProfile& profile) {
  Dataset dataset;
  dataset.dt = profile.dt;
  dataset.t_past = profile.t_past;
  dataset.t_future = profile.t_future;
  dataset.meta["generator"] = "synth";
  dataset.meta["seed"] = std::to_string(profile.seed);

  struct ClassCount {
    AgentClass cls;
    std::size_t n;
  };
  const ClassCount counts[] = {
      {AgentClass::Vehicle, profile.n_vehicles},
      {AgentClass::Pedestrian, profile.n_pedestrians},
      {AgentClass::Bus, profile.n_buses},
      {AgentClass::Motorcyclist, profile.n_motorcyclists},
      {AgentClass::Cyclist, profile.n_cyclists},
  };

  std::size_t index = 0;
  for (const ClassCount& cc : counts) {
    for (std::size_t i = 0; i < cc.n; ++i, ++index) {
      dataset.scenarios.push_back(make_agent_scenario(
          profile, cc.cls, index, Rng::derive(profile.seed, index)));
    }
  }
  validate(dataset);
  return dataset;
}

Dataset make_interaction_dataset(std::size_t n, std::uint64_t seed,
                                 int t_past, int t_future, double dt) {
  if (n < 1) {
    throw std::invalid_argument("n must be at least 1");
  }
  Dataset dataset;
  dataset.dt = dt;
  dataset.t_past = t_past;
  dataset.t_future = t_future;
  dataset.meta["generator"] = "interaction";
  dataset.meta["seed"] = std::to_string(seed);

  const double wheelbase = 2.7;
  const std::size_t steps = static_cast<std::size_t>(t_future);

  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = Rng::derive(seed, i);

    // Focal vehicle heading +x toward a crossing at (d_cross, 0).
    const double d_cross = rng.uniform(12.0, 20.0);
    const double v_focal = rng.uniform(5.0, 8.0);
    const Point2 focal_pos{0.0, 0.0};

    const BicycleState focal_state{focal_pos.x, focal_pos.y, 0.0, v_focal};
    const Trajectory proceed = rollout_bicycle(
        focal_state, constant_controls(steps, rng.uniform(0.0, 0.4), 0.0),
        wheelbase, steps, dt);
    const Trajectory yield = rollout_bicycle(
        focal_state,
        constant_controls(steps, stopping_decel(v_focal, d_cross - 2.0), 0.0),
        wheelbase, steps, dt);
    const double separation =
        distance(proceed.points.back(), yield.points.back());
    if (separation < kBranchSeparation) {
      throw std::logic_error("interaction branch separation below 5 m");
    }

    // AV crossing from the side; its plan is the only observable signal of
    // which branch the focal agent takes.
    const double d_av = rng.uniform(10.0, 18.0);
    const double v_av = rng.uniform(4.0, 7.0);
    const Point2 av_pos{d_cross, d_av};
    const double av_heading = -M_PI / 2.0;  // toward the crossing
    const BicycleState av_state{av_pos.x, av_pos.y, av_heading, v_av};
    // The stop plan must reach rest well inside the horizon so the two
    // plans are cleanly distinguishable from the displacement profile.
    const double av_decel =
        std::min(stopping_decel(v_av, d_av - 3.0), -v_av / 4.5);
    const Trajectory av_stop =
        rollout_bicycle(av_state, constant_controls(steps, av_decel, 0.0),
                        wheelbase, steps, dt);
    const Trajectory av_go =
        rollout_bicycle(av_state, constant_controls(steps, 0.0, 0.0),
                        wheelbase, steps, dt);

    const bool av_stops = rng.bernoulli(0.5);
    const Trajectory& focal_future = av_stops ? proceed : yield;
    const Trajectory& av_future = av_stops ? av_stop : av_go;

    std::vector<Point2> focal_points =
        straight_past(focal_pos, 0.0, v_focal, t_past, dt);
    focal_points.insert(focal_points.end(), focal_future.points.begin(),
                        focal_future.points.end());
    const LocalizedTrack localized =
        to_local_frame(focal_points, static_cast<std::size_t>(t_past));

    Scenario scenario;
    scenario.id = scenario_id("int", i);

    AgentTrack focal;
    focal.agent_id = "focal";
    focal.role = AgentRole::Focal;
    focal.agent_class = AgentClass::Vehicle;
    focal.points = localized.points;
    focal.num_observed = static_cast<std::size_t>(t_past);
    scenario.tracks.push_back(std::move(focal));

    std::vector<Point2> av_points =
        straight_past(av_pos, av_heading, v_av, t_past, dt);
    av_points.insert(av_points.end(), av_future.points.begin(),
                     av_future.points.end());
    scenario.tracks.push_back(localized_track(
        localized.frame, "av", AgentRole::Av, AgentClass::Vehicle, av_points,
        static_cast<std::size_t>(t_past)));

    dataset.scenarios.push_back(std::move(scenario));
  }
  validate(dataset);
  return dataset;
}

}  // namespace trajset::synth
