#pragma once

#include <cstdint>
#include <span>

#include "trajset/core.hpp"
#include "trajset/dataset.hpp"

namespace trajset::synth {

struct BicycleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians
  double speed = 0.0;    // m/s, >= 0
};

struct Control {
  double accel = 0.0;     // m/s^2
  double steering = 0.0;  // radians, |steering| < pi/2
};

/// Forward-Euler rollout of the single-track kinematic model. Per step:
/// heading advances by (speed / wheelbase) * tan(steering) * dt, the
/// position moves along the new heading, then speed integrates the
/// acceleration (clamped at zero). Returns `steps` points; the initial
/// position is not included. Throws when |steering| >= pi/2.
Trajectory rollout_bicycle(const BicycleState& initial,
                           std::span<const Control> controls,
                           double wheelbase, std::size_t steps, double dt);

struct DatasetProfile {
  std::size_t n_vehicles = 200;
  std::size_t n_pedestrians = 100;
  std::size_t n_buses = 0;
  std::size_t n_motorcyclists = 0;
  std::size_t n_cyclists = 0;
  int t_past = 20;
  int t_future = 60;
  double dt = 0.1;
  double wheelbase = 2.7;
  std::uint64_t seed = 0;

  double vehicle_speed_min = 3.0;
  double vehicle_speed_max = 15.0;
  double pedestrian_speed_min = 0.3;
  double pedestrian_speed_max = 2.0;

  // Maneuver mix for the non-vulnerable classes; normalized on use.
  double w_straight = 0.30;
  double w_turn = 0.40;
  double w_stop = 0.15;
  double w_lane_change = 0.15;

  std::size_t total() const {
    return n_vehicles + n_pedestrians + n_buses + n_motorcyclists +
           n_cyclists;
  }
};

/// Deterministic labeled dataset: straight / turn / stop / lane-change
/// futures from feasible bicycle rollouts for the non-vulnerable classes,
/// low-speed heading-noise walkers for the vulnerable ones. Scenarios are
/// emitted in the focal-local frame convention. Each scenario derives its
/// own random stream from (seed, scenario index), so generation order does
/// not affect content.
Dataset make_dataset(const DatasetProfile& profile);

/// Interaction scenarios for conditional prediction: the focal vehicle
/// either proceeds through or yields before a crossing, and the branch is
/// observable only through the planned AV future (the focal agent proceeds
/// iff the AV plan stops). The two branch endpoints are at least 5 m apart
/// in every scenario (asserted at generation); the unconditioned future
/// distribution is bimodal by construction.
Dataset make_interaction_dataset(std::size_t n, std::uint64_t seed,
                                 int t_past = 20, int t_future = 60,
                                 double dt = 0.1);

}  // namespace trajset::synth
