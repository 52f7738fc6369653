#pragma once

#include <cstddef>
#include <vector>

#include "trajset/core.hpp"
#include "trajset/model.hpp"
#include "trajset/setgen.hpp"

namespace trajset::metrics {

/// Endpoint radius below which a prediction counts as a hit (miss iff the
/// selected FDE exceeds it).
inline constexpr double kMissRadius = 2.0;  // m

/// Class-specific minimum feasible turn radius. Predictions with a smaller
/// minimum turn radius are infeasible (strict comparison, so the pedestrian
/// threshold of 0 never fires).
double turn_radius_threshold(AgentClass cls);

struct MetricReport {
  int k = 1;
  double min_ade = 0.0;    // m
  double min_fde = 0.0;    // m
  double miss_rate = 0.0;  // percent
  double tri = 0.0;        // percent
  std::size_t n_sequences = 0;
};

/// Multimodal evaluation: per sequence, the prediction with the smallest
/// endpoint distance to the ground truth is selected among the first k;
/// its ADE and FDE are averaged over sequences and a sequence is a miss when
/// that FDE exceeds kMissRadius. The report's tri field is left at zero
/// (see tri()). Throws when a sequence supplies fewer than k predictions.
MetricReport eval_multimodal(
    const std::vector<std::vector<Trajectory>>& predictions,
    const std::vector<Trajectory>& ground_truth, int k);

/// Percentage of the first k predicted trajectories (over all sequences)
/// whose minimum turn radius is below the class threshold.
double tri(const std::vector<std::vector<Trajectory>>& predictions,
           const std::vector<AgentClass>& classes,
           const std::vector<Point2>& last_observed, int k);

/// Lower-bound minADE: mean over the dataset of the pure ADE-minimum to the
/// set. This is the minADE an oracle classifier would achieve; unlike
/// eval_multimodal it does not select by endpoint distance.
double lb_minade(const std::vector<Trajectory>& dataset,
                 const setgen::TrajectorySet& set);

/// Remaining conditional capacity: percentage of model parameters in blocks
/// at or after the fusion point (those that must be re-executed per planned
/// AV future). Depends only on block shapes and fusion-stage labels.
double rcc(const model::ClassifierModel& m);

}  // namespace trajset::metrics
