#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trajset/core.hpp"
#include "trajset/dataset.hpp"

namespace trajset::setgen {

enum class SetGroup { NonVulnerable, Vulnerable, Mixed };

std::string to_string(SetGroup group);
SetGroup set_group_from_string(const std::string& s);
SetGroup set_group_of(ClassGroup group);

/// Displacement metric driving the greedy selection.
enum class SetMetric { Ade, Fde };

struct SetMeta {
  std::string algorithm;  // "metric-ade", "metric-fde", "bagging"
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  std::vector<double> achievable_curve;  // per-iteration achievable mean
  std::string source;                    // dataset identifier, free-form
};

/// Ordered collection of candidate future trajectories used as
/// classification targets. Members share horizon and dt and are pairwise
/// distinct.
struct TrajectorySet {
  std::vector<Trajectory> trajectories;
  SetGroup group = SetGroup::Mixed;
  int horizon = 0;
  double dt = 0.1;
  std::string frame = "local-heading+x";
  SetMeta meta;

  std::size_t size() const { return trajectories.size(); }
};

struct GenOptions {
  SetMetric metric = SetMetric::Ade;
  /// Pairwise matrix is materialized (64-bit, k^2 entries) up to this many
  /// trajectories; larger datasets recompute rows per iteration.
  std::size_t matrix_threshold = 20000;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::uint64_t seed = 0;  // recorded in SetMeta, the algorithm itself is
                           // deterministic
};

struct GenerationTrace {
  enum class Strategy { Materialized, Streaming };

  std::vector<std::size_t> selected;  // dataset indices, selection order
  std::vector<double> achievable;     // mean achievable metric after each pick
  Strategy strategy = Strategy::Materialized;
};

struct GenerationResult {
  TrajectorySet set;
  GenerationTrace trace;
};

/// Greedy metric-driven set construction: each iteration picks the dataset
/// trajectory that minimizes the mean over the dataset of the per-trajectory
/// minimum metric against the grown set. Ties go to the lowest dataset
/// index. Throws on empty input, mixed lengths, or s exceeding the number of
/// distinct trajectories.
GenerationResult generate_set_metric_driven(
    const std::vector<Trajectory>& dataset, std::size_t s,
    const GenOptions& opts = {});

/// Greedy coverage bagging: repeatedly add the trajectory covering the most
/// uncovered trajectories, where a covers b iff the maximum pointwise
/// distance is <= epsilon. The output size is whatever the cover needs.
TrajectorySet generate_set_bagging(const std::vector<Trajectory>& dataset,
                                   double epsilon);

/// Runs generate_set_metric_driven independently per class group on the
/// group-filtered futures. Throws naming the group when a group is empty.
std::map<ClassGroup, GenerationResult> generate_class_specific(
    const std::vector<LabeledTrajectory>& dataset, std::size_t s_per_group,
    const GenOptions& opts = {});

/// Uniform sample of n indices out of total, without replacement,
/// deterministic given seed. Result is in ascending order.
std::vector<std::size_t> sample_indices(std::size_t total, std::size_t n,
                                        std::uint64_t seed);

/// Uniform subsample without replacement, deterministic given seed.
std::vector<Trajectory> subsample(const std::vector<Trajectory>& dataset,
                                  std::size_t n, std::uint64_t seed);

}  // namespace trajset::setgen
