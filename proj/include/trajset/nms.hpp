#pragma once

#include <span>
#include <vector>

#include "trajset/setgen.hpp"

namespace trajset::nms {

/// A trajectory set with one probability per member.
struct ScoredSet {
  const setgen::TrajectorySet& set;
  std::span<const double> probs;  // >= 0, sum to 1 within 1e-6
};

struct Selection {
  std::size_t index = 0;  // index into the trajectory set
  double probability = 0.0;
};

/// Greedy endpoint-radius suppression: pick the highest-probability member,
/// discard all members whose endpoints lie within r_nms of it (inclusive),
/// repeat until k are selected. r_nms == 0 disables suppression and reduces
/// to plain top-k. If suppression exhausts the set before k picks, the
/// remainder is refilled from the suppressed members by descending
/// probability. Output is sorted by descending probability (ties by lower
/// index) and always has exactly k entries. Throws when k exceeds the set
/// size or the probabilities are not a distribution.
std::vector<Selection> select_nms(const ScoredSet& scored, std::size_t k,
                                  double r_nms);

}  // namespace trajset::nms
