#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "trajset/core.hpp"
#include "trajset/rng.hpp"
#include "trajset/setgen.hpp"

namespace trajset::testing {

inline Trajectory make_traj(std::vector<Point2> points, double dt = 0.1) {
  Trajectory t;
  t.points = std::move(points);
  t.dt = dt;
  return t;
}

/// One-point trajectory on the x axis; handy for hand-checkable examples.
inline Trajectory point_traj(double x, double y = 0.0) {
  return make_traj({{x, y}});
}

inline Trajectory random_traj(Rng& rng, std::size_t len, double scale = 10.0,
                              double dt = 0.1) {
  Trajectory t;
  t.dt = dt;
  t.points.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    t.points.push_back({rng.uniform(-scale, scale), rng.uniform(-scale, scale)});
  }
  return t;
}

/// Random-walk trajectory (smoother than uniform noise, more like motion).
inline Trajectory random_walk_traj(Rng& rng, std::size_t len,
                                   double step = 1.0, double dt = 0.1) {
  Trajectory t;
  t.dt = dt;
  t.points.reserve(len);
  Point2 p{rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
  for (std::size_t i = 0; i < len; ++i) {
    p.x += rng.uniform(-step, step);
    p.y += rng.uniform(-step, step);
    t.points.push_back(p);
  }
  return t;
}

inline std::vector<Trajectory> random_dataset(Rng& rng, std::size_t k,
                                              std::size_t len,
                                              double scale = 10.0) {
  std::vector<Trajectory> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(random_traj(rng, len, scale));
  }
  return out;
}

struct LiteralGreedyResult {
  std::vector<std::size_t> selected;
  std::vector<double> achievable;
};

/// From-scratch transcription of the metric-driven generation procedure,
/// used as the selection oracle: the full pairwise matrix is materialized in
/// 64-bit, every candidate (including already selected ones) is re-scored
/// from scratch each iteration via a metric-memory of (i, m_i, M_i), and the
/// minimum m_i wins with ties going to the lowest index. No incremental
/// state is carried between candidates.
inline LiteralGreedyResult literal_greedy(
    const std::vector<Trajectory>& dataset, std::size_t s,
    setgen::SetMetric metric = setgen::SetMetric::Ade) {
  const std::size_t k = dataset.size();
  const auto get_metric = [&](const Trajectory& a, const Trajectory& b) {
    return metric == setgen::SetMetric::Ade ? ade(a, b) : fde(a, b);
  };

  std::vector<std::vector<double>> m_full(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      m_full[i][j] = get_metric(dataset[i], dataset[j]);
    }
  }

  std::vector<double> m_set(k, std::numeric_limits<double>::infinity());
  LiteralGreedyResult result;
  while (result.selected.size() < s) {
    struct Entry {
      std::size_t i;
      double m;
      std::vector<double> combined_min;
    };
    std::vector<Entry> memory;
    for (std::size_t i = 0; i < k; ++i) {
      Entry entry;
      entry.i = i;
      entry.combined_min.resize(k);
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        entry.combined_min[j] = std::min(m_full[i][j], m_set[j]);
        sum += entry.combined_min[j];
      }
      entry.m = sum / static_cast<double>(k);
      memory.push_back(std::move(entry));
    }
    const Entry* best = &memory.front();
    for (const Entry& entry : memory) {
      if (entry.m < best->m) best = &entry;
    }
    m_set = best->combined_min;
    result.selected.push_back(best->i);
    result.achievable.push_back(best->m);
  }
  return result;
}

/// Brute-force medoid: the dataset member minimizing the mean metric to all
/// members (ties to the lowest index).
inline std::size_t brute_force_medoid(
    const std::vector<Trajectory>& dataset,
    setgen::SetMetric metric = setgen::SetMetric::Ade) {
  const auto get_metric = [&](const Trajectory& a, const Trajectory& b) {
    return metric == setgen::SetMetric::Ade ? ade(a, b) : fde(a, b);
  };
  std::size_t best = 0;
  double best_mean = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    double sum = 0.0;
    for (const Trajectory& other : dataset) {
      sum += get_metric(dataset[i], other);
    }
    const double mean = sum / static_cast<double>(dataset.size());
    if (mean < best_mean) {
      best_mean = mean;
      best = i;
    }
  }
  return best;
}

inline double max_pointwise_distance(const Trajectory& a,
                                     const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t t = 0; t < a.points.size(); ++t) {
    worst = std::max(worst, distance(a.points[t], b.points[t]));
  }
  return worst;
}

/// Exhaustive coverage check for bagging outputs.
inline bool covers_all(const std::vector<Trajectory>& dataset,
                       const setgen::TrajectorySet& set, double epsilon) {
  for (const Trajectory& t : dataset) {
    bool covered = false;
    for (const Trajectory& member : set.trajectories) {
      if (max_pointwise_distance(member, t) <= epsilon) {
        covered = true;
        break;
      }
    }
    if (!covered) return false;
  }
  return true;
}

inline bool same_points(const Trajectory& a, const Trajectory& b) {
  if (a.points.size() != b.points.size()) return false;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].x != b.points[i].x || a.points[i].y != b.points[i].y) {
      return false;
    }
  }
  return true;
}

}  // namespace trajset::testing
