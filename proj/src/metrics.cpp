#include "trajset/metrics.hpp"

#include <limits>
#include <stdexcept>

namespace trajset::metrics {

double turn_radius_threshold(AgentClass cls) {
  switch (cls) {
    case AgentClass::Vehicle: return 1.8;
    case AgentClass::Bus: return 3.0;
    case AgentClass::Motorcyclist: return 0.8;
    case AgentClass::Cyclist: return 0.6;
    case AgentClass::Pedestrian: return 0.0;
  }
  throw std::invalid_argument("unknown agent class");
}

MetricReport eval_multimodal(
    const std::vector<std::vector<Trajectory>>& predictions,
    const std::vector<Trajectory>& ground_truth, int k) {
  if (k < 1) {
    throw std::invalid_argument("k must be at least 1");
  }
  if (predictions.size() != ground_truth.size()) {
    throw std::invalid_argument("prediction and ground-truth counts differ");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("no sequences to evaluate");
  }

  double ade_sum = 0.0;
  double fde_sum = 0.0;
  std::size_t misses = 0;
  for (std::size_t seq = 0; seq < predictions.size(); ++seq) {
    const auto& preds = predictions[seq];
    if (preds.size() < static_cast<std::size_t>(k)) {
      throw std::invalid_argument(
          "sequence " + std::to_string(seq) + " supplies " +
          std::to_string(preds.size()) + " predictions, need " +
          std::to_string(k));
    }
    std::size_t best = 0;
    double best_fde = fde(preds[0], ground_truth[seq]);
    for (std::size_t i = 1; i < static_cast<std::size_t>(k); ++i) {
      const double d = fde(preds[i], ground_truth[seq]);
      if (d < best_fde) {
        best_fde = d;
        best = i;
      }
    }
    ade_sum += ade(preds[best], ground_truth[seq]);
    fde_sum += best_fde;
    if (best_fde > kMissRadius) {
      ++misses;
    }
  }

  MetricReport report;
  report.k = k;
  report.n_sequences = predictions.size();
  report.min_ade = ade_sum / static_cast<double>(predictions.size());
  report.min_fde = fde_sum / static_cast<double>(predictions.size());
  report.miss_rate =
      100.0 * static_cast<double>(misses) / static_cast<double>(predictions.size());
  return report;
}

double tri(const std::vector<std::vector<Trajectory>>& predictions,
           const std::vector<AgentClass>& classes,
           const std::vector<Point2>& last_observed, int k) {
  if (k < 1) {
    throw std::invalid_argument("k must be at least 1");
  }
  if (predictions.size() != classes.size() ||
      predictions.size() != last_observed.size()) {
    throw std::invalid_argument("per-sequence input counts differ");
  }
  std::size_t total = 0;
  std::size_t infeasible = 0;
  for (std::size_t seq = 0; seq < predictions.size(); ++seq) {
    const auto& preds = predictions[seq];
    if (preds.size() < static_cast<std::size_t>(k)) {
      throw std::invalid_argument(
          "sequence " + std::to_string(seq) + " supplies " +
          std::to_string(preds.size()) + " predictions, need " +
          std::to_string(k));
    }
    const double threshold = turn_radius_threshold(classes[seq]);
    for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
      ++total;
      if (min_turn_radius(preds[i], last_observed[seq]) < threshold) {
        ++infeasible;
      }
    }
  }
  if (total == 0) return 0.0;
  return 100.0 * static_cast<double>(infeasible) / static_cast<double>(total);
}

double lb_minade(const std::vector<Trajectory>& dataset,
                 const setgen::TrajectorySet& set) {
  if (dataset.empty()) {
    throw std::invalid_argument("dataset must not be empty");
  }
  if (set.trajectories.empty()) {
    throw std::invalid_argument("trajectory set must not be empty");
  }
  for (const Trajectory& t : dataset) {
    if (t.points.size() != static_cast<std::size_t>(set.horizon)) {
      throw std::invalid_argument("dataset horizon does not match set");
    }
  }
  double sum = 0.0;
  for (const Trajectory& t : dataset) {
    double best = std::numeric_limits<double>::infinity();
    for (const Trajectory& member : set.trajectories) {
      best = std::min(best, ade(member, t));
    }
    sum += best;
  }
  return sum / static_cast<double>(dataset.size());
}

double rcc(const model::ClassifierModel& m) {
  if (m.layers.empty()) {
    throw std::invalid_argument("model has no parameter blocks");
  }
  std::size_t total = 0;
  std::size_t conditional = 0;
  for (const model::LinearLayer& layer : m.layers) {
    total += layer.parameter_count();
    if (layer.stage == model::FusionStage::Conditional) {
      conditional += layer.parameter_count();
    }
  }
  return 100.0 * static_cast<double>(conditional) /
         static_cast<double>(total);
}

}  // namespace trajset::metrics
