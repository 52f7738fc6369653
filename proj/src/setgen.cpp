#include "trajset/setgen.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "trajset/rng.hpp"

namespace trajset::setgen {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double pair_metric(const Trajectory& a, const Trajectory& b, SetMetric m) {
  return m == SetMetric::Ade ? ade(a, b) : fde(a, b);
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per
/// thread. fn must only write to per-chunk state.
template <typename Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads <= 1 || n < 2 * threads) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const std::size_t begin = std::min(n, t * chunk);
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& th : pool) th.join();
}

void check_dataset(const std::vector<Trajectory>& dataset) {
  if (dataset.empty()) {
    throw std::invalid_argument("dataset must not be empty");
  }
  const std::size_t len = dataset.front().points.size();
  if (len == 0) {
    throw std::invalid_argument("trajectories must not be empty");
  }
  for (const Trajectory& t : dataset) {
    if (t.points.size() != len) {
      throw std::invalid_argument("mixed trajectory lengths in dataset");
    }
    if (t.dt != dataset.front().dt) {
      throw std::invalid_argument("mixed trajectory dt in dataset");
    }
  }
}

std::size_t count_distinct(const std::vector<Trajectory>& dataset) {
  // Pairwise ADE is zero iff the point sequences are equal, so value
  // distinctness is exact byte distinctness after normalizing -0.0.
  std::unordered_set<std::string> seen;
  seen.reserve(dataset.size());
  for (const Trajectory& t : dataset) {
    std::string key;
    key.resize(t.points.size() * 2 * sizeof(double));
    char* out = key.data();
    for (const Point2& p : t.points) {
      const double x = p.x + 0.0;
      const double y = p.y + 0.0;
      std::memcpy(out, &x, sizeof(double));
      std::memcpy(out + sizeof(double), &y, sizeof(double));
      out += 2 * sizeof(double);
    }
    seen.insert(std::move(key));
  }
  return seen.size();
}

struct Candidate {
  double score = kInf;
  std::size_t index = 0;

  bool operator<(const Candidate& other) const {
    return score < other.score ||
           (score == other.score && index < other.index);
  }
};

/// Pairwise metric rows, either materialized or recomputed per request.
/// Stored in 64-bit: candidate scores that are mathematically tied (two
/// candidates covering exactly each other) must come out bitwise identical
/// to a from-scratch recomputation, which narrower storage breaks.
class MetricRows {
 public:
  MetricRows(const std::vector<Trajectory>& dataset, SetMetric metric,
             bool materialize, unsigned threads)
      : dataset_(dataset), metric_(metric), materialized_(materialize) {
    if (!materialize) return;
    const std::size_t k = dataset.size();
    matrix_.resize(k * k);
    parallel_chunks(k, threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        double* row = matrix_.data() + i * k;
        for (std::size_t j = 0; j < k; ++j) {
          row[j] = pair_metric(dataset[i], dataset[j], metric_);
        }
      }
    });
  }

  bool materialized() const { return materialized_; }

  /// Mean over the dataset of min(metric(i, j), current[j]).
  double score(std::size_t i, const std::vector<double>& current) const {
    const std::size_t k = dataset_.size();
    double sum = 0.0;
    if (materialized_) {
      const double* row = matrix_.data() + i * k;
      for (std::size_t j = 0; j < k; ++j) {
        sum += std::min(row[j], current[j]);
      }
    } else {
      for (std::size_t j = 0; j < k; ++j) {
        sum += std::min(pair_metric(dataset_[i], dataset_[j], metric_),
                        current[j]);
      }
    }
    return sum / static_cast<double>(k);
  }

  /// Row of the selected trajectory, used to advance the running minima.
  std::vector<double> row(std::size_t i) const {
    const std::size_t k = dataset_.size();
    std::vector<double> out(k);
    if (materialized_) {
      const double* data = matrix_.data() + i * k;
      out.assign(data, data + k);
    } else {
      for (std::size_t j = 0; j < k; ++j) {
        out[j] = pair_metric(dataset_[i], dataset_[j], metric_);
      }
    }
    return out;
  }

 private:
  const std::vector<Trajectory>& dataset_;
  SetMetric metric_;
  bool materialized_;
  std::vector<double> matrix_;
};

}  // namespace

std::string to_string(SetGroup group) {
  switch (group) {
    case SetGroup::NonVulnerable: return "nonvulnerable";
    case SetGroup::Vulnerable: return "vulnerable";
    case SetGroup::Mixed: return "mixed";
  }
  throw std::invalid_argument("unknown set group");
}

SetGroup set_group_from_string(const std::string& s) {
  if (s == "nonvulnerable") return SetGroup::NonVulnerable;
  if (s == "vulnerable") return SetGroup::Vulnerable;
  if (s == "mixed") return SetGroup::Mixed;
  throw std::invalid_argument("unknown set group: " + s);
}

SetGroup set_group_of(ClassGroup group) {
  return group == ClassGroup::NonVulnerable ? SetGroup::NonVulnerable
                                            : SetGroup::Vulnerable;
}

GenerationResult generate_set_metric_driven(
    const std::vector<Trajectory>& dataset, std::size_t s,
    const GenOptions& opts) {
  check_dataset(dataset);
  if (s == 0) {
    throw std::invalid_argument("set size must be at least 1");
  }
  const std::size_t distinct = count_distinct(dataset);
  if (s > distinct) {
    throw std::invalid_argument("set size " + std::to_string(s) +
                                " exceeds distinct trajectory count " +
                                std::to_string(distinct));
  }

  const std::size_t k = dataset.size();
  const unsigned threads = resolve_threads(opts.threads);
  const bool materialize = k <= opts.matrix_threshold;
  MetricRows rows(dataset, opts.metric, materialize, threads);

  GenerationTrace trace;
  trace.strategy = materialize ? GenerationTrace::Strategy::Materialized
                               : GenerationTrace::Strategy::Streaming;
  trace.selected.reserve(s);
  trace.achievable.reserve(s);

  std::vector<double> current(k, kInf);  // running minADE per trajectory
  std::vector<char> selected(k, 0);

  while (trace.selected.size() < s) {
    // Candidate scores are independent; evaluate chunks in parallel and
    // merge best-per-chunk in chunk order so the reduction is deterministic.
    const unsigned n_chunks =
        threads <= 1 ? 1
                     : static_cast<unsigned>(std::min<std::size_t>(threads, k));
    std::vector<Candidate> chunk_best(n_chunks);
    const std::size_t chunk = (k + n_chunks - 1) / n_chunks;
    parallel_chunks(k, n_chunks, [&](std::size_t begin, std::size_t end) {
      Candidate best;
      for (std::size_t i = begin; i < end; ++i) {
        if (selected[i]) continue;
        const Candidate cand{rows.score(i, current), i};
        if (cand < best) best = cand;
      }
      chunk_best[begin / chunk] = best;
    });
    Candidate best;
    for (const Candidate& cand : chunk_best) {
      if (cand < best) best = cand;
    }

    selected[best.index] = 1;
    const std::vector<double> row = rows.row(best.index);
    for (std::size_t j = 0; j < k; ++j) {
      current[j] = std::min(current[j], row[j]);
    }
    double mean = 0.0;
    for (double v : current) mean += v;
    mean /= static_cast<double>(k);

    trace.selected.push_back(best.index);
    trace.achievable.push_back(mean);
  }

  GenerationResult result;
  result.trace = std::move(trace);
  result.set.horizon = static_cast<int>(dataset.front().points.size());
  result.set.dt = dataset.front().dt;
  result.set.meta.algorithm =
      opts.metric == SetMetric::Ade ? "metric-ade" : "metric-fde";
  result.set.meta.params["s"] = std::to_string(s);
  result.set.meta.params["strategy"] =
      materialize ? "materialized" : "streaming";
  result.set.meta.seed = opts.seed;
  result.set.meta.achievable_curve = result.trace.achievable;
  result.set.trajectories.reserve(s);
  for (std::size_t idx : result.trace.selected) {
    result.set.trajectories.push_back(dataset[idx]);
  }
  return result;
}

TrajectorySet generate_set_bagging(const std::vector<Trajectory>& dataset,
                                   double epsilon) {
  check_dataset(dataset);
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("epsilon must be positive");
  }

  const std::size_t k = dataset.size();
  const std::size_t len = dataset.front().points.size();
  const auto covers = [&](std::size_t a, std::size_t b) {
    for (std::size_t t = 0; t < len; ++t) {
      if (distance(dataset[a].points[t], dataset[b].points[t]) > epsilon) {
        return false;
      }
    }
    return true;
  };

  std::vector<char> covered(k, 0);
  std::vector<char> picked(k, 0);
  std::size_t n_covered = 0;

  TrajectorySet set;
  set.horizon = static_cast<int>(len);
  set.dt = dataset.front().dt;
  set.meta.algorithm = "bagging";
  set.meta.params["epsilon"] = std::to_string(epsilon);

  while (n_covered < k) {
    std::size_t best = k;
    std::size_t best_count = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (picked[i]) continue;
      std::size_t count = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (!covered[j] && covers(i, j)) ++count;
      }
      if (count > best_count) {
        best_count = count;
        best = i;
      }
    }
    // Every uncovered trajectory covers itself, so a candidate always exists.
    picked[best] = 1;
    set.trajectories.push_back(dataset[best]);
    for (std::size_t j = 0; j < k; ++j) {
      if (!covered[j] && covers(best, j)) {
        covered[j] = 1;
        ++n_covered;
      }
    }
  }
  set.meta.params["size"] = std::to_string(set.trajectories.size());
  return set;
}

std::map<ClassGroup, GenerationResult> generate_class_specific(
    const std::vector<LabeledTrajectory>& dataset, std::size_t s_per_group,
    const GenOptions& opts) {
  std::map<ClassGroup, std::vector<Trajectory>> grouped;
  for (const LabeledTrajectory& item : dataset) {
    grouped[group_of(item.agent_class)].push_back(item.trajectory);
  }
  std::map<ClassGroup, GenerationResult> result;
  for (ClassGroup group :
       {ClassGroup::NonVulnerable, ClassGroup::Vulnerable}) {
    const auto it = grouped.find(group);
    if (it == grouped.end() || it->second.empty()) {
      throw std::invalid_argument("class group '" + to_string(group) +
                                  "' has no trajectories");
    }
    GenerationResult gen =
        generate_set_metric_driven(it->second, s_per_group, opts);
    gen.set.group = set_group_of(group);
    result.emplace(group, std::move(gen));
  }
  return result;
}

std::vector<std::size_t> sample_indices(std::size_t total, std::size_t n,
                                        std::uint64_t seed) {
  if (n > total) {
    throw std::invalid_argument("sample size " + std::to_string(n) +
                                " exceeds population " +
                                std::to_string(total));
  }
  std::vector<std::size_t> pool(total);
  for (std::size_t i = 0; i < total; ++i) pool[i] = i;
  Rng rng(seed);
  // Partial Fisher-Yates: after n swaps the prefix is the sample.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.bounded(total - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<Trajectory> subsample(const std::vector<Trajectory>& dataset,
                                  std::size_t n, std::uint64_t seed) {
  const std::vector<std::size_t> idx =
      sample_indices(dataset.size(), n, seed);
  std::vector<Trajectory> out;
  out.reserve(n);
  for (std::size_t i : idx) out.push_back(dataset[i]);
  return out;
}

}  // namespace trajset::setgen
