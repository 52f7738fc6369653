#include "trajset/nms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace trajset::nms {

std::vector<Selection> select_nms(const ScoredSet& scored, std::size_t k,
                                  double r_nms) {
  const std::size_t n = scored.set.size();
  if (scored.probs.size() != n) {
    throw std::invalid_argument("probability count does not match set size");
  }
  if (k == 0) {
    throw std::invalid_argument("k must be at least 1");
  }
  if (k > n) {
    throw std::invalid_argument("k = " + std::to_string(k) +
                                " exceeds set size " + std::to_string(n));
  }
  if (r_nms < 0.0) {
    throw std::invalid_argument("r_nms must be non-negative");
  }
  double sum = 0.0;
  for (double p : scored.probs) {
    if (!(p >= 0.0)) {
      throw std::invalid_argument("probabilities must be non-negative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw std::invalid_argument("probabilities must sum to 1");
  }

  // Descending probability, ties by lower set index.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scored.probs[a] != scored.probs[b]) {
      return scored.probs[a] > scored.probs[b];
    }
    return a < b;
  });

  enum : char { kAvailable, kSelected, kSuppressed };
  std::vector<char> state(n, kAvailable);
  std::vector<Selection> out;
  out.reserve(k);

  for (std::size_t rank = 0; rank < n && out.size() < k; ++rank) {
    const std::size_t i = order[rank];
    if (state[i] != kAvailable) continue;
    state[i] = kSelected;
    out.push_back({i, scored.probs[i]});
    if (r_nms > 0.0) {
      const Point2 endpoint = scored.set.trajectories[i].points.back();
      for (std::size_t j = 0; j < n; ++j) {
        if (state[j] == kAvailable &&
            distance(endpoint, scored.set.trajectories[j].points.back()) <=
                r_nms) {
          state[j] = kSuppressed;
        }
      }
    }
  }

  // Exhaustion fallback: refill from suppressed members, highest first.
  for (std::size_t rank = 0; rank < n && out.size() < k; ++rank) {
    const std::size_t i = order[rank];
    if (state[i] == kSuppressed) {
      state[i] = kSelected;
      out.push_back({i, scored.probs[i]});
    }
  }

  std::sort(out.begin(), out.end(), [](const Selection& a, const Selection& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.index < b.index;
  });
  return out;
}

}  // namespace trajset::nms
