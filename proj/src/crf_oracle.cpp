#include "nerkit/crf_oracle.hpp"

#include <cmath>
#include <limits>

#include "nerkit/error.hpp"

namespace nerkit {

namespace {

// Calls visit(path, score) for every tag sequence in lexicographic order.
template <typename Visit>
void enumerate_paths(const Matrix& e, const CrfScores& s, Visit&& visit) {
  const Index l = e.rows();
  const Index n = s.num_tags();
  if (l < 1 || e.cols() != n) throw ShapeError("oracle: bad emission shape " + shape_string(e));
  std::uint64_t total = 1;
  for (Index t = 0; t < l; ++t) {
    total *= static_cast<std::uint64_t>(n);
    if (total > kOracleMaxPaths) {
      throw NumericError("oracle: " + std::to_string(n) + "^" + std::to_string(l) +
                         " paths exceed the enumeration limit");
    }
  }
  std::vector<int> path(static_cast<std::size_t>(l), 0);
  for (std::uint64_t k = 0; k < total; ++k) {
    double score = s.start(path[0]) + s.end(path.back());
    for (Index t = 0; t < l; ++t) {
      score += e(t, path[t]);
      if (t > 0) score += s.transitions(path[t - 1], path[t]);
    }
    visit(path, score);
    for (Index t = l - 1; t >= 0; --t) {
      if (++path[t] < n) break;
      path[t] = 0;
    }
  }
}

}  // namespace

double oracle_log_partition(const Matrix& e, const CrfScores& s) {
  std::vector<double> all;
  enumerate_paths(e, s, [&](const std::vector<int>&, double score) { all.push_back(score); });
  double mx = -std::numeric_limits<double>::infinity();
  for (const double v : all) mx = std::max(mx, v);
  double sum = 0.0;
  for (const double v : all) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

ViterbiResult oracle_best_path(const Matrix& e, const CrfScores& s,
                               const TransitionConstraints* c) {
  ViterbiResult best;
  best.score = -std::numeric_limits<double>::infinity();
  enumerate_paths(e, s, [&](const std::vector<int>& path, double score) {
    if (c) {
      if (!c->start_allowed[path.front()] || !c->end_allowed[path.back()]) return;
      for (std::size_t t = 1; t < path.size(); ++t) {
        if (!c->allowed(path[t - 1], path[t])) return;
      }
    }
    if (best.path.empty() || score > best.score) {
      best.path = path;
      best.score = score;
    }
  });
  if (best.path.empty()) throw NumericError("oracle: no legal path");
  return best;
}

}  // namespace nerkit
