#ifndef NERKIT_TESTS_ORACLES_HPP
#define NERKIT_TESTS_ORACLES_HPP

// Straight-line reference computations for the tests. Plain loops over
// std::vector; nothing here calls into the library's math.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "nerkit/tensor.hpp"

namespace oracle {

using Grid = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Grid grid(const nerkit::Matrix& m) {
  Grid g(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g[i].size(); ++j) g[i][j] = m(static_cast<long>(i), static_cast<long>(j));
  return g;
}

inline Vec row(const nerkit::Matrix& m, long r = 0) {
  Vec v(static_cast<std::size_t>(m.cols()));
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = m(r, static_cast<long>(j));
  return v;
}

// C = tanh(H w_a), padding rows contribute c = 0; alpha = softmax over
// unmasked positions of C^T W_alpha; out = alpha H.
inline Vec attention_pool(const Grid& h, const std::vector<bool>& mask, const Vec& w_a,
                          const Grid& w_alpha) {
  const std::size_t k = h.size();
  const std::size_t d = w_a.size();
  Vec c(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    if (!mask[i]) continue;
    double acc = 0.0;
    for (std::size_t j = 0; j < d; ++j) acc += h[i][j] * w_a[j];
    c[i] = std::tanh(acc);
  }
  Vec logits(k, 0.0);
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < k; ++i) logits[j] += c[i] * w_alpha[i][j];
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j)
    if (mask[j]) mx = std::max(mx, logits[j]);
  Vec alpha(k, 0.0);
  double z = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (!mask[j]) continue;
    alpha[j] = std::exp(logits[j] - mx);
    z += alpha[j];
  }
  Vec out(d, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    alpha[j] /= z;
    for (std::size_t t = 0; t < d; ++t) out[t] += alpha[j] * h[j][t];
  }
  return out;
}

// -alpha_y (1 - p_y)^gamma log p_y with p_y clamped away from zero.
inline double focal(int y, double p1, double gamma, double alpha0, double alpha1) {
  const double py = std::max(y == 1 ? p1 : 1.0 - p1, 1e-12);
  return -(y == 1 ? alpha1 : alpha0) * std::pow(1.0 - py, gamma) * std::log(py);
}

inline double softmax_p1(double z0, double z1) { return 1.0 / (1.0 + std::exp(z0 - z1)); }

struct Crf {
  Grid emissions;  // [l][T]
  Grid transitions;
  Vec start;
  Vec end;
  // allowed[i][j], start_ok, end_ok; empty = unconstrained.
  std::vector<std::vector<bool>> allowed;
  std::vector<bool> start_ok;
  std::vector<bool> end_ok;

  std::size_t length() const { return emissions.size(); }
  std::size_t tags() const { return start.size(); }

  double score(const std::vector<int>& y) const {
    double s = start[y[0]] + end[y.back()];
    for (std::size_t t = 0; t < y.size(); ++t) s += emissions[t][y[t]];
    for (std::size_t t = 0; t + 1 < y.size(); ++t) s += transitions[y[t]][y[t + 1]];
    return s;
  }

  bool legal(const std::vector<int>& y) const {
    if (allowed.empty()) return true;
    if (!start_ok[y[0]] || !end_ok[y.back()]) return false;
    for (std::size_t t = 0; t + 1 < y.size(); ++t)
      if (!allowed[y[t]][y[t + 1]]) return false;
    return true;
  }
};

struct Enumeration {
  double log_z = -std::numeric_limits<double>::infinity();
  std::vector<int> best;
  double best_score = -std::numeric_limits<double>::infinity();
  Grid marginals;  // p(y_t = j)
  std::size_t paths = 0;
};

// Visits every tag sequence (odometer order, last position fastest).
inline Enumeration enumerate(const Crf& crf) {
  const std::size_t l = crf.length();
  const std::size_t T = crf.tags();
  std::vector<int> y(l, 0);
  std::vector<double> scores;
  std::vector<std::vector<int>> paths;
  for (;;) {
    if (crf.legal(y)) {
      scores.push_back(crf.score(y));
      paths.push_back(y);
    }
    bool done = true;
    for (std::size_t pos = l; pos-- > 0;) {
      if (++y[pos] < static_cast<int>(T)) {
        done = false;
        break;
      }
      y[pos] = 0;
    }
    if (done) break;
  }
  Enumeration e;
  e.paths = scores.size();
  if (scores.empty()) return e;
  const double mx = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - mx);
  e.log_z = mx + std::log(z);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > e.best_score) {
      e.best_score = scores[i];
      e.best = paths[i];
    }
  }
  e.marginals.assign(l, Vec(T, 0.0));
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double p = std::exp(scores[i] - e.log_z);
    for (std::size_t t = 0; t < l; ++t) e.marginals[t][paths[i][t]] += p;
  }
  return e;
}

}  // namespace oracle

#endif  // NERKIT_TESTS_ORACLES_HPP
