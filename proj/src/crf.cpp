#include "nerkit/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nerkit/corpus.hpp"
#include "nerkit/error.hpp"

namespace nerkit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <typename Row>
double lse(const Row& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

void check_emissions(const Matrix& e, const CrfScores& s, const char* op) {
  if (e.rows() < 1) throw ShapeError(std::string(op) + ": empty sequence");
  if (e.cols() != s.num_tags() || s.start.size() != s.num_tags() ||
      s.end.size() != s.num_tags() || s.transitions.cols() != s.num_tags()) {
    throw ShapeError(std::string(op) + ": emissions " + shape_string(e) + " vs transitions " +
                     shape_string(s.transitions));
  }
}

void check_labels(std::span<const int> labels, const Matrix& e) {
  if (static_cast<Index>(labels.size()) != e.rows()) {
    throw ShapeError("crf: " + std::to_string(labels.size()) + " labels for emissions " +
                     shape_string(e));
  }
  for (const int y : labels) {
    if (y < 0 || y >= e.cols()) throw ShapeError("crf: tag index " + std::to_string(y) + " out of range");
  }
}

// Scores with -inf on everything the constraints forbid.
CrfScores masked(const CrfScores& s, const TransitionConstraints* c) {
  if (!c) return s;
  CrfScores m = s;
  const Index n = s.num_tags();
  if (c->allowed.rows() != n || c->allowed.cols() != n ||
      static_cast<Index>(c->start_allowed.size()) != n ||
      static_cast<Index>(c->end_allowed.size()) != n) {
    throw ShapeError("crf: constraints do not match " + std::to_string(n) + " tags");
  }
  for (Index i = 0; i < n; ++i) {
    if (!c->start_allowed[static_cast<std::size_t>(i)]) m.start(i) = kNegInf;
    if (!c->end_allowed[static_cast<std::size_t>(i)]) m.end(i) = kNegInf;
    for (Index j = 0; j < n; ++j) {
      if (!c->allowed(i, j)) m.transitions(i, j) = kNegInf;
    }
  }
  return m;
}

}  // namespace

TagSet::TagSet(std::vector<std::string> tags) : tags_(std::move(tags)) {
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    parse_tag(tags_[i]);
    if (!ids_.emplace(tags_[i], static_cast<int>(i)).second) {
      throw DataError("duplicate tag '" + tags_[i] + "'");
    }
  }
  if (!ids_.contains("O")) throw DataError("tag set lacks 'O'");
  for (const auto& t : tags_) {
    const Tag p = parse_tag(t);
    if (p.prefix == 'O') continue;
    const std::string twin = (p.prefix == 'B' ? "I-" : "B-") + p.cls;
    if (!ids_.contains(twin)) throw DataError("tag set has " + t + " but not " + twin);
  }
}

TagSet TagSet::from_classes(const std::set<std::string>& classes) {
  std::vector<std::string> tags{"O"};
  for (const auto& c : class_order(classes)) {
    tags.push_back("B-" + c);
    tags.push_back("I-" + c);
  }
  return TagSet(std::move(tags));
}

int TagSet::index(const std::string& tag) const {
  const auto it = ids_.find(tag);
  if (it == ids_.end()) throw DataError("tag '" + tag + "' is not in the model's tag set");
  return it->second;
}

std::vector<std::string> TagSet::classes() const {
  std::vector<std::string> out;
  for (const auto& t : tags_) {
    const Tag p = parse_tag(t);
    if (p.prefix == 'B') out.push_back(p.cls);
  }
  return out;
}

std::vector<int> TagSet::encode(const std::vector<std::string>& labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(index(l));
  return out;
}

std::vector<std::string> TagSet::decode(std::span<const int> path) const {
  std::vector<std::string> out;
  out.reserve(path.size());
  for (const int i : path) out.push_back(tag(i));
  return out;
}

CrfParams make_crf(Index dim, Index num_tags, Rng& rng) {
  CrfParams p;
  p.proj_w = Tensor::parameter(xavier_uniform(dim, num_tags, rng));
  p.proj_b = Tensor::parameter(Matrix::Zero(1, num_tags));
  p.transitions = Tensor::parameter(Matrix::Zero(num_tags, num_tags));
  p.start = Tensor::parameter(Matrix::Zero(1, num_tags));
  p.end = Tensor::parameter(Matrix::Zero(1, num_tags));
  return p;
}

void append_parameters(const CrfParams& p, ParameterList& out) {
  out.push_back({"crf.proj_w", p.proj_w});
  out.push_back({"crf.proj_b", p.proj_b});
  out.push_back({"crf.transitions", p.transitions});
  out.push_back({"crf.start", p.start});
  out.push_back({"crf.end", p.end});
}

CrfScores scores_of(const CrfParams& p) {
  return {p.transitions.value(), p.start.value().row(0), p.end.value().row(0)};
}

TransitionConstraints unconstrained(Index num_tags) {
  return {BoolMatrix::Constant(num_tags, num_tags, true),
          std::vector<bool>(static_cast<std::size_t>(num_tags), true),
          std::vector<bool>(static_cast<std::size_t>(num_tags), true)};
}

TransitionConstraints iob2_constraints(const TagSet& tags) {
  const auto n = static_cast<Index>(tags.size());
  TransitionConstraints c = unconstrained(n);
  for (Index j = 0; j < n; ++j) {
    const Tag to = parse_tag(tags.tag(static_cast<int>(j)));
    if (to.prefix != 'I') continue;
    c.start_allowed[static_cast<std::size_t>(j)] = false;
    for (Index i = 0; i < n; ++i) {
      const Tag from = parse_tag(tags.tag(static_cast<int>(i)));
      c.allowed(i, j) = from.prefix != 'O' && from.cls == to.cls;
    }
  }
  return c;
}

Tensor emissions(const Tensor& word_reprs, const CrfParams& p) {
  return add_row(matmul(word_reprs, p.proj_w), p.proj_b);
}

double sequence_score(const Matrix& e, std::span<const int> labels, const CrfScores& s) {
  check_emissions(e, s, "sequence_score");
  check_labels(labels, e);
  double score = s.start(labels[0]) + e(0, labels[0]);
  for (Index t = 1; t < e.rows(); ++t) {
    score += s.transitions(labels[t - 1], labels[t]) + e(t, labels[t]);
  }
  return score + s.end(labels.back());
}

double forward_log_partition(const Matrix& e, const CrfScores& raw,
                             const TransitionConstraints* c) {
  check_emissions(e, raw, "forward_log_partition");
  const CrfScores s = masked(raw, c);
  const Index n = s.num_tags();
  RowVector alpha = s.start + e.row(0);
  RowVector next(n);
  for (Index t = 1; t < e.rows(); ++t) {
    for (Index j = 0; j < n; ++j) {
      next(j) = lse((alpha.transpose() + s.transitions.col(j)).eval()) + e(t, j);
    }
    alpha.swap(next);
  }
  return lse((alpha + s.end).eval());
}

Tensor crf_nll(const Tensor& emissions_t, std::span<const int> labels, const CrfParams& p,
               const TransitionConstraints* c) {
  const Matrix& e = emissions_t.value();
  const CrfScores raw = scores_of(p);
  check_emissions(e, raw, "crf_nll");
  check_labels(labels, e);
  const CrfScores s = masked(raw, c);
  const Index l = e.rows();
  const Index n = s.num_tags();

  Matrix alpha(l, n);
  Matrix beta(l, n);
  alpha.row(0) = s.start + e.row(0);
  for (Index t = 1; t < l; ++t) {
    for (Index j = 0; j < n; ++j) {
      alpha(t, j) = lse((alpha.row(t - 1).transpose() + s.transitions.col(j)).eval()) + e(t, j);
    }
  }
  beta.row(l - 1) = s.end;
  for (Index t = l - 2; t >= 0; --t) {
    const RowVector ahead = e.row(t + 1) + beta.row(t + 1);
    for (Index i = 0; i < n; ++i) {
      beta(t, i) = lse((s.transitions.row(i) + ahead).eval());
    }
  }
  const double log_z = lse((alpha.row(l - 1) + s.end).eval());
  const double gold = sequence_score(e, labels, s);
  if (!std::isfinite(gold)) throw NumericError("crf_nll: gold path violates the constraints");

  // Gradients of log Z are expected counts; the gold path is subtracted.
  Matrix d_emit = ((alpha + beta).array() - log_z).exp().matrix();
  Matrix d_trans = Matrix::Zero(n, n);
  for (Index t = 0; t + 1 < l; ++t) {
    const RowVector ahead = e.row(t + 1) + beta.row(t + 1);
    for (Index i = 0; i < n; ++i) {
      d_trans.row(i).array() +=
          (s.transitions.row(i) + ahead).array().unaryExpr([&](double v) {
            return std::exp(alpha(t, i) + v - log_z);
          });
    }
  }
  Matrix d_start = d_emit.row(0);
  Matrix d_end = d_emit.row(l - 1);
  for (Index t = 0; t < l; ++t) d_emit(t, labels[t]) -= 1.0;
  for (Index t = 0; t + 1 < l; ++t) d_trans(labels[t], labels[t + 1]) -= 1.0;
  d_start(0, labels.front()) -= 1.0;
  d_end(0, labels.back()) -= 1.0;

  Matrix out(1, 1);
  out(0, 0) = log_z - gold;
  return make_derived(
      std::move(out), {emissions_t, p.transitions, p.start, p.end},
      [d_emit = std::move(d_emit), d_trans = std::move(d_trans), d_start = std::move(d_start),
       d_end = std::move(d_end)](const Node& self, std::span<Matrix* const> g) {
        const double up = self.grad(0, 0);
        if (g[0]) *g[0] += up * d_emit;
        if (g[1]) *g[1] += up * d_trans;
        if (g[2]) *g[2] += up * d_start;
        if (g[3]) *g[3] += up * d_end;
      },
      "crf_nll");
}

ViterbiResult viterbi(const Matrix& e, const CrfScores& s, const TransitionConstraints* c) {
  check_emissions(e, s, "viterbi");
  const Index l = e.rows();
  const Index n = s.num_tags();
  const auto trans = [&](Index i, Index j) {
    return (c && !c->allowed(i, j)) ? kNegInf : s.transitions(i, j);
  };

  Matrix delta(l, n);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> back(l, n);
  for (Index j = 0; j < n; ++j) {
    delta(0, j) = (c && !c->start_allowed[j]) ? kNegInf : s.start(j) + e(0, j);
  }
  for (Index t = 1; t < l; ++t) {
    for (Index j = 0; j < n; ++j) {
      double best = kNegInf;
      int arg = 0;
      for (Index i = 0; i < n; ++i) {
        const double v = delta(t - 1, i) + trans(i, j);
        if (v > best) {
          best = v;
          arg = static_cast<int>(i);
        }
      }
      delta(t, j) = best + e(t, j);
      back(t, j) = arg;
    }
  }
  double best = kNegInf;
  int last = -1;
  for (Index j = 0; j < n; ++j) {
    const double v = (c && !c->end_allowed[j]) ? kNegInf : delta(l - 1, j) + s.end(j);
    if (v > best) {
      best = v;
      last = static_cast<int>(j);
    }
  }
  if (last < 0) throw NumericError("viterbi: constraints leave no legal path");

  ViterbiResult r;
  r.score = best;
  r.path.assign(static_cast<std::size_t>(l), 0);
  r.path[static_cast<std::size_t>(l - 1)] = last;
  for (Index t = l - 1; t > 0; --t) {
    r.path[static_cast<std::size_t>(t - 1)] = back(t, r.path[static_cast<std::size_t>(t)]);
  }
  return r;
}

}  // namespace nerkit
