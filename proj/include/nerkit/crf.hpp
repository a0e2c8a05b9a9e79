#ifndef NERKIT_CRF_HPP
#define NERKIT_CRF_HPP

// Linear-chain CRF over IOB2 tags: emission projection, path scores, the
// log-space forward algorithm, negative log-likelihood with exact gradients
// (forward-backward marginals) and Viterbi decoding.

#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "nerkit/optim.hpp"
#include "nerkit/tensor.hpp"

namespace nerkit {

using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class TagSet {
 public:
  TagSet() = default;
  // "O" first, then B-X, I-X for each class in class_order().
  static TagSet from_classes(const std::set<std::string>& classes);
  explicit TagSet(std::vector<std::string> tags);

  std::size_t size() const { return tags_.size(); }
  const std::string& tag(int i) const { return tags_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& tags() const { return tags_; }
  // Throws DataError for tags outside the set.
  int index(const std::string& tag) const;
  bool contains(const std::string& tag) const { return ids_.contains(tag); }
  std::vector<std::string> classes() const;

  std::vector<int> encode(const std::vector<std::string>& labels) const;
  std::vector<std::string> decode(std::span<const int> path) const;

  bool operator==(const TagSet& o) const { return tags_ == o.tags_; }

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, int> ids_;
};

struct CrfParams {
  Tensor proj_w;       // [d x T]
  Tensor proj_b;       // [1 x T]
  Tensor transitions;  // [T x T], from row to column
  Tensor start;        // [1 x T]
  Tensor end;          // [1 x T]

  Index num_tags() const { return transitions.rows(); }
};

CrfParams make_crf(Index dim, Index num_tags, Rng& rng);
void append_parameters(const CrfParams& p, ParameterList& out);

// Plain-value view of the structural scores.
struct CrfScores {
  Matrix transitions;
  RowVector start;
  RowVector end;

  Index num_tags() const { return transitions.rows(); }
};
CrfScores scores_of(const CrfParams& p);

// Which transitions a decoder may use.
struct TransitionConstraints {
  BoolMatrix allowed;  // [T x T]
  std::vector<bool> start_allowed;
  std::vector<bool> end_allowed;
};

TransitionConstraints unconstrained(Index num_tags);
// Forbids start -> I-X, O -> I-X and {B,I}-X -> I-Y for X != Y.
TransitionConstraints iob2_constraints(const TagSet& tags);

// [l x T] affine projection of the word representations.
Tensor emissions(const Tensor& word_reprs, const CrfParams& p);

double sequence_score(const Matrix& emissions, std::span<const int> labels, const CrfScores& s);
// log Z by the forward recursion. With constraints, illegal transitions are
// excluded from Z.
double forward_log_partition(const Matrix& emissions, const CrfScores& s,
                             const TransitionConstraints* constraints = nullptr);

// log Z - score(labels); gradients flow to emissions and the CRF scores.
Tensor crf_nll(const Tensor& emissions, std::span<const int> labels, const CrfParams& p,
               const TransitionConstraints* constraints = nullptr);

struct ViterbiResult {
  std::vector<int> path;
  double score = 0.0;
};

// Highest-scoring path. Ties go to the lower tag index. Throws NumericError
// when the constraints leave no legal path.
ViterbiResult viterbi(const Matrix& emissions, const CrfScores& s,
                      const TransitionConstraints* constraints = nullptr);

}  // namespace nerkit

#endif  // NERKIT_CRF_HPP
