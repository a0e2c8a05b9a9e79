#ifndef NERKIT_SPAN_HEAD_HPP
#define NERKIT_SPAN_HEAD_HPP

// Binary entity-span classifier trained with focal loss.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "nerkit/corpus.hpp"
#include "nerkit/encoder.hpp"
#include "nerkit/optim.hpp"
#include "nerkit/tensor.hpp"

namespace nerkit {

struct FocalConfig {
  double gamma = 0.5;
  std::array<double, 2> alpha = {1.0, 1.0};  // weight of label 0 / label 1

  void validate() const;
};

// -alpha_y * (1 - p_y)^gamma * log(p_y), with p_y clamped to >= 1e-12.
double focal_loss(int y, std::array<double, 2> p_hat, const FocalConfig& cfg);

// Mean focal loss of softmax(logits) rows against labels. logits is [n x 2].
Tensor focal_loss_from_logits(const Tensor& logits, std::span<const int> labels,
                              const FocalConfig& cfg);

struct SpanHeadParams {
  PoolingParams pool;  // capacity == maximum span width
  Tensor w1;           // [d x d_h]
  Tensor b1;           // [1 x d_h]
  Tensor w2;           // [d_h x 2]
  Tensor b2;           // [1 x 2]

  Index max_width() const { return pool.capacity(); }
};

SpanHeadParams make_span_head(Index dim, Index hidden, Index max_width, Rng& rng);
void append_parameters(const SpanHeadParams& p, ParameterList& out);

// Attention-pooled representation [1 x d] of word_reprs rows start..end.
Tensor span_representation(const Tensor& word_reprs, const Span& span, const SpanHeadParams& p);

// [n x 2] logits for the given spans.
Tensor span_logits(const Tensor& word_reprs, std::span<const Span> spans, const SpanHeadParams& p);

struct SpanLossOptions {
  // Keep each negative candidate with this probability; 1 keeps all.
  double negative_keep = 1.0;
  Rng* rng = nullptr;  // required when negative_keep < 1
};

// Mean focal loss over every candidate span of width <= max_width.
Tensor span_loss(const Tensor& word_reprs, const std::vector<Span>& gold, const SpanHeadParams& p,
                 const FocalConfig& cfg, const SpanLossOptions& options = {});

// Number of span representations computed so far in this process.
std::uint64_t span_head_evaluations();

}  // namespace nerkit

#endif  // NERKIT_SPAN_HEAD_HPP
