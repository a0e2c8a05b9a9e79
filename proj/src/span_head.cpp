#include "nerkit/span_head.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "nerkit/error.hpp"

namespace nerkit {

namespace {

std::atomic<std::uint64_t> g_span_evaluations{0};

constexpr double kMinProb = 1e-12;

}  // namespace

void FocalConfig::validate() const {
  if (!(gamma >= 0.0)) throw DataError("focal gamma must be >= 0");
  if (!(alpha[0] > 0.0) || !(alpha[1] > 0.0)) throw DataError("focal alpha weights must be > 0");
}

double focal_loss(int y, std::array<double, 2> p_hat, const FocalConfig& cfg) {
  const double p = std::max(p_hat[static_cast<std::size_t>(y)], kMinProb);
  return -cfg.alpha[static_cast<std::size_t>(y)] * std::pow(1.0 - p, cfg.gamma) * std::log(p);
}

Tensor focal_loss_from_logits(const Tensor& logits, std::span<const int> labels,
                              const FocalConfig& cfg) {
  if (logits.cols() != 2 || logits.rows() != static_cast<Index>(labels.size()) ||
      labels.empty()) {
    throw ShapeError("focal_loss: logits " + shape_string(logits.value()) + " for " +
                     std::to_string(labels.size()) + " labels");
  }
  const Index n = logits.rows();
  // Per row: dL/dz_j = -alpha_y * (q^g - g q^(g-1) p log p) * (delta_jy - p_j), q = 1 - p_y.
  Matrix dz(n, 2);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    const double z0 = logits.value()(i, 0);
    const double z1 = logits.value()(i, 1);
    const double mx = std::max(z0, z1);
    const double lse = mx + std::log(std::exp(z0 - mx) + std::exp(z1 - mx));
    const double logp_y = (y == 1 ? z1 : z0) - lse;
    const double logp_o = (y == 1 ? z0 : z1) - lse;
    const double p = std::exp(logp_y);
    const double q = std::exp(logp_o);
    const double a = cfg.alpha[static_cast<std::size_t>(y)];
    const double qg = std::pow(q, cfg.gamma);
    total += -a * qg * logp_y;

    const double singular =
        (cfg.gamma == 0.0 || q == 0.0) ? 0.0 : cfg.gamma * std::pow(q, cfg.gamma - 1.0) * logp_y * p;
    const double g = -a * (qg - singular);
    // delta_jy - p_j is q for j == y and -q otherwise.
    dz(i, y) = g * q;
    dz(i, 1 - y) = -g * q;
  }
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(n);
  dz /= static_cast<double>(n);
  return make_derived(
      std::move(out), {logits},
      [dz = std::move(dz)](const Node& self, std::span<Matrix* const> grads) {
        if (grads[0]) *grads[0] += self.grad(0, 0) * dz;
      },
      "focal_loss");
}

SpanHeadParams make_span_head(Index dim, Index hidden, Index max_width, Rng& rng) {
  SpanHeadParams p;
  p.pool = make_pooling(dim, max_width, rng);
  p.w1 = Tensor::parameter(xavier_uniform(dim, hidden, rng));
  p.b1 = Tensor::parameter(Matrix::Zero(1, hidden));
  p.w2 = Tensor::parameter(xavier_uniform(hidden, 2, rng));
  p.b2 = Tensor::parameter(Matrix::Zero(1, 2));
  return p;
}

void append_parameters(const SpanHeadParams& p, ParameterList& out) {
  append_parameters(p.pool, "span.pool", out);
  out.push_back({"span.w1", p.w1});
  out.push_back({"span.b1", p.b1});
  out.push_back({"span.w2", p.w2});
  out.push_back({"span.b2", p.b2});
}

Tensor span_representation(const Tensor& word_reprs, const Span& span, const SpanHeadParams& p) {
  if (span.start > span.end || static_cast<Index>(span.end) >= word_reprs.rows()) {
    throw ShapeError("span (" + std::to_string(span.start) + "," + std::to_string(span.end) +
                     ") outside " + shape_string(word_reprs.value()));
  }
  const Index width = static_cast<Index>(span.width());
  const Index k = p.max_width();
  if (width > k) {
    throw ShapeError("span width " + std::to_string(width) + " exceeds maximum " +
                     std::to_string(k));
  }
  g_span_evaluations.fetch_add(1, std::memory_order_relaxed);

  Tensor rows = slice_rows(word_reprs, static_cast<Index>(span.start), width);
  if (width < k) {
    const Tensor parts[] = {rows, Tensor::input(Matrix::Zero(k - width, word_reprs.cols()))};
    rows = concat_rows(parts);
  }
  std::vector<bool> mask(static_cast<std::size_t>(k), false);
  std::fill_n(mask.begin(), width, true);
  return attention_pool(rows, mask, p.pool);
}

Tensor span_logits(const Tensor& word_reprs, std::span<const Span> spans, const SpanHeadParams& p) {
  std::vector<Tensor> reprs;
  reprs.reserve(spans.size());
  for (const auto& s : spans) reprs.push_back(span_representation(word_reprs, s, p));
  const Tensor h = tanh(add_row(matmul(concat_rows(reprs), p.w1), p.b1));
  return add_row(matmul(h, p.w2), p.b2);
}

Tensor span_loss(const Tensor& word_reprs, const std::vector<Span>& gold, const SpanHeadParams& p,
                 const FocalConfig& cfg, const SpanLossOptions& options) {
  const auto candidates = enumerate_spans(static_cast<std::size_t>(word_reprs.rows()),
                                          static_cast<std::size_t>(p.max_width()), gold);
  std::vector<Span> spans;
  std::vector<int> labels;
  spans.reserve(candidates.size());
  labels.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (c.label == 0 && options.negative_keep < 1.0) {
      if (!options.rng) throw Error("span_loss: negative downsampling needs an rng");
      if (!options.rng->bernoulli(options.negative_keep)) continue;
    }
    spans.push_back(c.span);
    labels.push_back(c.label);
  }
  if (spans.empty()) return Tensor::scalar(0.0);
  return focal_loss_from_logits(span_logits(word_reprs, spans, p), labels, cfg);
}

std::uint64_t span_head_evaluations() {
  return g_span_evaluations.load(std::memory_order_relaxed);
}

}  // namespace nerkit
