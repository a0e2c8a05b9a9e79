#include "nerkit/gradient_suite.hpp"

#include <algorithm>
#include <functional>

#include "nerkit/crf.hpp"
#include "nerkit/encoder.hpp"
#include "nerkit/optim.hpp"
#include "nerkit/rng.hpp"
#include "nerkit/span_head.hpp"

namespace nerkit {

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

Tensor param(Index r, Index c, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor::parameter(random_matrix(r, c, rng, lo, hi));
}

struct Case {
  std::string name;
  std::string group;
  // Builds parameters and a loss closure for one random point.
  std::function<std::pair<std::vector<Tensor>, std::function<Tensor()>>(Rng&)> setup;
};

using Setup = std::pair<std::vector<Tensor>, std::function<Tensor()>>;

template <typename Op>
Case unary(std::string name, Op op, double lo = -1.0, double hi = 1.0) {
  return {name, "op", [op, lo, hi](Rng& rng) -> Setup {
            Tensor a = param(3, 4, rng, lo, hi);
            const Tensor r = Tensor::input(random_matrix(3, 4, rng));
            return {{a}, [=] { return sum(mul(op(a), r)); }};
          }};
}

template <typename Op>
Case binary(std::string name, Op op) {
  return {name, "op", [op](Rng& rng) -> Setup {
            Tensor a = param(3, 4, rng);
            Tensor b = param(3, 4, rng);
            const Tensor r = Tensor::input(random_matrix(3, 4, rng));
            return {{a, b}, [=] { return sum(mul(op(a, b), r)); }};
          }};
}

std::vector<Case> op_cases() {
  std::vector<Case> cases;
  cases.push_back({"matmul", "op", [](Rng& rng) -> Setup {
                     Tensor a = param(3, 4, rng);
                     Tensor b = param(4, 2, rng);
                     const Tensor r = Tensor::input(random_matrix(3, 2, rng));
                     return {{a, b}, [=] { return sum(mul(matmul(a, b), r)); }};
                   }});
  cases.push_back(binary("add", [](const Tensor& a, const Tensor& b) { return add(a, b); }));
  cases.push_back(binary("sub", [](const Tensor& a, const Tensor& b) { return sub(a, b); }));
  cases.push_back(binary("mul", [](const Tensor& a, const Tensor& b) { return mul(a, b); }));
  cases.push_back({"add_row", "op", [](Rng& rng) -> Setup {
                     Tensor a = param(3, 4, rng);
                     Tensor b = param(1, 4, rng);
                     const Tensor r = Tensor::input(random_matrix(3, 4, rng));
                     return {{a, b}, [=] { return sum(mul(add_row(a, b), r)); }};
                   }});
  cases.push_back(unary("scale", [](const Tensor& a) { return scale(a, 2.5); }));
  cases.push_back(unary("neg", [](const Tensor& a) { return neg(a); }));
  cases.push_back(unary("tanh", [](const Tensor& a) { return tanh(a); }, -2.0, 2.0));
  cases.push_back(unary("exp", [](const Tensor& a) { return exp(a); }));
  cases.push_back(unary("log", [](const Tensor& a) { return log(a); }, 0.5, 2.0));
  cases.push_back({"transpose", "op", [](Rng& rng) -> Setup {
                     Tensor a = param(3, 4, rng);
                     const Tensor r = Tensor::input(random_matrix(4, 3, rng));
                     return {{a}, [=] { return sum(mul(transpose(a), r)); }};
                   }});
  for (bool use_mean : {false, true}) {
    cases.push_back({use_mean ? "mean" : "sum", "op", [use_mean](Rng& rng) -> Setup {
                       Tensor a = param(3, 4, rng);
                       return {{a}, [=] { return tanh(use_mean ? mean(a) : sum(a)); }};
                     }});
  }
  cases.push_back({"concat_rows", "op", [](Rng& rng) -> Setup {
                     Tensor a = param(2, 3, rng);
                     Tensor b = param(1, 3, rng);
                     const Tensor r = Tensor::input(random_matrix(3, 3, rng));
                     return {{a, b}, [=] {
                               const Tensor parts[] = {a, b};
                               return sum(mul(concat_rows(parts), r));
                             }};
                   }});
  cases.push_back({"concat_cols", "op", [](Rng& rng) -> Setup {
                     Tensor a = param(3, 2, rng);
                     Tensor b = param(3, 1, rng);
                     const Tensor r = Tensor::input(random_matrix(3, 3, rng));
                     return {{a, b}, [=] {
                               const Tensor parts[] = {a, b};
                               return sum(mul(concat_cols(parts), r));
                             }};
                   }});
  cases.push_back({"slice_rows", "op", [](Rng& rng) -> Setup {
                     Tensor a = param(4, 3, rng);
                     const Tensor r = Tensor::input(random_matrix(2, 3, rng));
                     return {{a}, [=] { return sum(mul(slice_rows(a, 1, 2), r)); }};
                   }});
  cases.push_back({"gather_rows", "op", [](Rng& rng) -> Setup {
                     Tensor a = param(5, 3, rng);
                     const Tensor r = Tensor::input(random_matrix(4, 3, rng));
                     return {{a}, [=] {
                               const int ids[] = {0, 3, 3, 1};
                               return sum(mul(gather_rows(a, ids), r));
                             }};
                   }});
  cases.push_back({"masked_softmax", "op", [](Rng& rng) -> Setup {
                     Tensor a = param(2, 4, rng, -2.0, 2.0);
                     const Tensor r = Tensor::input(random_matrix(2, 4, rng));
                     return {{a}, [=] {
                               return sum(mul(masked_softmax(a, {true, false, true, true}), r));
                             }};
                   }});
  for (int axis : {0, 1}) {
    cases.push_back({"log_sum_exp(axis=" + std::to_string(axis) + ")", "op",
                     [axis](Rng& rng) -> Setup {
                       Tensor a = param(3, 4, rng, -2.0, 2.0);
                       const Index rows = axis == 0 ? 1 : 3;
                       const Index cols = axis == 0 ? 4 : 1;
                       const Tensor r = Tensor::input(random_matrix(rows, cols, rng));
                       return {{a}, [=] { return sum(mul(log_sum_exp(a, axis), r)); }};
                     }});
  }
  return cases;
}

Case attention_case() {
  return {"attention_pool", "attention_pool", [](Rng& rng) -> Setup {
            Tensor h = param(4, 3, rng);
            PoolingParams pool{param(3, 1, rng), param(4, 4, rng)};
            const Tensor r = Tensor::input(random_matrix(1, 3, rng));
            return {{h, pool.w_a, pool.w_alpha}, [=] {
                      return sum(mul(attention_pool(h, {true, true, true, false}, pool), r));
                    }};
          }};
}

std::vector<Case> span_cases() {
  std::vector<Case> cases;
  for (double gamma : {0.0, 0.5, 2.0}) {
    cases.push_back({"focal_loss(gamma=" + std::to_string(gamma).substr(0, 3) + ")", "span_loss",
                     [gamma](Rng& rng) -> Setup {
                       Tensor z = param(6, 2, rng, -3.0, 3.0);
                       FocalConfig cfg{gamma, {0.4, 0.6}};
                       return {{z}, [=] {
                                 const int labels[] = {0, 1, 1, 0, 1, 0};
                                 return focal_loss_from_logits(z, labels, cfg);
                               }};
                     }});
  }
  cases.push_back({"span_loss", "span_loss", [](Rng& rng) -> Setup {
                     Tensor reprs = param(5, 3, rng);
                     SpanHeadParams head{{param(3, 1, rng), param(3, 3, rng)},
                                         param(3, 4, rng),
                                         param(1, 4, rng),
                                         param(4, 2, rng),
                                         param(1, 2, rng)};
                     const std::vector<Span> gold = {{0, 1, "PER"}, {3, 3, "LOC"}};
                     const FocalConfig cfg{0.5, {0.3, 0.7}};
                     ParameterList named;
                     append_parameters(head, named);
                     std::vector<Tensor> ps = tensors_of(named);
                     ps.insert(ps.begin(), reprs);
                     return {ps, [=] { return span_loss(reprs, gold, head, cfg); }};
                   }});
  return cases;
}

Case crf_encoder_case() {
  return {"crf_nll+span_loss through encoder", "crf_encoder", [](Rng& rng) -> Setup {
            Corpus c;
            c.sentences.push_back({"0",
                                   {{"Anna", "B-PER"}, {"lives", "O"}, {"in", "O"},
                                    {"Oslo", "B-LOC"}, {"city", "I-LOC"}}});
            c.refresh_classes();
            const SubwordVocab vocab = build_subword_vocab(c, 24);
            const TagSet tags = TagSet::from_classes(c.label_classes);
            EncoderParams enc = make_encoder(vocab.size(), {4, 1, 4}, rng);
            SpanHeadParams head = make_span_head(4, 3, 3, rng);
            CrfParams crf = make_crf(4, static_cast<Index>(tags.size()), rng);
            ParameterList named;
            append_parameters(enc, named);
            append_parameters(head, named);
            append_parameters(crf, named);
            std::vector<Tensor> ps = tensors_of(named);
            for (auto& p : ps) p.value_mut() = random_matrix(p.rows(), p.cols(), rng);
            const auto words = c.sentences[0].surfaces();
            const auto labels = tags.encode(c.sentences[0].labels());
            const auto gold = spans_from_labels(c.sentences[0].labels());
            const FocalConfig cfg{0.5, {0.25, 0.75}};
            return {ps, [=] {
                      const Tensor reprs = encode_words(words, enc, vocab);
                      return crf_nll(emissions(reprs, crf), labels, crf) +
                             span_loss(reprs, gold, head, cfg);
                    }};
          }};
}

}  // namespace

std::vector<GradientCheck> run_gradient_suite(std::uint64_t seed, std::size_t points) {
  std::vector<Case> cases = op_cases();
  cases.push_back(attention_case());
  for (auto& c : span_cases()) cases.push_back(std::move(c));
  cases.push_back(crf_encoder_case());

  std::vector<GradientCheck> out;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    GradientCheck check{cases[k].name, cases[k].group};
    for (std::size_t p = 0; p < points; ++p) {
      Rng rng(seed * 1000003ULL + k * 7919ULL + p);
      auto [params, f] = cases[k].setup(rng);
      const FiniteDiffResult r = finite_diff_check(f, params);
      check.max_rel_error = std::max(check.max_rel_error, r.max_rel_error);
      check.coordinates += r.checked;
      ++check.points;
    }
    out.push_back(std::move(check));
  }
  return out;
}

}  // namespace nerkit
