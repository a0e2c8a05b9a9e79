#include <doctest.h>

#include <cmath>

#include "nerkit/error.hpp"
#include "nerkit/gradient_suite.hpp"
#include "nerkit/span_head.hpp"
#include "oracles.hpp"

using namespace nerkit;

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng) {
  Matrix m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

Matrix mat(Index r, Index c, std::initializer_list<double> v) {
  Matrix m(r, c);
  Index i = 0;
  for (double x : v) m.data()[i++] = x;
  return m;
}

}  // namespace

TEST_SUITE("span_head") {

TEST_CASE("focal loss spot values") {
  FocalConfig cfg{0.5, {1.0, 1.0}};
  CHECK(focal_loss(1, {0.0, 1.0}, cfg) == 0.0);
  CHECK(focal_loss(1, {0.0, 1.0}, FocalConfig{3.0, {2.0, 2.0}}) == 0.0);

  const double half = focal_loss(1, {0.5, 0.5}, cfg);
  CHECK(half == doctest::Approx(oracle::focal(1, 0.5, 0.5, 1.0, 1.0)).epsilon(1e-15));
  CHECK(std::abs(half - 0.49013) < 5e-6);

  const double g2 = focal_loss(1, {0.1, 0.9}, FocalConfig{2.0, {1.0, 1.0}});
  CHECK(g2 == doctest::Approx(oracle::focal(1, 0.9, 2.0, 1.0, 1.0)).epsilon(1e-15));
  CHECK(std::abs(g2 - 0.0010536) < 5e-8);
}

TEST_CASE("zero probability is clamped") {
  const double v = focal_loss(1, {1.0, 0.0}, FocalConfig{0.0, {1.0, 1.0}});
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("gamma zero is cross-entropy") {
  Rng rng(1);
  const FocalConfig cfg{0.0, {1.0, 1.0}};
  for (int i = 0; i < 1000; ++i) {
    const int y = static_cast<int>(rng.below(2));
    const double p1 = rng.uniform(1e-6, 1.0);
    const double ce = -std::log(y == 1 ? p1 : 1.0 - p1);
    REQUIRE(std::abs(focal_loss(y, {1.0 - p1, p1}, cfg) - ce) < 1e-12);
  }
}

TEST_CASE("focal loss is non-negative, decreasing in p and non-increasing in gamma") {
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const int y = static_cast<int>(rng.below(2));
    const double a = rng.uniform(0.01, 0.99);
    const double b = rng.uniform(0.01, 0.99);
    const double g = rng.uniform(0.0, 4.0);
    const FocalConfig cfg{g, {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)}};
    auto at = [&](double py, const FocalConfig& c) {
      return focal_loss(y, y == 1 ? std::array{1.0 - py, py} : std::array{py, 1.0 - py}, c);
    };
    REQUIRE(at(a, cfg) >= 0.0);
    if (a < b) REQUIRE(at(a, cfg) > at(b, cfg));
    FocalConfig more = cfg;
    more.gamma = g + rng.uniform(0.0, 2.0);
    REQUIRE(at(a, more) <= at(a, cfg));
  }
}

TEST_CASE("focal config validation") {
  CHECK_THROWS_AS(FocalConfig({-0.1, {1.0, 1.0}}).validate(), DataError);
  CHECK_THROWS_AS(FocalConfig({0.5, {0.0, 1.0}}).validate(), DataError);
  CHECK_NOTHROW(FocalConfig({0.0, {0.1, 3.0}}).validate());
}

TEST_CASE("focal loss from logits matches the formula") {
  Rng rng(3);
  const Matrix z = random_matrix(6, 2, rng) * 4.0;
  const int labels[] = {0, 1, 1, 0, 1, 1};
  const FocalConfig cfg{1.5, {0.3, 0.7}};
  double expect = 0.0;
  for (Index i = 0; i < 6; ++i) {
    expect += oracle::focal(labels[i], oracle::softmax_p1(z(i, 0), z(i, 1)), 1.5, 0.3, 0.7);
  }
  CHECK(focal_loss_from_logits(Tensor::input(z), labels, cfg).item() ==
        doctest::Approx(expect / 6.0).epsilon(1e-13));
  CHECK_THROWS_AS(focal_loss_from_logits(Tensor::input(z), std::span(labels, 3), cfg), ShapeError);
}

TEST_CASE("saturated logits keep finite gradients") {
  Tensor z = Tensor::parameter(mat(2, 2, {-800.0, 800.0, 800.0, -800.0}));
  const int labels[] = {1, 1};
  backward(focal_loss_from_logits(z, labels, FocalConfig{0.5, {1.0, 1.0}}));
  CHECK(z.grad().allFinite());
}

TEST_CASE("span representation") {
  Rng rng(4);
  const SpanHeadParams p = make_span_head(3, 3, 4, rng);
  const Matrix h = random_matrix(5, 3, rng);
  CHECK(span_representation(Tensor::input(h), {2, 2, {}}, p).value() == h.row(2));

  Matrix same(4, 3);
  for (Index i = 0; i < 4; ++i) same.row(i) << 1.0, -2.0, 0.5;
  const Tensor r = span_representation(Tensor::input(same), {0, 3, {}}, p);
  CHECK((r.value() - same.row(0)).cwiseAbs().maxCoeff() < 1e-15);

  CHECK_THROWS_AS(span_representation(Tensor::input(h), {0, 4, {}}, p), ShapeError);
  CHECK_THROWS_AS(span_representation(Tensor::input(h), {4, 5, {}}, p), ShapeError);
}

TEST_CASE("span representation matches the pooling oracle") {
  Rng rng(5);
  const SpanHeadParams p = make_span_head(4, 4, 5, rng);
  const Matrix h = random_matrix(7, 4, rng);
  for (std::size_t s = 0; s < 7; ++s) {
    for (std::size_t e = s; e < std::min<std::size_t>(7, s + 5); ++e) {
      oracle::Grid rows(5, oracle::Vec(4, 0.0));
      std::vector<bool> mask(5, false);
      for (std::size_t i = s; i <= e; ++i) {
        rows[i - s] = oracle::row(h, static_cast<long>(i));
        mask[i - s] = true;
      }
      const auto ref = oracle::attention_pool(rows, mask, oracle::row(p.pool.w_a.value().transpose()),
                                              oracle::grid(p.pool.w_alpha.value()));
      const Tensor got = span_representation(Tensor::input(h), {s, e, {}}, p);
      for (Index j = 0; j < 4; ++j) REQUIRE(std::abs(got.value()(0, j) - ref[j]) < 1e-12);
    }
  }
}

TEST_CASE("span loss of a single candidate is its focal loss") {
  Rng rng(6);
  const SpanHeadParams p = make_span_head(3, 2, 1, rng);
  const Matrix h = random_matrix(1, 3, rng);
  const Tensor logits = span_logits(Tensor::input(h), std::vector<Span>{{0, 0, {}}}, p);
  const FocalConfig cfg{0.5, {0.4, 0.6}};
  const double expect =
      oracle::focal(1, oracle::softmax_p1(logits.value()(0, 0), logits.value()(0, 1)), 0.5, 0.4, 0.6);
  CHECK(span_loss(Tensor::input(h), {{0, 0, "PER"}}, p, cfg).item() ==
        doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("span loss over five hand-set candidates") {
  // d = d_h = 1, k_max = 1: each word is one candidate whose logits are
  // tanh(x) * w2 + b2.
  SpanHeadParams p{{Tensor::parameter(mat(1, 1, {0.3})), Tensor::parameter(mat(1, 1, {1.0}))},
                   Tensor::parameter(mat(1, 1, {1.0})),
                   Tensor::parameter(mat(1, 1, {0.0})),
                   Tensor::parameter(mat(1, 2, {-1.0, 2.0})),
                   Tensor::parameter(mat(1, 2, {0.5, -0.25}))};
  const Matrix x = mat(5, 1, {-2.0, -0.5, 0.0, 0.7, 3.0});
  const std::vector<Span> gold = {{1, 1, "LOC"}, {4, 4, "PER"}};
  const FocalConfig cfg{2.0, {0.25, 0.75}};
  double expect = 0.0;
  for (Index i = 0; i < 5; ++i) {
    const double t = std::tanh(x(i, 0));
    const int y = (i == 1 || i == 4) ? 1 : 0;
    expect += oracle::focal(y, oracle::softmax_p1(0.5 - t, -0.25 + 2.0 * t), 2.0, 0.25, 0.75);
  }
  CHECK(span_loss(Tensor::input(x), gold, p, cfg).item() ==
        doctest::Approx(expect / 5.0).epsilon(1e-13));
}

TEST_CASE("perfect classifier has zero span loss") {
  Rng rng(7);
  SpanHeadParams p = make_span_head(2, 2, 1, rng);
  p.w2.value_mut().setZero();
  p.b2.value_mut() = mat(1, 2, {-1000.0, 1000.0});
  CHECK(span_loss(Tensor::input(random_matrix(1, 2, rng)), {{0, 0, "X"}}, p, {}).item() == 0.0);
}

TEST_CASE("span head evaluations are counted") {
  Rng rng(8);
  const SpanHeadParams p = make_span_head(2, 2, 3, rng);
  const std::uint64_t before = span_head_evaluations();
  span_loss(Tensor::input(random_matrix(4, 2, rng)), {}, p, {});
  CHECK(span_head_evaluations() - before == candidate_count(4, 3));
}

TEST_CASE("negative downsampling keeps positives") {
  Rng rng(9);
  const SpanHeadParams p = make_span_head(2, 2, 2, rng);
  Rng keep(1);
  SpanLossOptions opts{0.0, &keep};
  const Matrix h = random_matrix(4, 2, rng);
  const Tensor only_pos = span_loss(Tensor::input(h), {{1, 2, "X"}}, p, {}, opts);
  const Tensor logits = span_logits(Tensor::input(h), std::vector<Span>{{1, 2, {}}}, p);
  CHECK(only_pos.item() ==
        doctest::Approx(oracle::focal(1, oracle::softmax_p1(logits.value()(0, 0), logits.value()(0, 1)),
                                      0.5, 1.0, 1.0)));
}

TEST_CASE("span loss gradients pass finite differences") {
  for (const auto& c : run_gradient_suite(13, 10)) {
    if (c.group != "span_loss") continue;
    INFO(c.name);
    CHECK(c.max_rel_error < 1e-4);
  }
}

}  // TEST_SUITE
