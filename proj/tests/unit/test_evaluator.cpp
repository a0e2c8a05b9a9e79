#include <doctest.h>

#include <numeric>
#include <sstream>

#include "nerkit/error.hpp"
#include "nerkit/evaluator.hpp"
#include "nerkit/rng.hpp"

using namespace nerkit;

namespace {

Corpus corpus(std::vector<std::vector<std::string>> label_rows) {
  Corpus c;
  for (std::size_t s = 0; s < label_rows.size(); ++s) {
    Sentence sent{std::to_string(s), {}};
    for (std::size_t i = 0; i < label_rows[s].size(); ++i)
      sent.rows.push_back({"w" + std::to_string(i), label_rows[s][i]});
    c.sentences.push_back(std::move(sent));
  }
  c.refresh_classes();
  return c;
}

std::vector<std::string> random_labels(Rng& rng, std::size_t n) {
  static const std::vector<std::string> classes = {"PER", "LOC", "CORP"};
  std::vector<std::string> y;
  std::string open;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = rng.below(4);
    if (r < 2) {
      y.push_back("O");
      open.clear();
    } else if (r == 2 || open.empty()) {
      open = classes[rng.below(3)];
      y.push_back("B-" + open);
    } else {
      y.push_back("I-" + open);
    }
  }
  return y;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("evaluator") {

TEST_CASE("prf arithmetic") {
  CHECK(Prf::from_counts(0, 0, 0).f1 == 0.0);
  const Prf p = Prf::from_counts(1, 1, 0);
  CHECK(p.precision == 0.5);
  CHECK(p.recall == 1.0);
  CHECK(p.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(Prf::from(0.0, 0.0).f1 == 0.0);
}

TEST_CASE("one extra prediction") {
  const Corpus gold = corpus({{"O", "B-PER", "I-PER", "O"}});
  const Corpus pred = corpus({{"O", "B-PER", "I-PER", "B-LOC"}});
  const EvalReport r = score(gold, pred);
  CHECK(r.micro.precision == 0.5);
  CHECK(r.micro.recall == 1.0);
  CHECK(r.micro.f1 == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(r.tp == 1);
  CHECK(r.fp == 1);
  CHECK(r.fn == 0);
}

TEST_CASE("identical corpora score perfectly") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::string>> rows;
    for (int s = 0; s < 5; ++s) rows.push_back(random_labels(rng, 1 + rng.below(8)));
    const Corpus c = corpus(rows);
    const EvalReport r = score(c, c);
    REQUIRE(r.micro == Prf{1.0, 1.0, 1.0});
    REQUIRE(r.macro == Prf{1.0, 1.0, 1.0});
    REQUIRE(r.fp == 0);
    REQUIRE(r.fn == 0);
  }
}

TEST_CASE("wrong class is a false positive and a false negative") {
  const EvalReport r = score(corpus({{"B-PER", "I-PER"}}), corpus({{"B-LOC", "I-LOC"}}));
  CHECK(r.tp == 0);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
  REQUIRE(r.classes.size() == 2);
  CHECK(r.classes[0].cls == "LOC");
  CHECK(r.classes[0].fp == 1);
  CHECK(r.classes[1].cls == "PER");
  CHECK(r.classes[1].fn == 1);
}

TEST_CASE("boundary mismatch counts against both sides") {
  const EvalReport r = score(corpus({{"B-PER", "I-PER", "O"}}), corpus({{"B-PER", "O", "O"}}));
  CHECK(r.tp == 0);
  CHECK(r.fp == 1);
  CHECK(r.fn == 1);
}

TEST_CASE("mismatched corpora are rejected") {
  CHECK_THROWS_AS(score(corpus({{"O"}}), corpus({{"O"}, {"O"}})), DataError);
  CHECK_THROWS_AS(score(corpus({{"O", "O"}}), corpus({{"O"}})), DataError);
  Corpus other = corpus({{"O"}});
  other.sentences[0].rows[0].surface = "different";
  CHECK_THROWS_AS(score(corpus({{"O"}}), other), DataError);
}

TEST_CASE("swapping sides swaps precision and recall") {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<std::string>> g, p;
    for (int s = 0; s < 4; ++s) {
      const auto n = 1 + rng.below(8);
      g.push_back(random_labels(rng, n));
      p.push_back(random_labels(rng, n));
    }
    const EvalReport a = score(corpus(g), corpus(p));
    const EvalReport b = score(corpus(p), corpus(g));
    REQUIRE(a.micro.precision == b.micro.recall);
    REQUIRE(a.micro.recall == b.micro.precision);
    REQUIRE(std::abs(a.micro.f1 - b.micro.f1) < 1e-15);
  }
}

TEST_CASE("micro F1 is invariant to sentence order") {
  Rng rng(3);
  std::vector<std::vector<std::string>> g, p;
  for (int s = 0; s < 12; ++s) {
    const auto n = 1 + rng.below(8);
    g.push_back(random_labels(rng, n));
    p.push_back(random_labels(rng, n));
  }
  const EvalReport a = score(corpus(g), corpus(p));
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<std::string>> g2, p2;
  for (auto i : order) {
    g2.push_back(g[i]);
    p2.push_back(p[i]);
  }
  CHECK(score(corpus(g2), corpus(p2)).micro == a.micro);
}

TEST_CASE("macro excludes absent classes unless asked") {
  const Corpus gold = corpus({{"B-PER", "O"}});
  const Corpus pred = corpus({{"B-PER", "O"}});
  ScoreOptions opts;
  opts.classes = {"PER", "LOC"};
  const EvalReport excluded = score(gold, pred, opts);
  CHECK(excluded.classes.size() == 2);
  CHECK(excluded.macro_classes == 1);
  CHECK(excluded.macro.f1 == 1.0);
  opts.macro_absent_as_zero = true;
  const EvalReport zero = score(gold, pred, opts);
  CHECK(zero.macro_classes == 2);
  CHECK(zero.macro.f1 == 0.5);
}

TEST_CASE("macro averages per-class F1") {
  const Corpus gold = corpus({{"B-PER", "O", "B-LOC", "B-LOC"}});
  const Corpus pred = corpus({{"B-PER", "O", "B-LOC", "O"}});
  const EvalReport r = score(gold, pred);
  // PER: 1.0; LOC: P 1, R 0.5, F1 2/3
  CHECK(r.macro.f1 == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
}

TEST_CASE("text rendering has class rows then micro and macro") {
  const Corpus gold = corpus({{"B-PER", "B-LOC", "B-PROD", "B-GRP", "B-CW", "B-CORP"}});
  const EvalReport r = score(gold, gold);
  const std::string text = r.to_text();
  CHECK(count_lines(text) == 1 + 6 + 2);
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> first;
  while (std::getline(in, line)) first.push_back(line.substr(0, line.find(' ')));
  CHECK(first == std::vector<std::string>{"class", "LOC", "PER", "PROD", "GRP", "CW", "CORP",
                                          "micro", "macro"});
  CHECK(text.find("100.00") != std::string::npos);
}

TEST_CASE("structured report round trips") {
  const Corpus gold = corpus({{"B-PER", "I-PER", "O", "B-LOC"}, {"B-CW", "O"}});
  const Corpus pred = corpus({{"B-PER", "O", "O", "B-LOC"}, {"B-CW", "B-PER"}});
  const EvalReport r = score(gold, pred);
  CHECK(EvalReport::from_structured(r.to_structured()) == r);
  CHECK_THROWS_AS(EvalReport::from_structured("[]"), DataError);
}

TEST_CASE("published per-class values render in the table shape") {
  const EvalReport multi = report_from_class_prf({{"LOC", {0.7224, 0.8141, 0.7601}},
                                                  {"PER", {0.8520, 0.8140, 0.8313}},
                                                  {"PROD", {0.7054, 0.7024, 0.7000}},
                                                  {"GRP", {0.6978, 0.636, 0.6626}},
                                                  {"CW", {0.6758, 0.6874, 0.6795}},
                                                  {"CORP", {0.7391, 0.6968, 0.7160}}});
  const std::string text = multi.to_text();
  CHECK(count_lines(text) == 9);
  CHECK(text.find("83.13") != std::string::npos);
  CHECK(text.find("63.60") != std::string::npos);

  const EvalReport mixed = report_from_class_prf({{"LOC", {0.8037, 0.8304, 0.8168}},
                                                  {"PER", {0.8802, 0.8867, 0.8835}},
                                                  {"PROD", {0.8268, 0.8051, 0.8158}},
                                                  {"GRP", {0.7085, 0.7302, 0.7192}},
                                                  {"CW", {0.7500, 0.7427, 0.7463}},
                                                  {"CORP", {0.7936, 0.7499, 0.7711}}});
  const std::string mtext = mixed.to_text();
  std::istringstream in(mtext);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("PER", 0) == 0) CHECK(line.find("88.35") != std::string::npos);
  }
  CHECK(EvalReport::from_structured(mixed.to_structured()) == mixed);
}

TEST_CASE("ablation report") {
  const std::vector<AblationRow> rows = {{"CRF", {0.6859, 0.6930, 0.6800}, {}},
                                         {"+ span classification", {0.7071, 0.7056, 0.7025}, {}},
                                         {"+ self-training", {0.7321, 0.7251, 0.7249}, {}}};
  const std::string text = render_ablation_text(rows);
  CHECK(count_lines(text) == 4);
  CHECK(text.find("72.49") != std::string::npos);
  CHECK(parse_ablation_structured(render_ablation_structured(rows)) == rows);
}

}  // TEST_SUITE
