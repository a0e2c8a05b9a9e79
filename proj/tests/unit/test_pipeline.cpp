#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "nerkit/container.hpp"
#include "nerkit/error.hpp"
#include "nerkit/pipeline.hpp"
#include "nerkit/synth.hpp"

using namespace nerkit;

namespace {

TrainConfig small_config() {
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.max_span_width = 4;
  cfg.max_subwords = 6;
  cfg.vocab_size = 200;
  cfg.epochs = 3;
  cfg.learning_rate = 5e-3;
  return cfg;
}

Corpus synth(std::size_t n, std::uint64_t seed, const std::string& prefix = "s") {
  SynthConfig sc;
  sc.sentences = n;
  sc.seed = seed;
  sc.id_prefix = prefix;
  return synthesize(sc);
}

Matrix values_of(const Tensor& t) { return t.value(); }

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config defaults, preset and pairs") {
  const TrainConfig d;
  CHECK(d.batch_size == 16);
  CHECK(d.epochs == 20);
  CHECK(d.learning_rate == 1e-3);
  CHECK(d.focal_gamma == 0.5);
  CHECK(d.span_weight == 1.0);
  CHECK(d.max_span_width == 8);
  CHECK(d.max_subwords == 12);
  CHECK(d.dim == 32);
  CHECK(d.window == 1);
  CHECK(d.constrained_decode);
  CHECK(!d.constrained_train);
  CHECK(!d.confidence_threshold);
  CHECK(d.dev_fraction == 0.1);
  CHECK(TrainConfig::pretrained_encoder_preset().learning_rate == 1e-5);

  TrainConfig c = small_config();
  c.focal_alpha = std::array<double, 2>{0.25, 0.75};
  c.confidence_threshold = -0.125;
  c.learning_rate = 0.1 + 0.2;  // not exactly representable in short decimal
  CHECK(TrainConfig::from_pairs(c.to_pairs()) == c);
  CHECK_THROWS_AS(c.set("no_such_key", "1"), DataError);
  CHECK_THROWS_AS(c.set("epochs", "many"), DataError);
  CHECK_THROWS_AS(c.set("focal_alpha", "0.5"), DataError);
  c.set("confidence_threshold", "inf");
  CHECK(*c.confidence_threshold == std::numeric_limits<double>::infinity());
  c.set("constrained_decode", "false");
  CHECK(!c.constrained_decode);

  TrainConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = TrainConfig{};
  bad.span_weight = -1;
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("init_model") {
  const Corpus c = synth(20, 1);
  const TrainConfig cfg = small_config();
  const Model a = init_model(c.label_classes, c, cfg);
  const Model b = init_model(c.label_classes, c, cfg);
  CHECK(save_model(a) == save_model(b));
  CHECK(a.tags.size() == 13);
  CHECK(a.span_head.has_value());
  CHECK(!init_model(c.label_classes, c, cfg, false).span_head.has_value());

  TrainConfig other = cfg;
  other.seed = cfg.seed + 1;
  CHECK(save_model(init_model(c.label_classes, c, other)) != save_model(a));

  CHECK_THROWS_AS(init_model({"PER"}, Corpus{}, cfg), DataError);
}

TEST_CASE("parameter list is stable and complete") {
  const Corpus c = synth(10, 2);
  const Model m = init_model(c.label_classes, c, small_config());
  const ParameterList ps = m.parameters();
  CHECK(ps.front().name == "encoder.embeddings");
  CHECK(ps.back().name == "crf.end");
  std::set<std::string> names;
  for (const auto& p : ps) names.insert(p.name);
  CHECK(names.size() == ps.size());
  CHECK(names.contains("span.pool.w_alpha"));
  CHECK(m.crf.transitions.rows() == 13);
}

TEST_CASE("save and load round trip") {
  const Corpus c = synth(20, 3);
  TrainConfig cfg = small_config();
  cfg.epochs = 1;
  const Model m = train(init_model(c.label_classes, c, cfg), c, cfg).model;
  const std::string bytes = save_model(m);
  const Model back = load_model(bytes);
  CHECK(save_model(back) == bytes);
  CHECK(back.config == m.config);
  CHECK(back.tags == m.tags);
  CHECK(back.vocab == m.vocab);

  std::string flipped = bytes;
  flipped[bytes.size() / 2 + bytes.size() / 4] ^= 0x10;
  CHECK_THROWS_WITH_AS(load_model(flipped), doctest::Contains("checksum"), FormatError);
  std::string version = bytes;
  version[6] = 9;
  CHECK_THROWS_WITH_AS(load_model(version), doctest::Contains("version"), FormatError);
  CHECK_THROWS_AS(load_model(bytes.substr(0, bytes.size() - 8)), FormatError);

  const Model copy = m.clone();
  CHECK(save_model(copy) == bytes);
  copy.crf.transitions.node()->value(0, 0) += 1.0;
  CHECK(save_model(m) == bytes);
}

TEST_CASE("model file must match its own layout") {
  const Corpus c = synth(5, 4);
  const Model m = init_model(c.label_classes, c, small_config());
  Container k = decode_container(save_model(m));
  k.arrays.pop_back();
  CHECK_THROWS_AS(load_model(encode_container(k)), FormatError);
}

TEST_CASE("training with zero span weight leaves the span head untouched") {
  const Corpus c = synth(20, 5);
  TrainConfig cfg = small_config();
  cfg.span_weight = 0.0;
  const Model init = init_model(c.label_classes, c, cfg);
  const Matrix before = values_of(init.span_head->w1);
  const Matrix pool_before = values_of(init.span_head->pool.w_alpha);
  const Matrix crf_before = values_of(init.crf.transitions);
  const TrainResult r = train(init.clone(), c, cfg);
  CHECK(r.model.span_head->w1.value() == before);
  CHECK(r.model.span_head->pool.w_alpha.value() == pool_before);
  CHECK(r.model.crf.transitions.value() != crf_before);
  for (const auto& e : r.history.epochs) CHECK(e.span_loss == 0.0);
}

TEST_CASE("loss decreases on a single sentence") {
  Corpus one = synth(1, 6);
  TrainConfig cfg = small_config();
  cfg.epochs = 6;
  const TrainResult r = train(init_model(one.label_classes, one, cfg), one, cfg);
  REQUIRE(r.history.epochs.size() == 6);
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(r.history.epochs[i].total_loss < r.history.epochs[i - 1].total_loss);
  }
}

TEST_CASE("training is deterministic and the objective decomposes") {
  const Corpus c = synth(30, 7);
  TrainConfig cfg = small_config();
  cfg.span_weight = 0.7;
  const TrainResult a = train(init_model(c.label_classes, c, cfg), c, cfg);
  const TrainResult b = train(init_model(c.label_classes, c, cfg), c, cfg);
  CHECK(a.history == b.history);
  CHECK(save_model(a.model) == save_model(b.model));
  CHECK(a.history.to_jsonl() == b.history.to_jsonl());
  for (const auto& e : a.history.epochs) {
    CHECK(std::abs(e.total_loss - (e.crf_loss + 0.7 * e.span_loss)) < 1e-10);
    CHECK(e.dev_f1.has_value());
  }
  CHECK(TrainHistory::from_jsonl(a.history.to_jsonl()) == a.history);
  // alpha resolved from the training data is recorded in the model
  REQUIRE(a.model.config.focal_alpha.has_value());
  CHECK((*a.model.config.focal_alpha)[0] < (*a.model.config.focal_alpha)[1]);
}

TEST_CASE("unknown entity class is rejected before training") {
  const Corpus c = synth(10, 8);
  const TrainConfig cfg = small_config();
  const Model m = init_model({"PER"}, c, cfg);
  CHECK_THROWS_AS(train(m, c, cfg), DataError);

  TrainConfig wider = cfg;
  wider.dim = 16;
  CHECK_THROWS_AS(train(init_model(c.label_classes, c, cfg), c, wider), DataError);
}

TEST_CASE("best-epoch checkpoint") {
  const Corpus c = synth(30, 9);
  TrainConfig cfg = small_config();
  cfg.keep_best_epoch = true;
  cfg.epochs = 4;
  const TrainResult r = train(init_model(c.label_classes, c, cfg), c, cfg);
  CHECK(r.history.epochs.size() == 4);
}

TEST_CASE("prediction") {
  const Corpus c = synth(40, 10);
  const Corpus test = synth(15, 11, "t");
  TrainConfig cfg = small_config();
  const Model m = train(init_model(c.label_classes, c, cfg), c, cfg).model;
  const Corpus p1 = predict(m, strip_labels(test));
  const Corpus p2 = predict(m, strip_labels(test));
  CHECK(p1.sentences == p2.sentences);
  REQUIRE(p1.sentences.size() == test.sentences.size());
  for (std::size_t i = 0; i < test.sentences.size(); ++i) {
    CHECK(p1.sentences[i].surfaces() == test.sentences[i].surfaces());
    CHECK(p1.sentences[i].id == test.sentences[i].id);
    CHECK(validate_and_repair_iob(p1.sentences[i].labels()).violations.empty());
  }

  Model threaded = m.clone();
  threaded.config.threads = 3;
  CHECK(predict(threaded, test).sentences == p1.sentences);

  for (const auto& p : decode(m, test, true)) {
    CHECK(p.confidence <= 1e-12);
    CHECK(std::isfinite(p.confidence));
  }
}

TEST_CASE("self-training") {
  const Corpus d = synth(20, 12);
  const Corpus u = strip_labels(synth(30, 13, "u"));
  TrainConfig cfg = small_config();
  const SelfTrainResult r = self_train(d, u, cfg);
  CHECK(r.weak.sentences == predict(r.teacher, u).sentences);
  CHECK(r.stage2_span_evaluations == 0);
  CHECK(!r.model.span_head.has_value());
  CHECK(r.teacher.span_head.has_value());
  CHECK(r.model.config.seed == cfg.seed + 1);
  CHECK(r.model.config.span_weight == 0.0);
  CHECK(r.warnings.empty());
  for (const auto& s : r.weak.sentences) CHECK(is_valid_iob2(s.labels()));
  for (const auto& e : r.history.epochs) CHECK(e.span_loss == 0.0);
}

TEST_CASE("self-training with an infinite threshold trains stage 2 on the labeled data alone") {
  const Corpus d = synth(20, 14);
  const Corpus u = synth(10, 15, "u");
  TrainConfig cfg = small_config();
  cfg.dev_fraction = 0.0;
  cfg.confidence_threshold = std::numeric_limits<double>::infinity();
  const SelfTrainResult r = self_train(d, u, cfg);
  CHECK(r.weak.sentences.empty());

  TrainConfig retrain = cfg;
  retrain.seed = cfg.seed + 1;
  retrain.span_weight = 0.0;
  const TrainResult alone = train(init_model(d.label_classes, d, retrain, false), d, retrain);
  CHECK(save_model(r.model) == save_model(alone.model));
}

TEST_CASE("self-training threshold keeps confident sentences only") {
  const Corpus d = synth(20, 16);
  const Corpus u = synth(20, 17, "u");
  TrainConfig cfg = small_config();
  const SelfTrainResult all = self_train(d, u, cfg);
  const auto conf = decode(all.teacher, strip_labels(u), true);
  std::vector<double> cs;
  for (const auto& p : conf) cs.push_back(p.confidence);
  std::sort(cs.begin(), cs.end());
  cfg.confidence_threshold = cs[cs.size() / 2];
  const SelfTrainResult half = self_train(d, u, cfg);
  std::size_t expect = 0;
  for (double c : cs) expect += c >= cs[cs.size() / 2];
  CHECK(half.weak.sentences.size() == expect);
}

TEST_CASE("self-training with no unlabeled data warns") {
  const Corpus d = synth(10, 18);
  const SelfTrainResult r = self_train(d, Corpus{}, small_config());
  CHECK(r.weak.sentences.empty());
  CHECK(r.warnings.size() == 1);
}

TEST_CASE("synthetic corpus") {
  const Corpus a = synth(50, 19);
  CHECK(a.sentences.size() == 50);
  CHECK(a.label_classes == std::set<std::string>(synth_classes().begin(), synth_classes().end()));
  CHECK(synth(50, 19).sentences == a.sentences);
  CHECK(synth(50, 20).sentences != a.sentences);
  for (const auto& s : a.sentences) CHECK(is_valid_iob2(s.labels()));
  CHECK(parse_conll(write_conll(a)).sentences == a.sentences);
}

TEST_CASE("ablation rows") {
  const Corpus d = synth(15, 21);
  const Corpus u = strip_labels(synth(15, 22, "u"));
  const Corpus t = synth(10, 23, "t");
  TrainConfig cfg = small_config();
  cfg.epochs = 2;
  const auto rows = run_ablation(d, u, t, cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].system == "CRF");
  CHECK(rows[1].system == "+ span classification");
  CHECK(rows[2].system == "+ self-training");
  for (const auto& r : rows) {
    CHECK(r.micro.f1 >= 0.0);
    CHECK(r.micro.f1 <= 1.0);
  }
}

}  // TEST_SUITE
