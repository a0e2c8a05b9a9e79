#include "nerkit/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "nerkit/container.hpp"
#include "nerkit/error.hpp"

namespace nerkit {

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view key, std::string_view s) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw DataError("config " + std::string(key) + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view s) {
  Int v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw DataError("config " + std::string(key) + ": '" + std::string(s) +
                    "' is not an integer");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view s) {
  if (s == "true" || s == "1" || s == "on" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "off" || s == "no") return false;
  throw DataError("config " + std::string(key) + ": '" + std::string(s) + "' is not a boolean");
}

const char* bool_str(bool b) { return b ? "true" : "false"; }

struct PreparedSentence {
  std::vector<std::string> words;
  std::vector<int> tags;
  std::vector<Span> gold;
};

std::vector<PreparedSentence> prepare(const Corpus& data, const TagSet& tags) {
  std::vector<PreparedSentence> out;
  out.reserve(data.size());
  for (const auto& s : data.sentences) {
    const auto labels = s.labels();
    out.push_back({s.surfaces(), tags.encode(labels), spans_from_labels(labels)});
  }
  return out;
}

void log_line(const TrainOptions& options, const std::string& msg) {
  if (options.log) options.log(msg);
}

}  // namespace

TrainConfig TrainConfig::pretrained_encoder_preset() {
  TrainConfig c;
  c.learning_rate = 1e-5;
  c.batch_size = 16;
  c.epochs = 20;
  return c;
}

void TrainConfig::validate() const {
  const auto fail = [](const std::string& m) { throw DataError("invalid config: " + m); };
  if (dim < 1) fail("dim must be >= 1");
  if (window < 0) fail("window must be >= 0");
  if (max_span_width < 1) fail("max_span_width must be >= 1");
  if (max_subwords < 1) fail("max_subwords must be >= 1");
  if (vocab_size < 3) fail("vocab_size must be >= 3");
  if (span_hidden < 0) fail("span_hidden must be >= 0");
  if (!(span_weight >= 0.0)) fail("span_weight must be >= 0");
  if (!(learning_rate >= 0.0)) fail("learning_rate must be >= 0");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) fail("dev_fraction must be in [0, 1)");
  if (!(negative_keep > 0.0 && negative_keep <= 1.0)) fail("negative_keep must be in (0, 1]");
  if (threads < 1) fail("threads must be >= 1");
  FocalConfig{focal_gamma, focal_alpha.value_or(std::array<double, 2>{1.0, 1.0})}.validate();
}

std::vector<std::pair<std::string, std::string>> TrainConfig::to_pairs() const {
  return {
      {"seed", std::to_string(seed)},
      {"dim", std::to_string(dim)},
      {"window", std::to_string(window)},
      {"max_span_width", std::to_string(max_span_width)},
      {"max_subwords", std::to_string(max_subwords)},
      {"vocab_size", std::to_string(vocab_size)},
      {"span_hidden", std::to_string(span_hidden)},
      {"span_weight", fmt_double(span_weight)},
      {"focal_gamma", fmt_double(focal_gamma)},
      {"focal_alpha", focal_alpha ? fmt_double((*focal_alpha)[0]) + "," +
                                        fmt_double((*focal_alpha)[1])
                                  : std::string("auto")},
      {"negative_keep", fmt_double(negative_keep)},
      {"learning_rate", fmt_double(learning_rate)},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"constrained_decode", bool_str(constrained_decode)},
      {"constrained_train", bool_str(constrained_train)},
      {"confidence_threshold",
       confidence_threshold ? fmt_double(*confidence_threshold) : std::string("none")},
      {"dev_fraction", fmt_double(dev_fraction)},
      {"keep_best_epoch", bool_str(keep_best_epoch)},
  };
}

void TrainConfig::set(std::string_view key, std::string_view v) {
  if (key == "seed") {
    seed = parse_int<std::uint64_t>(key, v);
  } else if (key == "dim") {
    dim = parse_int<Index>(key, v);
  } else if (key == "window") {
    window = parse_int<Index>(key, v);
  } else if (key == "max_span_width") {
    max_span_width = parse_int<Index>(key, v);
  } else if (key == "max_subwords") {
    max_subwords = parse_int<Index>(key, v);
  } else if (key == "vocab_size") {
    vocab_size = parse_int<std::size_t>(key, v);
  } else if (key == "span_hidden") {
    span_hidden = parse_int<Index>(key, v);
  } else if (key == "span_weight") {
    span_weight = parse_double(key, v);
  } else if (key == "focal_gamma") {
    focal_gamma = parse_double(key, v);
  } else if (key == "focal_alpha") {
    if (v == "auto") {
      focal_alpha.reset();
    } else {
      const std::size_t comma = v.find(',');
      if (comma == std::string_view::npos) {
        throw DataError("config focal_alpha: expected 'auto' or 'a0,a1'");
      }
      focal_alpha = {parse_double(key, v.substr(0, comma)), parse_double(key, v.substr(comma + 1))};
    }
  } else if (key == "negative_keep") {
    negative_keep = parse_double(key, v);
  } else if (key == "learning_rate") {
    learning_rate = parse_double(key, v);
  } else if (key == "batch_size") {
    batch_size = parse_int<std::size_t>(key, v);
  } else if (key == "epochs") {
    epochs = parse_int<std::size_t>(key, v);
  } else if (key == "constrained_decode") {
    constrained_decode = parse_bool(key, v);
  } else if (key == "constrained_train") {
    constrained_train = parse_bool(key, v);
  } else if (key == "confidence_threshold") {
    if (v == "none") {
      confidence_threshold.reset();
    } else {
      confidence_threshold = parse_double(key, v);
    }
  } else if (key == "dev_fraction") {
    dev_fraction = parse_double(key, v);
  } else if (key == "keep_best_epoch") {
    keep_best_epoch = parse_bool(key, v);
  } else if (key == "threads") {
    threads = parse_int<std::size_t>(key, v);
  } else {
    throw DataError("unknown config key '" + std::string(key) + "'");
  }
}

TrainConfig TrainConfig::from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs) {
  TrainConfig c;
  for (const auto& [k, v] : pairs) c.set(k, v);
  return c;
}

ParameterList Model::parameters() const {
  ParameterList out;
  append_parameters(encoder, out);
  if (span_head) append_parameters(*span_head, out);
  append_parameters(crf, out);
  return out;
}

Model Model::clone() const {
  Model m = load_model(save_model(*this));
  m.config.threads = config.threads;
  return m;
}

Model init_model(const std::set<std::string>& classes, const Corpus& corpus,
                 const TrainConfig& cfg, bool with_span_head) {
  cfg.validate();
  if (corpus.empty()) throw DataError("cannot initialize a model from an empty corpus");
  Model m;
  m.config = cfg;
  m.vocab = build_subword_vocab(corpus, cfg.vocab_size);
  m.tags = TagSet::from_classes(classes);

  Rng rng(cfg.seed);
  m.encoder = make_encoder(m.vocab.size(), {cfg.dim, cfg.window, cfg.max_subwords}, rng);
  if (with_span_head) {
    m.span_head = make_span_head(cfg.dim, cfg.resolved_span_hidden(), cfg.max_span_width, rng);
  }
  m.crf = make_crf(cfg.dim, static_cast<Index>(m.tags.size()), rng);
  return m;
}

std::string TrainHistory::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    nlohmann::ordered_json j = {{"epoch", e.epoch},
                                {"crf_loss", e.crf_loss},
                                {"span_loss", e.span_loss},
                                {"total_loss", e.total_loss}};
    j["dev_f1"] = e.dev_f1 ? nlohmann::ordered_json(*e.dev_f1) : nlohmann::ordered_json(nullptr);
    out += j.dump() + "\n";
  }
  return out;
}

TrainHistory TrainHistory::from_jsonl(std::string_view text) {
  TrainHistory h;
  std::istringstream in{std::string(text)};
  std::string line;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      EpochRecord e;
      e.epoch = j.at("epoch").get<std::size_t>();
      e.crf_loss = j.at("crf_loss").get<double>();
      e.span_loss = j.at("span_loss").get<double>();
      e.total_loss = j.at("total_loss").get<double>();
      if (!j.at("dev_f1").is_null()) e.dev_f1 = j.at("dev_f1").get<double>();
      h.epochs.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad history: ") + e.what());
  }
  return h;
}

TrainResult train(Model model, const Corpus& data, const TrainConfig& cfg,
                  const TrainOptions& options) {
  cfg.validate();
  if (data.empty()) throw DataError("training corpus is empty");
  const TrainConfig& arch = model.config;
  if (arch.dim != cfg.dim || arch.window != cfg.window ||
      arch.max_span_width != cfg.max_span_width || arch.max_subwords != cfg.max_subwords ||
      arch.resolved_span_hidden() != cfg.resolved_span_hidden()) {
    throw DataError("training config does not match the model architecture");
  }
  for (const auto& s : data.sentences) {
    for (const auto& r : s.rows) {
      if (!model.tags.contains(r.label)) {
        throw DataError("sentence " + s.id + ": label " + r.label +
                        " is not in the model's tag set");
      }
    }
  }

  std::size_t n_dev = 0;
  if (!options.dev) {
    n_dev = static_cast<std::size_t>(std::floor(static_cast<double>(data.size()) * cfg.dev_fraction));
    if (n_dev >= data.size()) n_dev = 0;
  }
  Corpus train_part;
  Corpus dev_part;
  train_part.sentences.assign(data.sentences.begin(), data.sentences.end() - static_cast<long>(n_dev));
  dev_part.sentences.assign(data.sentences.end() - static_cast<long>(n_dev), data.sentences.end());
  train_part.refresh_classes();
  dev_part.refresh_classes();
  const Corpus& dev = options.dev ? *options.dev : dev_part;

  const auto prepared = prepare(train_part, model.tags);
  const bool use_span = model.span_head.has_value() && cfg.span_weight > 0.0;

  TrainConfig resolved = cfg;
  if (use_span && !resolved.focal_alpha) {
    std::size_t pos = 0;
    std::size_t total = 0;
    for (const auto& p : prepared) {
      for (const auto& c : enumerate_spans(p.words.size(),
                                           static_cast<std::size_t>(cfg.max_span_width), p.gold)) {
        pos += static_cast<std::size_t>(c.label);
        ++total;
      }
    }
    if (pos > 0 && pos < total) {
      const double t = static_cast<double>(total);
      resolved.focal_alpha = std::array<double, 2>{static_cast<double>(pos) / t,
                                                   static_cast<double>(total - pos) / t};
    } else {
      resolved.focal_alpha = std::array<double, 2>{1.0, 1.0};
    }
  }
  model.config = resolved;
  const FocalConfig focal{resolved.focal_gamma,
                          resolved.focal_alpha.value_or(std::array<double, 2>{1.0, 1.0})};

  const auto constraints = iob2_constraints(model.tags);
  const TransitionConstraints* train_constraints = cfg.constrained_train ? &constraints : nullptr;

  const ParameterList named = model.parameters();
  std::vector<Tensor> params = tensors_of(named);
  AdamState adam(AdamConfig{cfg.learning_rate}, params);
  Rng order_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  Rng sample_rng(cfg.seed + 0x51ED);
  SpanLossOptions span_opts{cfg.negative_keep, &sample_rng};

  TrainHistory history;
  std::optional<Model> best;
  double best_f1 = -1.0;
  std::vector<std::size_t> order(prepared.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(order);
    double crf_sum = 0.0;
    double span_sum = 0.0;
    double total_sum = 0.0;

    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_size);
      zero_grads(params);
      Tensor batch_loss;
      for (std::size_t k = b; k < e; ++k) {
        const PreparedSentence& s = prepared[order[k]];
        const Tensor reprs = encode_words(s.words, model.encoder, model.vocab);
        Tensor loss = crf_nll(emissions(reprs, model.crf), s.tags, model.crf, train_constraints);
        const double crf_value = loss.item();
        double span_value = 0.0;
        if (use_span) {
          const Tensor sl = span_loss(reprs, s.gold, *model.span_head, focal, span_opts);
          span_value = sl.item();
          loss = loss + scale(sl, cfg.span_weight);
        }
        crf_sum += crf_value;
        span_sum += span_value;
        total_sum += crf_value + cfg.span_weight * span_value;
        batch_loss = batch_loss.defined() ? batch_loss + loss : loss;
      }
      backward(scale(batch_loss, 1.0 / static_cast<double>(e - b)));
      adam_step(params, adam);
    }
    zero_grads(params);

    const double n = static_cast<double>(prepared.size());
    EpochRecord rec;
    rec.epoch = epoch;
    rec.crf_loss = crf_sum / n;
    rec.span_loss = span_sum / n;
    rec.total_loss = total_sum / n;
    if (!dev.empty()) {
      rec.dev_f1 = score(dev, predict(model, dev)).micro.f1;
      if (cfg.keep_best_epoch && *rec.dev_f1 > best_f1) {
        best_f1 = *rec.dev_f1;
        best = model.clone();
      }
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.epochs.push_back(rec);

    std::ostringstream msg;
    msg << "epoch " << epoch << "/" << cfg.epochs << " crf " << rec.crf_loss << " span "
        << rec.span_loss << " total " << rec.total_loss;
    if (rec.dev_f1) msg << " dev-F1 " << *rec.dev_f1;
    msg << " (" << rec.seconds << " s)";
    log_line(options, msg.str());
  }

  if (best) {
    log_line(options, "restoring best dev epoch (micro-F1 " + std::to_string(best_f1) + ")");
    best->config.threads = model.config.threads;
    model = std::move(*best);
  }
  return {std::move(model), std::move(history)};
}

std::vector<SentencePrediction> decode(const Model& model, const Corpus& corpus,
                                       bool with_confidence) {
  const CrfScores scores = scores_of(model.crf);
  const auto constraints = iob2_constraints(model.tags);
  const TransitionConstraints* c = model.config.constrained_decode ? &constraints : nullptr;

  std::vector<SentencePrediction> out(corpus.size());
  const auto work = [&](std::size_t i) {
    const Sentence& s = corpus.sentences[i];
    const Tensor reprs = encode_sentence(s, model.encoder, model.vocab);
    const Matrix e = emissions(reprs, model.crf).value();
    ViterbiResult v = viterbi(e, scores, c);
    SentencePrediction p;
    p.score = v.score;
    if (with_confidence) {
      p.confidence = (v.score - forward_log_partition(e, scores)) / static_cast<double>(s.size());
    }
    p.path = std::move(v.path);
    out[i] = std::move(p);
  };

  const std::size_t threads = std::min<std::size_t>(model.config.threads, corpus.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < corpus.size(); ++i) work(i);
    return out;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < corpus.size(); i += threads) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

Corpus predict(const Model& model, const Corpus& corpus) {
  const auto preds = decode(model, corpus);
  Corpus out;
  out.sentences.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Sentence s = corpus.sentences[i];
    const auto labels = model.tags.decode(preds[i].path);
    for (std::size_t k = 0; k < s.rows.size(); ++k) s.rows[k].label = labels[k];
    out.sentences.push_back(std::move(s));
  }
  out.refresh_classes();
  return out;
}

Corpus strip_labels(const Corpus& corpus) {
  Corpus out = corpus;
  for (auto& s : out.sentences) {
    for (auto& r : s.rows) r.label = "O";
  }
  out.label_classes.clear();
  return out;
}

SelfTrainResult self_train(const Corpus& labeled, const Corpus& unlabeled, const TrainConfig& cfg,
                           const TrainOptions& options) {
  SelfTrainResult res;
  // The dev split comes from the labeled data once, so both stages report
  // against the same gold sentences and no weak sentence is held out.
  TrainOptions opts = options;
  Corpus labeled_train = labeled;
  Corpus held_out;
  if (!opts.dev) {
    auto n_dev = static_cast<std::size_t>(
        std::floor(static_cast<double>(labeled.size()) * cfg.dev_fraction));
    if (n_dev >= labeled.size()) n_dev = 0;
    labeled_train.sentences.resize(labeled.size() - n_dev);
    held_out.sentences.assign(labeled.sentences.end() - static_cast<long>(n_dev),
                              labeled.sentences.end());
    labeled_train.refresh_classes();
    held_out.refresh_classes();
    opts.dev = &held_out;
  }
  log_line(opts, "self-training stage 1: teacher on " + std::to_string(labeled_train.size()) +
                     " labeled sentences");
  auto stage1 =
      train(init_model(labeled.label_classes, labeled_train, cfg, true), labeled_train, cfg, opts);
  res.teacher = std::move(stage1.model);
  res.teacher_history = std::move(stage1.history);

  const Corpus pool = strip_labels(unlabeled);
  if (pool.empty()) {
    res.warnings.push_back("unlabeled corpus is empty; stage 2 trains on the labeled data only");
    log_line(opts, "warning: " + res.warnings.back());
  } else {
    const auto preds = decode(res.teacher, pool, cfg.confidence_threshold.has_value());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (cfg.confidence_threshold && !(preds[i].confidence >= *cfg.confidence_threshold)) {
        continue;
      }
      Sentence s = pool.sentences[i];
      const auto labels = res.teacher.tags.decode(preds[i].path);
      for (std::size_t k = 0; k < s.rows.size(); ++k) s.rows[k].label = labels[k];
      res.weak.sentences.push_back(std::move(s));
    }
    res.weak.refresh_classes();
    log_line(opts, "weak corpus: kept " + std::to_string(res.weak.size()) + " of " +
                          std::to_string(pool.size()) + " unlabeled sentences");
  }

  TrainConfig retrain = cfg;
  retrain.seed = cfg.seed + 1;
  retrain.span_weight = 0.0;
  const Corpus combined = concat(labeled_train, res.weak);
  log_line(opts, "self-training stage 2: fresh model on " + std::to_string(combined.size()) +
                     " sentences, span head removed");
  const std::uint64_t before = span_head_evaluations();
  auto stage2 =
      train(init_model(labeled.label_classes, combined, retrain, false), combined, retrain, opts);
  res.stage2_span_evaluations = span_head_evaluations() - before;
  res.model = std::move(stage2.model);
  res.history = std::move(stage2.history);
  return res;
}

std::string save_model(const Model& model) {
  Container c;
  c.meta.emplace_back("model_format", std::to_string(kModelFormat));
  c.meta.emplace_back("span_head", model.span_head ? "1" : "0");
  for (const auto& [k, v] : model.config.to_pairs()) c.meta.emplace_back("config." + k, v);
  c.sections.emplace_back("tags", model.tags.tags());
  c.sections.emplace_back("vocab", model.vocab.to_lines());
  for (const auto& p : model.parameters()) c.arrays.push_back({p.name, p.tensor.value()});
  return encode_container(c);
}

Model load_model(std::string_view bytes) {
  const Container c = decode_container(bytes);
  const std::string* format = c.find_meta("model_format");
  if (!format || *format != std::to_string(kModelFormat)) {
    throw FormatError("unsupported model format " + (format ? *format : std::string("(none)")));
  }
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [k, v] : c.meta) {
    if (k.starts_with("config.")) pairs.emplace_back(k.substr(7), v);
  }
  const std::string* span = c.find_meta("span_head");
  const auto* tags = c.find_section("tags");
  const auto* vocab = c.find_section("vocab");
  if (!span || !tags || !vocab) throw FormatError("model container lacks required records");

  Model m;
  try {
    m.config = TrainConfig::from_pairs(pairs);
    m.tags = TagSet(*tags);
    m.vocab = SubwordVocab::from_lines(*vocab);
  } catch (const DataError& e) {
    throw FormatError(std::string("bad model metadata: ") + e.what());
  }
  Rng rng(0);
  m.encoder = make_encoder(m.vocab.size(), {m.config.dim, m.config.window, m.config.max_subwords}, rng);
  if (*span == "1") {
    m.span_head = make_span_head(m.config.dim, m.config.resolved_span_hidden(),
                                 m.config.max_span_width, rng);
  }
  m.crf = make_crf(m.config.dim, static_cast<Index>(m.tags.size()), rng);

  ParameterList params = m.parameters();
  if (params.size() != c.arrays.size()) {
    throw FormatError("model container holds " + std::to_string(c.arrays.size()) +
                      " arrays, expected " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const NamedArray& a = c.arrays[i];
    Tensor& t = params[i].tensor;
    if (a.name != params[i].name || a.value.rows() != t.rows() || a.value.cols() != t.cols()) {
      throw FormatError("array " + a.name + " " + shape_string(a.value) + " does not match " +
                        params[i].name + " " + shape_string(t.value()));
    }
    t.value_mut() = a.value;
  }
  return m;
}

std::vector<AblationRow> run_ablation(const Corpus& labeled, const Corpus& unlabeled,
                                      const Corpus& test, const TrainConfig& cfg,
                                      const TrainOptions& options) {
  std::vector<AblationRow> rows;
  const ScoreOptions so{class_order(labeled.label_classes), false};
  const auto add_row = [&](const std::string& name, const Model& m) {
    const EvalReport r = score(test, predict(m, test), so);
    rows.push_back({name, r.micro, r.macro});
  };

  TrainConfig crf_only = cfg;
  crf_only.span_weight = 0.0;
  log_line(options, "ablation: CRF only");
  add_row("CRF", train(init_model(labeled.label_classes, labeled, crf_only, false), labeled,
                       crf_only, options)
                     .model);

  TrainConfig with_span = cfg;
  if (with_span.span_weight <= 0.0) with_span.span_weight = 1.0;
  log_line(options, "ablation: CRF + span classification");
  add_row("+ span classification",
          train(init_model(labeled.label_classes, labeled, with_span, true), labeled, with_span,
                options)
              .model);

  log_line(options, "ablation: + self-training");
  add_row("+ self-training", self_train(labeled, unlabeled, with_span, options).model);
  return rows;
}

}  // namespace nerkit
