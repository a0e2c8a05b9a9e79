#ifndef NERKIT_PIPELINE_HPP
#define NERKIT_PIPELINE_HPP

// Model assembly, multi-task training (CRF NLL + weighted span focal loss),
// prediction, self-training and model files.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nerkit/corpus.hpp"
#include "nerkit/crf.hpp"
#include "nerkit/encoder.hpp"
#include "nerkit/evaluator.hpp"
#include "nerkit/span_head.hpp"

namespace nerkit {

inline constexpr int kModelFormat = 1;

struct TrainConfig {
  std::uint64_t seed = 13;
  Index dim = 32;
  Index window = 1;
  Index max_span_width = 8;
  Index max_subwords = 12;
  std::size_t vocab_size = 2000;
  Index span_hidden = 0;     // 0 means "same as dim"
  double span_weight = 1.0;  // weight of the span loss next to the CRF loss
  double focal_gamma = 0.5;
  // Unset: inverse prevalence of candidate labels in the training data.
  std::optional<std::array<double, 2>> focal_alpha;
  double negative_keep = 1.0;
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t epochs = 20;
  bool constrained_decode = true;
  bool constrained_train = false;
  std::optional<double> confidence_threshold;
  double dev_fraction = 0.1;
  bool keep_best_epoch = false;
  std::size_t threads = 1;

  // Settings used with a large pretrained encoder (learning rate 1e-5).
  static TrainConfig pretrained_encoder_preset();

  void validate() const;
  Index resolved_span_hidden() const { return span_hidden > 0 ? span_hidden : dim; }

  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  // Unknown keys are rejected.
  void set(std::string_view key, std::string_view value);
  static TrainConfig from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

  bool operator==(const TrainConfig&) const = default;
};

struct Model {
  TrainConfig config;
  SubwordVocab vocab;
  TagSet tags;
  EncoderParams encoder;
  std::optional<SpanHeadParams> span_head;
  CrfParams crf;

  // Every trainable tensor in serialization order.
  ParameterList parameters() const;
  // Independent copy of all parameter values.
  Model clone() const;
};

// Builds the vocabulary from corpus and initializes every parameter from
// cfg.seed.
Model init_model(const std::set<std::string>& classes, const Corpus& corpus,
                 const TrainConfig& cfg, bool with_span_head = true);

struct EpochRecord {
  std::size_t epoch = 0;
  double crf_loss = 0.0;
  double span_loss = 0.0;
  double total_loss = 0.0;
  std::optional<double> dev_f1;
  double seconds = 0.0;

  // Wall-clock time is not part of the comparison.
  bool operator==(const EpochRecord& o) const {
    return epoch == o.epoch && crf_loss == o.crf_loss && span_loss == o.span_loss &&
           total_loss == o.total_loss && dev_f1 == o.dev_f1;
  }
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  // One JSON object per line. Omits wall-clock time so equal runs produce
  // equal files.
  std::string to_jsonl() const;
  static TrainHistory from_jsonl(std::string_view text);

  bool operator==(const TrainHistory&) const = default;
};

using LogFn = std::function<void(const std::string&)>;

struct TrainOptions {
  // Explicit dev corpus; otherwise the last dev_fraction of the training
  // sentences are held out.
  const Corpus* dev = nullptr;
  LogFn log;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

// Minimizes mean over each batch of crf_nll + span_weight * span_loss with
// Adam. Throws DataError before training when a label is outside the model's
// tag set.
TrainResult train(Model model, const Corpus& data, const TrainConfig& cfg,
                  const TrainOptions& options = {});

struct SentencePrediction {
  std::vector<int> path;
  double score = 0.0;
  // (Viterbi score - log Z) / length.
  double confidence = 0.0;
};

// Decodes every sentence; order follows the input regardless of threads.
std::vector<SentencePrediction> decode(const Model& model, const Corpus& corpus,
                                       bool with_confidence = false);
Corpus predict(const Model& model, const Corpus& corpus);

// Copy of corpus with every label set to "O".
Corpus strip_labels(const Corpus& corpus);

struct SelfTrainResult {
  Model teacher;  // trained on the labeled data with the full objective
  Model model;    // retrained from scratch on labeled + weak data, no span head
  TrainHistory teacher_history;
  TrainHistory history;
  Corpus weak;
  std::uint64_t stage2_span_evaluations = 0;
  std::vector<std::string> warnings;
};

SelfTrainResult self_train(const Corpus& labeled, const Corpus& unlabeled, const TrainConfig& cfg,
                           const TrainOptions& options = {});

std::string save_model(const Model& model);
Model load_model(std::string_view bytes);

// Three systems on the same data: CRF only, CRF + span loss, and the
// self-trained model, each scored on test.
std::vector<AblationRow> run_ablation(const Corpus& labeled, const Corpus& unlabeled,
                                      const Corpus& test, const TrainConfig& cfg,
                                      const TrainOptions& options = {});

}  // namespace nerkit

#endif  // NERKIT_PIPELINE_HPP
