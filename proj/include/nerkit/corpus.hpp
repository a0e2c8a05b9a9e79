#ifndef NERKIT_CORPUS_HPP
#define NERKIT_CORPUS_HPP

// IOB2-labeled corpora in CoNLL-style column format, gold span extraction and
// candidate-span enumeration for the binary span classifier.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nerkit {

inline constexpr std::size_t kDefaultMaxSpanWidth = 8;

struct TokenRow {
  std::string surface;
  std::string label;  // "O", "B-CLASS" or "I-CLASS"

  bool operator==(const TokenRow&) const = default;
};

struct Sentence {
  std::string id;
  std::vector<TokenRow> rows;

  std::size_t size() const { return rows.size(); }
  std::vector<std::string> labels() const;
  std::vector<std::string> surfaces() const;

  bool operator==(const Sentence&) const = default;
};

struct Corpus {
  std::vector<Sentence> sentences;
  std::set<std::string> label_classes;

  bool empty() const { return sentences.empty(); }
  std::size_t size() const { return sentences.size(); }
  std::size_t token_count() const;

  // Rebuilds label_classes from the rows.
  void refresh_classes();

  bool operator==(const Corpus&) const = default;
};

// Concatenates corpora in order. Ids are kept as-is.
Corpus concat(const Corpus& a, const Corpus& b);

struct Span {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // inclusive
  std::optional<std::string> cls;

  std::size_t width() const { return end - start + 1; }
  bool same_boundary(const Span& o) const { return start == o.start && end == o.end; }

  bool operator==(const Span&) const = default;
};

// Which whitespace-separated columns hold the surface form and the label.
// label == -1 means "last column". MultiCoNER files are "token _ _ label",
// i.e. label = 3.
struct ColumnSpec {
  int surface = 0;
  int label = -1;
  // Rows that lack the label column are read as "O" (unlabeled data).
  bool labels_optional = false;
};

struct ParseOptions {
  ColumnSpec columns;
  // When set, labels naming a class outside this set are rejected.
  std::optional<std::set<std::string>> allowed_classes;
};

// Diagnostics for IOB repairs applied while parsing.
struct ParseDiagnostics {
  std::vector<std::string> warnings;
};

Corpus parse_conll(std::string_view text, const ParseOptions& options = {},
                   ParseDiagnostics* diagnostics = nullptr);
std::string write_conll(const Corpus& corpus, const ColumnSpec& columns = {});

Corpus read_conll_file(const std::string& path, const ParseOptions& options = {},
                       ParseDiagnostics* diagnostics = nullptr);
void write_conll_file(const std::string& path, const Corpus& corpus,
                      const ColumnSpec& columns = {});

// Tag syntax helpers.
struct Tag {
  char prefix = 'O';  // 'O', 'B' or 'I'
  std::string cls;
};
// Throws DataError for anything other than "O", "B-X", "I-X".
Tag parse_tag(std::string_view tag);

struct IobViolation {
  std::size_t index;
  std::string original;
  std::string repaired;
};

struct IobRepair {
  std::vector<std::string> labels;
  std::vector<IobViolation> violations;
};

// Rewrites every "I-X" that does not continue a "B-X"/"I-X" run as "B-X".
IobRepair validate_and_repair_iob(const std::vector<std::string>& labels);
bool is_valid_iob2(const std::vector<std::string>& labels);

std::vector<Span> spans_from_labels(const std::vector<std::string>& labels);
std::vector<std::string> labels_from_spans(const std::vector<Span>& spans, std::size_t length);

struct SpanCandidate {
  Span span;
  int label = 0;  // 1 iff the boundaries match a gold span

  bool operator==(const SpanCandidate&) const = default;
};

// All spans of width <= max_width ordered by start, then width.
std::vector<SpanCandidate> enumerate_spans(std::size_t length, std::size_t max_width,
                                           const std::vector<Span>& gold);
std::size_t candidate_count(std::size_t length, std::size_t max_width);

struct ClassShare {
  std::string cls;
  std::size_t count = 0;
  double percent = 0.0;

  bool operator==(const ClassShare&) const = default;
};

struct StatsReport {
  std::size_t sentences = 0;
  std::size_t tokens = 0;
  std::size_t entities = 0;
  std::vector<ClassShare> classes;  // ordered by class_order()
  std::size_t max_span_width = kDefaultMaxSpanWidth;
  std::size_t span_candidates = 0;
  std::size_t entity_spans = 0;
  double entity_span_percent = 0.0;
  double non_entity_span_percent = 0.0;

  std::string to_text() const;
  std::string to_structured() const;  // JSON key/value tree
  static StatsReport from_structured(std::string_view text);

  bool operator==(const StatsReport&) const = default;
};

StatsReport corpus_stats(const Corpus& corpus, std::size_t max_width = kDefaultMaxSpanWidth);

// Canonical class ordering: the six MultiCoNER classes in their report
// order, then anything else lexicographically.
std::vector<std::string> class_order(const std::set<std::string>& classes);

}  // namespace nerkit

#endif  // NERKIT_CORPUS_HPP
