#ifndef NERKIT_EVALUATOR_HPP
#define NERKIT_EVALUATOR_HPP

// Entity-level exact-match scoring.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "nerkit/corpus.hpp"

namespace nerkit {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // F1 = 2PR / (P + R), 0 when P + R == 0.
  static Prf from(double precision, double recall);
  static Prf from_counts(std::size_t tp, std::size_t fp, std::size_t fn);

  bool operator==(const Prf&) const = default;
};

struct ClassScore {
  std::string cls;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  Prf prf;

  std::size_t support() const { return tp + fn; }
  std::size_t predicted() const { return tp + fp; }

  bool operator==(const ClassScore&) const = default;
};

struct EvalReport {
  std::vector<ClassScore> classes;  // class_order()
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  Prf micro;
  Prf macro;
  std::size_t macro_classes = 0;  // classes averaged into macro

  // Percentages with two decimals: class rows, then micro, then macro.
  std::string to_text() const;
  std::string to_structured() const;  // JSON
  static EvalReport from_structured(std::string_view text);

  bool operator==(const EvalReport&) const = default;
};

struct ScoreOptions {
  // Also report these classes even when absent from both corpora.
  std::vector<std::string> classes;
  // Average classes with no gold and no predicted entities into macro as 0
  // instead of leaving them out.
  bool macro_absent_as_zero = false;
};

// An entity is correct iff start, end and class all match. Both corpora must
// have the same sentences (count and surfaces).
EvalReport score(const Corpus& gold, const Corpus& pred, const ScoreOptions& options = {});

// Fills micro/macro from per-class P/R/F1 values (e.g. published tables).
EvalReport report_from_class_prf(const std::vector<std::pair<std::string, Prf>>& rows);

// System-comparison table: one row per training configuration.
struct AblationRow {
  std::string system;
  Prf micro;
  Prf macro;

  bool operator==(const AblationRow&) const = default;
};

std::string render_ablation_text(const std::vector<AblationRow>& rows);
std::string render_ablation_structured(const std::vector<AblationRow>& rows);
std::vector<AblationRow> parse_ablation_structured(std::string_view text);

}  // namespace nerkit

#endif  // NERKIT_EVALUATOR_HPP
