#include "nerkit/evaluator.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nerkit/error.hpp"

namespace nerkit {

namespace {

using Json = nlohmann::ordered_json;

Json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

Prf prf_from_json(const nlohmann::json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

void prf_row(std::ostringstream& os, const std::string& name, const Prf& p) {
  os << std::left << std::setw(10) << name << std::right << std::setw(11) << 100.0 * p.precision
     << std::setw(11) << 100.0 * p.recall << std::setw(11) << 100.0 * p.f1;
}

}  // namespace

Prf Prf::from(double precision, double recall) {
  const double denom = precision + recall;
  return {precision, recall, denom > 0.0 ? 2.0 * precision * recall / denom : 0.0};
}

Prf Prf::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  const double p = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double r = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  return from(p, r);
}

EvalReport score(const Corpus& gold, const Corpus& pred, const ScoreOptions& options) {
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                    std::to_string(pred.size()));
  }
  std::map<std::string, ClassScore> by_class;
  std::set<std::string> names(options.classes.begin(), options.classes.end());
  names.insert(gold.label_classes.begin(), gold.label_classes.end());
  names.insert(pred.label_classes.begin(), pred.label_classes.end());

  for (std::size_t i = 0; i < gold.size(); ++i) {
    const Sentence& g = gold.sentences[i];
    const Sentence& p = pred.sentences[i];
    if (g.surfaces() != p.surfaces()) {
      throw DataError("sentence " + std::to_string(i) + " (id " + g.id +
                      ") differs between gold and prediction");
    }
    const auto gs = spans_from_labels(validate_and_repair_iob(g.labels()).labels);
    const auto ps = spans_from_labels(validate_and_repair_iob(p.labels()).labels);
    for (const auto& s : gs) names.insert(*s.cls);
    for (const auto& s : ps) names.insert(*s.cls);
    for (const auto& s : ps) {
      auto& c = by_class[*s.cls];
      if (std::find(gs.begin(), gs.end(), s) != gs.end()) {
        ++c.tp;
      } else {
        ++c.fp;
      }
    }
    for (const auto& s : gs) {
      if (std::find(ps.begin(), ps.end(), s) == ps.end()) ++by_class[*s.cls].fn;
    }
  }

  EvalReport r;
  double sum_p = 0.0;
  double sum_r = 0.0;
  double sum_f = 0.0;
  for (const auto& name : class_order(names)) {
    ClassScore c = by_class[name];
    c.cls = name;
    c.prf = Prf::from_counts(c.tp, c.fp, c.fn);
    r.tp += c.tp;
    r.fp += c.fp;
    r.fn += c.fn;
    if (c.support() > 0 || c.predicted() > 0 || options.macro_absent_as_zero) {
      sum_p += c.prf.precision;
      sum_r += c.prf.recall;
      sum_f += c.prf.f1;
      ++r.macro_classes;
    }
    r.classes.push_back(std::move(c));
  }
  r.micro = Prf::from_counts(r.tp, r.fp, r.fn);
  if (r.macro_classes > 0) {
    const double k = static_cast<double>(r.macro_classes);
    r.macro = {sum_p / k, sum_r / k, sum_f / k};
  } else if (r.tp + r.fp + r.fn == 0) {
    // Nothing to find and nothing found.
    r.micro = {1.0, 1.0, 1.0};
    r.macro = {1.0, 1.0, 1.0};
  }
  return r;
}

EvalReport report_from_class_prf(const std::vector<std::pair<std::string, Prf>>& rows) {
  EvalReport r;
  double sp = 0.0;
  double sr = 0.0;
  double sf = 0.0;
  for (const auto& [name, prf] : rows) {
    ClassScore c;
    c.cls = name;
    c.prf = prf;
    sp += prf.precision;
    sr += prf.recall;
    sf += prf.f1;
    r.classes.push_back(std::move(c));
  }
  r.macro_classes = rows.size();
  if (!rows.empty()) {
    const double k = static_cast<double>(rows.size());
    r.macro = {sp / k, sr / k, sf / k};
    // Without counts, the best available micro summary is the macro average.
    r.micro = r.macro;
  }
  return r;
}

std::string EvalReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(10) << "class" << std::right << std::setw(11) << "precision"
     << std::setw(11) << "recall" << std::setw(11) << "F1" << std::setw(10) << "support" << "\n";
  for (const auto& c : classes) {
    prf_row(os, c.cls, c.prf);
    os << std::setw(10) << c.support() << "\n";
  }
  prf_row(os, "micro", micro);
  os << std::setw(10) << tp + fn << "\n";
  prf_row(os, "macro", macro);
  os << std::setw(10) << tp + fn << "\n";
  return os.str();
}

std::string EvalReport::to_structured() const {
  Json j;
  j["classes"] = Json::array();
  for (const auto& c : classes) {
    Json row = {{"class", c.cls}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
    row["prf"] = prf_json(c.prf);
    j["classes"].push_back(std::move(row));
  }
  j["counts"] = {{"tp", tp}, {"fp", fp}, {"fn", fn}};
  j["micro"] = prf_json(micro);
  j["macro"] = prf_json(macro);
  j["macro_classes"] = macro_classes;
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_structured(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    for (const auto& row : j.at("classes")) {
      ClassScore c;
      c.cls = row.at("class").get<std::string>();
      c.tp = row.at("tp").get<std::size_t>();
      c.fp = row.at("fp").get<std::size_t>();
      c.fn = row.at("fn").get<std::size_t>();
      c.prf = prf_from_json(row.at("prf"));
      r.classes.push_back(std::move(c));
    }
    r.tp = j.at("counts").at("tp").get<std::size_t>();
    r.fp = j.at("counts").at("fp").get<std::size_t>();
    r.fn = j.at("counts").at("fn").get<std::size_t>();
    r.micro = prf_from_json(j.at("micro"));
    r.macro = prf_from_json(j.at("macro"));
    r.macro_classes = j.at("macro_classes").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad evaluation report: ") + e.what());
  }
}

std::string render_ablation_text(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << std::left << std::setw(24) << "system" << std::right << std::setw(11) << "precision"
     << std::setw(11) << "recall" << std::setw(11) << "F1" << std::setw(11) << "macro-F1"
     << "\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(24) << r.system << std::right << std::setw(11)
       << 100.0 * r.micro.precision << std::setw(11) << 100.0 * r.micro.recall << std::setw(11)
       << 100.0 * r.micro.f1 << std::setw(11) << 100.0 * r.macro.f1 << "\n";
  }
  return os.str();
}

std::string render_ablation_structured(const std::vector<AblationRow>& rows) {
  Json j = Json::array();
  for (const auto& r : rows) {
    j.push_back({{"system", r.system}, {"micro", prf_json(r.micro)}, {"macro", prf_json(r.macro)}});
  }
  return j.dump(2) + "\n";
}

std::vector<AblationRow> parse_ablation_structured(std::string_view text) {
  try {
    std::vector<AblationRow> rows;
    for (const auto& r : nlohmann::json::parse(text)) {
      rows.push_back({r.at("system").get<std::string>(), prf_from_json(r.at("micro")),
                      prf_from_json(r.at("macro"))});
    }
    return rows;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad ablation report: ") + e.what());
  }
}

}  // namespace nerkit
