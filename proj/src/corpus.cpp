#include "nerkit/corpus.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "nerkit/error.hpp"

namespace nerkit {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// "# id abc domain=x" -> "abc"
std::optional<std::string> comment_id(std::string_view line) {
  line.remove_prefix(1);
  const auto fields = split_ws(line);
  if (fields.size() >= 2 && fields[0] == "id") return std::string(fields[1]);
  return std::nullopt;
}

}  // namespace

std::vector<std::string> Sentence::labels() const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.label);
  return out;
}

std::vector<std::string> Sentence::surfaces() const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.surface);
  return out;
}

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

void Corpus::refresh_classes() {
  label_classes.clear();
  for (const auto& s : sentences) {
    for (const auto& r : s.rows) {
      const Tag t = parse_tag(r.label);
      if (t.prefix != 'O') label_classes.insert(t.cls);
    }
  }
}

Corpus concat(const Corpus& a, const Corpus& b) {
  Corpus out = a;
  out.sentences.insert(out.sentences.end(), b.sentences.begin(), b.sentences.end());
  out.label_classes.insert(b.label_classes.begin(), b.label_classes.end());
  return out;
}

Tag parse_tag(std::string_view tag) {
  if (tag == "O") return {'O', {}};
  if (tag.size() >= 3 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    return {tag[0], std::string(tag.substr(2))};
  }
  throw DataError("malformed IOB tag '" + std::string(tag) + "'");
}

Corpus parse_conll(std::string_view text, const ParseOptions& options,
                   ParseDiagnostics* diagnostics) {
  Corpus corpus;
  Sentence current;
  std::optional<std::string> pending_id;

  const auto flush = [&] {
    if (current.rows.empty()) {
      pending_id.reset();
      return;
    }
    current.id = pending_id ? *pending_id : std::to_string(corpus.sentences.size());
    auto repaired = validate_and_repair_iob(current.labels());
    for (const auto& v : repaired.violations) {
      current.rows[v.index].label = v.repaired;
      if (diagnostics) {
        diagnostics->warnings.push_back("sentence " + current.id + ", token " +
                                        std::to_string(v.index) + ": " + v.original +
                                        " repaired to " + v.repaired);
      }
    }
    corpus.sentences.push_back(std::move(current));
    current = Sentence{};
    pending_id.reset();
  };

  const ColumnSpec& cols = options.columns;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;

    if (line.empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      if (current.rows.empty()) {
        if (auto id = comment_id(line)) pending_id = std::move(id);
      }
      continue;
    }

    const auto fields = split_ws(line);
    if (cols.surface < 0 || static_cast<std::size_t>(cols.surface) >= fields.size()) {
      throw ParseError(line_no, "row has " + std::to_string(fields.size()) +
                                    " column(s); surface column " +
                                    std::to_string(cols.surface) + " requested");
    }
    TokenRow row;
    row.surface = std::string(fields[cols.surface]);

    std::optional<std::size_t> label_idx;
    if (cols.label < 0) {
      if (fields.size() >= 2) label_idx = fields.size() - 1;
    } else if (static_cast<std::size_t>(cols.label) < fields.size()) {
      label_idx = static_cast<std::size_t>(cols.label);
    }
    if (!label_idx) {
      if (!cols.labels_optional) {
        throw ParseError(line_no, "row has " + std::to_string(fields.size()) +
                                      " column(s); label column " +
                                      (cols.label < 0 ? std::string("(last)")
                                                      : std::to_string(cols.label)) +
                                      " missing");
      }
      row.label = "O";
    } else {
      row.label = std::string(fields[*label_idx]);
      Tag tag;
      try {
        tag = parse_tag(row.label);
      } catch (const DataError& e) {
        throw ParseError(line_no, e.what());
      }
      if (tag.prefix != 'O') {
        if (options.allowed_classes && !options.allowed_classes->contains(tag.cls)) {
          throw ParseError(line_no, "unknown entity class '" + tag.cls + "'");
        }
        corpus.label_classes.insert(tag.cls);
      }
    }
    current.rows.push_back(std::move(row));
  }
  flush();
  return corpus;
}

std::string write_conll(const Corpus& corpus, const ColumnSpec& columns) {
  const std::size_t surface = static_cast<std::size_t>(std::max(columns.surface, 0));
  const std::size_t label =
      columns.label < 0 ? surface + 1 : static_cast<std::size_t>(columns.label);
  const std::size_t width = std::max(surface, label) + 1;

  std::string out;
  std::vector<std::string_view> fields(width);
  for (const auto& s : corpus.sentences) {
    out += "# id ";
    out += s.id;
    out += '\n';
    for (const auto& r : s.rows) {
      std::fill(fields.begin(), fields.end(), std::string_view("_"));
      fields[surface] = r.surface;
      fields[label] = r.label;
      for (std::size_t i = 0; i < width; ++i) {
        if (i) out += ' ';
        out += fields[i];
      }
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

Corpus read_conll_file(const std::string& path, const ParseOptions& options,
                       ParseDiagnostics* diagnostics) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_conll(buf.str(), options, diagnostics);
  } catch (const ParseError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_conll_file(const std::string& path, const Corpus& corpus, const ColumnSpec& columns) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << write_conll(corpus, columns);
}

IobRepair validate_and_repair_iob(const std::vector<std::string>& labels) {
  IobRepair out;
  out.labels.reserve(labels.size());
  Tag prev{'O', {}};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Tag t = parse_tag(labels[i]);
    if (t.prefix == 'I' && (prev.prefix == 'O' || prev.cls != t.cls)) {
      t.prefix = 'B';
      out.violations.push_back({i, labels[i], "B-" + t.cls});
      out.labels.push_back("B-" + t.cls);
    } else {
      out.labels.push_back(labels[i]);
    }
    prev = std::move(t);
  }
  return out;
}

bool is_valid_iob2(const std::vector<std::string>& labels) {
  return validate_and_repair_iob(labels).violations.empty();
}

std::vector<Span> spans_from_labels(const std::vector<std::string>& labels) {
  std::vector<Span> spans;
  std::optional<Span> open;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Tag t = parse_tag(labels[i]);
    if (t.prefix == 'I') {
      if (!open || *open->cls != t.cls) {
        throw DataError("invalid IOB2 at index " + std::to_string(i) + ": " + labels[i] +
                        " does not continue an entity");
      }
      open->end = i;
      continue;
    }
    if (open) spans.push_back(std::move(*open));
    open.reset();
    if (t.prefix == 'B') open = Span{i, i, t.cls};
  }
  if (open) spans.push_back(std::move(*open));
  return spans;
}

std::vector<std::string> labels_from_spans(const std::vector<Span>& spans, std::size_t length) {
  std::vector<std::string> labels(length, "O");
  std::vector<bool> taken(length, false);
  for (const auto& s : spans) {
    if (s.start > s.end || s.end >= length) {
      throw DataError("span (" + std::to_string(s.start) + "," + std::to_string(s.end) +
                      ") outside sentence of length " + std::to_string(length));
    }
    if (!s.cls) throw DataError("span without entity class cannot be labeled");
    for (std::size_t i = s.start; i <= s.end; ++i) {
      if (taken[i]) {
        throw DataError("overlapping spans at token " + std::to_string(i));
      }
      taken[i] = true;
      labels[i] = (i == s.start ? "B-" : "I-") + *s.cls;
    }
  }
  return labels;
}

std::size_t candidate_count(std::size_t length, std::size_t max_width) {
  std::size_t n = 0;
  for (std::size_t w = 1; w <= std::min(max_width, length); ++w) n += length - w + 1;
  return n;
}

std::vector<SpanCandidate> enumerate_spans(std::size_t length, std::size_t max_width,
                                           const std::vector<Span>& gold) {
  if (max_width == 0) throw DataError("maximum span width must be at least 1");
  std::vector<SpanCandidate> out;
  out.reserve(candidate_count(length, max_width));
  for (std::size_t start = 0; start < length; ++start) {
    for (std::size_t end = start; end < std::min(length, start + max_width); ++end) {
      SpanCandidate c{Span{start, end, std::nullopt}, 0};
      for (const auto& g : gold) {
        if (g.same_boundary(c.span)) {
          c.label = 1;
          break;
        }
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<std::string> class_order(const std::set<std::string>& classes) {
  static constexpr std::array<std::string_view, 6> kKnown = {"LOC", "PER",  "PROD",
                                                              "GRP", "CW", "CORP"};
  std::vector<std::string> out;
  for (auto k : kKnown) {
    if (classes.contains(std::string(k))) out.emplace_back(k);
  }
  for (const auto& c : classes) {
    if (std::find(kKnown.begin(), kKnown.end(), c) == kKnown.end()) out.push_back(c);
  }
  return out;
}

StatsReport corpus_stats(const Corpus& corpus, std::size_t max_width) {
  StatsReport r;
  r.sentences = corpus.size();
  r.tokens = corpus.token_count();
  r.max_span_width = max_width;

  std::map<std::string, std::size_t> counts;
  for (const auto& s : corpus.sentences) {
    const auto gold = spans_from_labels(s.labels());
    for (const auto& g : gold) ++counts[*g.cls];
    r.entities += gold.size();
    for (const auto& c : enumerate_spans(s.size(), max_width, gold)) {
      ++r.span_candidates;
      r.entity_spans += static_cast<std::size_t>(c.label);
    }
  }
  std::set<std::string> present;
  for (const auto& [cls, n] : counts) present.insert(cls);
  for (const auto& cls : class_order(present)) {
    const std::size_t n = counts[cls];
    r.classes.push_back({cls, n, 100.0 * static_cast<double>(n) / static_cast<double>(r.entities)});
  }
  if (r.span_candidates > 0) {
    const double total = static_cast<double>(r.span_candidates);
    r.entity_span_percent = 100.0 * static_cast<double>(r.entity_spans) / total;
    r.non_entity_span_percent =
        100.0 * static_cast<double>(r.span_candidates - r.entity_spans) / total;
  }
  return r;
}

std::string StatsReport::to_text() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "sentences " << sentences << "\n";
  os << "tokens    " << tokens << "\n";
  os << "entities  " << entities << "\n\n";
  os << std::left << std::setw(12) << "class" << std::right << std::setw(10) << "count"
     << std::setw(10) << "%" << "\n";
  for (const auto& c : classes) {
    os << std::left << std::setw(12) << c.cls << std::right << std::setw(10) << c.count
       << std::setw(10) << c.percent << "\n";
  }
  os << "\nspan candidates (width <= " << max_span_width << ") " << span_candidates << "\n";
  os << std::left << std::setw(18) << "entity span" << std::right << std::setw(10)
     << entity_span_percent << "\n";
  os << std::left << std::setw(18) << "not entity span" << std::right << std::setw(10)
     << non_entity_span_percent << "\n";
  return os.str();
}

std::string StatsReport::to_structured() const {
  nlohmann::ordered_json j;
  j["sentences"] = sentences;
  j["tokens"] = tokens;
  j["entities"] = entities;
  j["classes"] = nlohmann::ordered_json::array();
  for (const auto& c : classes) {
    j["classes"].push_back({{"class", c.cls}, {"count", c.count}, {"percent", c.percent}});
  }
  j["spans"] = {{"max_width", max_span_width},
                {"candidates", span_candidates},
                {"entity", entity_spans},
                {"entity_percent", entity_span_percent},
                {"non_entity_percent", non_entity_span_percent}};
  return j.dump(2) + "\n";
}

StatsReport StatsReport::from_structured(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    StatsReport r;
    r.sentences = j.at("sentences").get<std::size_t>();
    r.tokens = j.at("tokens").get<std::size_t>();
    r.entities = j.at("entities").get<std::size_t>();
    for (const auto& c : j.at("classes")) {
      r.classes.push_back({c.at("class").get<std::string>(), c.at("count").get<std::size_t>(),
                           c.at("percent").get<double>()});
    }
    const auto& s = j.at("spans");
    r.max_span_width = s.at("max_width").get<std::size_t>();
    r.span_candidates = s.at("candidates").get<std::size_t>();
    r.entity_spans = s.at("entity").get<std::size_t>();
    r.entity_span_percent = s.at("entity_percent").get<double>();
    r.non_entity_span_percent = s.at("non_entity_percent").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad stats report: ") + e.what());
  }
}

}  // namespace nerkit
