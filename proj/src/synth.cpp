#include "nerkit/synth.hpp"

#include <array>
#include <map>

#include "nerkit/error.hpp"
#include "nerkit/rng.hpp"

namespace nerkit {

namespace {

using Lexicon = std::map<std::string, std::vector<std::vector<std::string>>>;

const std::vector<std::string> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n",
                                          "p", "r", "s", "t", "v", "z", "br", "kr"};
const std::vector<std::string> kVowels = {"a", "e", "i", "o", "u", "ai"};

std::string syllables(Rng& rng, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += rng.pick(kOnsets) + rng.pick(kVowels);
  return s;
}

std::string cap(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::vector<std::string> make_entity(const std::string& cls, Rng& rng) {
  if (cls == "PER") {
    static const std::vector<std::string> kSurname = {"son", "sen", "ova", "ez", "ski"};
    return {cap(syllables(rng, 2)), cap(syllables(rng, 1) + rng.pick(kSurname))};
  }
  if (cls == "LOC") {
    static const std::vector<std::string> kPlace = {"burg", "ville", "stad", "ford", "grad"};
    static const std::vector<std::string> kPrefix = {"Port", "Lake", "Mount"};
    std::string name = cap(syllables(rng, 2) + rng.pick(kPlace));
    if (rng.bernoulli(0.3)) return {rng.pick(kPrefix), name};
    return {name};
  }
  if (cls == "GRP") {
    static const std::vector<std::string> kTail = {"Ensemble", "Collective", "Brothers", "Club"};
    return {"The", cap(syllables(rng, 2) + "ers"), rng.pick(kTail)};
  }
  if (cls == "CORP") {
    static const std::vector<std::string> kStem = {"ix", "ora", "tek", "on"};
    static const std::vector<std::string> kForm = {"Corp", "Inc", "Ltd", "Holdings"};
    return {cap(syllables(rng, 2) + rng.pick(kStem)), rng.pick(kForm)};
  }
  if (cls == "PROD") {
    static const std::vector<std::string> kLetter = {"X", "Z", "Q", "V"};
    return {cap(syllables(rng, 2)), rng.pick(kLetter) + std::to_string(100 + rng.below(900))};
  }
  // CW: titles built from a closed set of capitalized title words.
  static const std::vector<std::string> kTitle = {
      "Silent", "River",  "Dreams", "Shadow", "Winter",  "Garden", "Broken", "Crown",
      "Echoes", "Lantern", "Storm", "Velvet", "Harbor",  "Ember",  "Glass",  "Orchard"};
  const int n = 2 + static_cast<int>(rng.below(2));
  std::vector<std::string> words;
  for (int i = 0; i < n; ++i) words.push_back(rng.pick(kTitle));
  return words;
}

Lexicon build_lexicon(const SynthConfig& cfg) {
  Rng rng(cfg.lexicon_seed);
  Lexicon lex;
  for (const auto& cls : synth_classes()) {
    auto& entries = lex[cls];
    while (entries.size() < cfg.entities_per_class) {
      auto e = make_entity(cls, rng);
      bool dup = false;
      for (const auto& x : entries) dup = dup || x == e;
      if (!dup) entries.push_back(std::move(e));
    }
  }
  return lex;
}

// "{X}" marks an entity slot of class X.
const std::vector<std::vector<std::string>>& templates() {
  static const std::vector<std::vector<std::string>> kTemplates = {
      {"{PER}", "visited", "{LOC}", "last", "week"},
      {"yesterday", "{PER}", "joined", "{GRP}"},
      {"{CORP}", "released", "the", "{PROD}", "today"},
      {"we", "watched", "{CW}", "with", "{PER}"},
      {"the", "new", "office", "of", "{CORP}", "is", "in", "{LOC}"},
      {"{GRP}", "performed", "{CW}", "in", "{LOC}"},
      {"i", "bought", "a", "{PROD}", "from", "{CORP}"},
      {"where", "is", "{LOC}"},
      {"who", "founded", "{CORP}"},
      {"play", "{CW}", "by", "{GRP}"},
      {"{PER}", "wrote", "{CW}"},
      {"is", "the", "{PROD}", "better", "than", "the", "{PROD}"},
      {"{PER}", "and", "{PER}", "met", "near", "{LOC}"},
      {"tickets", "for", "{GRP}", "sold", "out"},
      {"{CORP}", "hired", "{PER}", "as", "chief", "engineer"},
      {"read", "{CW}", "before", "the", "trip", "to", "{LOC}"},
      {"the", "{PROD}", "review", "mentions", "{CORP}"},
      {"how", "old", "is", "{PER}"},
  };
  return kTemplates;
}

const std::vector<std::vector<std::string>>& ambiguous_templates() {
  // "{*}" is filled with a word taken from some entity, labeled O.
  static const std::vector<std::vector<std::string>> kTemplates = {
      {"the", "word", "{*}", "means", "nothing", "here"},
      {"she", "said", "{*}", "twice"},
      {"spell", "{*}", "for", "me"},
  };
  return kTemplates;
}

}  // namespace

const std::vector<std::string>& synth_classes() {
  static const std::vector<std::string> kClasses = {"PER", "LOC", "GRP", "CORP", "PROD", "CW"};
  return kClasses;
}

Corpus synthesize(const SynthConfig& cfg) {
  if (cfg.entities_per_class == 0) throw DataError("synth: entities_per_class must be >= 1");
  const Lexicon lex = build_lexicon(cfg);
  Rng rng(cfg.seed);
  Corpus corpus;
  for (std::size_t i = 0; i < cfg.sentences; ++i) {
    Sentence s;
    s.id = cfg.id_prefix + "-" + std::to_string(cfg.seed) + "-" + std::to_string(i);
    if (rng.bernoulli(cfg.ambiguity_rate)) {
      const auto& cls = rng.pick(synth_classes());
      const auto& entity = rng.pick(lex.at(cls));
      const std::string& word = rng.pick(entity);
      for (const auto& tok : rng.pick(ambiguous_templates())) {
        s.rows.push_back({tok == "{*}" ? word : tok, "O"});
      }
    } else {
      for (const auto& tok : rng.pick(templates())) {
        if (tok.size() > 2 && tok.front() == '{') {
          const std::string cls = tok.substr(1, tok.size() - 2);
          const auto& entity = rng.pick(lex.at(cls));
          for (std::size_t k = 0; k < entity.size(); ++k) {
            s.rows.push_back({entity[k], (k == 0 ? "B-" : "I-") + cls});
          }
        } else {
          s.rows.push_back({tok, "O"});
        }
      }
    }
    corpus.sentences.push_back(std::move(s));
  }
  corpus.refresh_classes();
  return corpus;
}

}  // namespace nerkit
