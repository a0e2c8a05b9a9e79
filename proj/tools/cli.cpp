#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "nerkit/container.hpp"
#include "nerkit/corpus.hpp"
#include "nerkit/error.hpp"
#include "nerkit/evaluator.hpp"
#include "nerkit/gradient_suite.hpp"
#include "nerkit/pipeline.hpp"
#include "nerkit/synth.hpp"

namespace nerkit::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string flag_of(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

std::vector<std::pair<std::string, std::string>> config_defaults() {
  auto pairs = TrainConfig{}.to_pairs();
  pairs.emplace_back("threads", std::to_string(TrainConfig{}.threads));
  return pairs;
}

// "key = value" lines; '#' starts a comment line.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || trim(t.substr(0, eq)).empty()) {
      throw UsageError(path + ":" + std::to_string(n) + ": expected 'key = value'");
    }
    std::string key = trim(t.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    out.emplace_back(key, trim(t.substr(eq + 1)));
  }
  return out;
}

void apply(TrainConfig& cfg, const std::string& key, const std::string& value,
           const std::string& where) {
  try {
    cfg.set(key, value);
  } catch (const DataError& e) {
    throw UsageError(where + ": " + e.what());
  }
}

// Every TrainConfig field as a flag, plus --config. Precedence: defaults <
// config file < flags.
struct ConfigFlags {
  std::string path;
  std::map<std::string, std::string> values;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", path, "key = value file; flags override it");
    for (const auto& [key, def] : config_defaults()) {
      cmd.add_option(flag_of(key), values[key], "(default " + def + ")");
    }
  }

  TrainConfig resolve(const CLI::App& cmd) const {
    TrainConfig cfg;
    if (!path.empty()) {
      for (const auto& [k, v] : read_config_file(path)) apply(cfg, k, v, path);
    }
    for (const auto& [k, v] : values) {
      if (cmd.count(flag_of(k)) > 0) apply(cfg, k, v, flag_of(k));
    }
    try {
      cfg.validate();
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

struct ColumnFlags {
  int surface = 0;
  int label = -1;

  void attach(CLI::App& cmd) {
    cmd.add_option("--surface-column", surface, "0-based column of the token (default 0)");
    cmd.add_option("--label-column", label, "0-based column of the tag; -1 = last (default)");
  }

  ParseOptions options(bool labels_optional = false) const {
    ParseOptions o;
    o.columns = {surface, label, labels_optional};
    return o;
  }
};

Corpus read_all(const std::vector<std::string>& paths, const ParseOptions& options,
                std::ostream& err) {
  Corpus c;
  for (const auto& p : paths) {
    ParseDiagnostics diag;
    c = concat(c, read_conll_file(p, options, &diag));
    for (const auto& w : diag.warnings) err << "warning: " << p << ": " << w << "\n";
  }
  return c;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << text;
  if (!f) throw DataError("cannot write " + path);
}

std::string sibling(const std::string& path, const std::string& name) {
  return (std::filesystem::path(path).parent_path() / name).string();
}

LogFn logger(std::ostream& err, bool quiet) {
  if (quiet) return {};
  return [&err](const std::string& line) { err << line << "\n"; };
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(3) << v;
  return s.str();
}

int gradcheck(std::uint64_t seed, std::size_t points, std::ostream& out) {
  const auto checks = run_gradient_suite(seed, points);
  double worst = 0.0;
  bool ok = true;
  for (const auto& c : checks) {
    out << std::left << std::setw(36) << c.name << std::setw(16) << c.group << sci(c.max_rel_error)
        << "  " << (c.passed() ? "ok" : "FAIL") << "\n";
    worst = std::max(worst, c.max_rel_error);
    ok = ok && c.passed();
  }
  out << "max relative error " << sci(worst) << " (tolerance " << sci(kGradientTolerance) << ", "
      << checks.size() << " checks x " << points << " points)\n";
  return ok ? kOk : kCheckFailed;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Desk-scale NER toolkit: CRF tagging with a span-classification auxiliary task"};
  app.name("nerkit");
  app.require_subcommand(1);
  app.fallthrough();  // -q works after the subcommand too
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress training log lines");

  // stats
  auto* stats = app.add_subcommand("stats", "entity and span statistics of labeled corpora");
  std::vector<std::string> stats_inputs;
  std::size_t stats_width = kDefaultMaxSpanWidth;
  std::string stats_format = "text";
  ColumnFlags stats_cols;
  stats->add_option("inputs", stats_inputs, "CoNLL files (concatenated)")->required();
  stats->add_option("--max-span-width", stats_width, "span enumeration width");
  stats->add_option("--format", stats_format)->check(CLI::IsMember({"text", "structured"}));
  stats_cols.attach(*stats);

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model on labeled data");
  std::vector<std::string> train_inputs;
  std::string train_dev, train_out, train_history;
  ColumnFlags train_cols;
  ConfigFlags train_cfg;
  train_cmd->add_option("--train", train_inputs, "labeled CoNLL files, concatenated in order")
      ->required();
  train_cmd->add_option("--dev", train_dev, "dev file for per-epoch F1 (default: hold out)");
  train_cmd->add_option("--out", train_out, "model file")->required();
  train_cmd->add_option("--history", train_history, "history JSONL (default <out>.history.jsonl)");
  train_cols.attach(*train_cmd);
  train_cfg.attach(*train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "tag a corpus with a trained model");
  std::string predict_model, predict_input, predict_out;
  std::size_t predict_threads = 1;
  ColumnFlags predict_cols;
  predict_cmd->add_option("--model", predict_model)->required();
  predict_cmd->add_option("--input", predict_input, "CoNLL file; labels ignored")->required();
  predict_cmd->add_option("--out", predict_out, "output CoNLL (default stdout)");
  predict_cmd->add_option("--threads", predict_threads, "decoding threads")
      ->check(CLI::PositiveNumber);
  predict_cols.attach(*predict_cmd);

  // selftrain
  auto* self_cmd = app.add_subcommand("selftrain", "teacher, weak labels, retrain from scratch");
  std::vector<std::string> self_inputs;
  std::string self_unlabeled, self_dev, self_out, self_weak, self_teacher;
  ColumnFlags self_cols;
  ConfigFlags self_cfg;
  self_cmd->add_option("--train", self_inputs, "labeled CoNLL files")->required();
  self_cmd->add_option("--unlabeled", self_unlabeled, "unlabeled CoNLL file")->required();
  self_cmd->add_option("--dev", self_dev);
  self_cmd->add_option("--out", self_out, "final model file")->required();
  self_cmd->add_option("--weak", self_weak, "weak corpus (default weak.conll next to --out)");
  self_cmd->add_option("--teacher", self_teacher, "also save the stage-1 model here");
  self_cols.attach(*self_cmd);
  self_cfg.attach(*self_cmd);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "entity-level precision / recall / F1");
  std::string eval_gold, eval_pred, eval_format = "text";
  bool eval_absent_zero = false;
  ColumnFlags eval_cols;
  eval_cmd->add_option("--gold", eval_gold)->required();
  eval_cmd->add_option("--pred", eval_pred)->required();
  eval_cmd->add_option("--format", eval_format)->check(CLI::IsMember({"text", "structured"}));
  eval_cmd->add_flag("--macro-absent-zero", eval_absent_zero,
                     "average classes absent from both sides into macro as 0");
  eval_cols.attach(*eval_cmd);

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference checks of all gradients");
  std::uint64_t grad_seed = 7;
  std::size_t grad_points = 10;
  grad_cmd->add_option("--seed", grad_seed);
  grad_cmd->add_option("--points", grad_points)->check(CLI::PositiveNumber);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write a deterministic synthetic corpus");
  SynthConfig synth;
  std::string synth_out;
  bool synth_strip = false;
  synth_cmd->add_option("--out", synth_out, "output CoNLL (default stdout)");
  synth_cmd->add_option("--seed", synth.seed, "sentence stream seed");
  synth_cmd->add_option("--lexicon-seed", synth.lexicon_seed, "entity lexicon seed");
  synth_cmd->add_option("--sentences", synth.sentences);
  synth_cmd->add_option("--entities-per-class", synth.entities_per_class, "lexicon size per class")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--ambiguity-rate", synth.ambiguity_rate,
                        "fraction of sentences using an entity word as a plain word")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--id-prefix", synth.id_prefix);
  synth_cmd->add_flag("--unlabeled", synth_strip, "write every label as O");

  // ablation
  auto* abl_cmd = app.add_subcommand("ablation", "CRF / + span / + self-training comparison");
  std::vector<std::string> abl_inputs;
  std::string abl_unlabeled, abl_test, abl_format = "text", abl_out;
  ColumnFlags abl_cols;
  ConfigFlags abl_cfg;
  abl_cmd->add_option("--train", abl_inputs)->required();
  abl_cmd->add_option("--unlabeled", abl_unlabeled)->required();
  abl_cmd->add_option("--test", abl_test)->required();
  abl_cmd->add_option("--format", abl_format)->check(CLI::IsMember({"text", "structured"}));
  abl_cmd->add_option("--out", abl_out, "report file (default stdout)");
  abl_cols.attach(*abl_cmd);
  abl_cfg.attach(*abl_cmd);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "nerkit: " << first_line(e.what()) << " (see --help)\n";
    return kUsage;
  }

  try {
    if (*stats) {
      const Corpus c = read_all(stats_inputs, stats_cols.options(), err);
      const StatsReport r = corpus_stats(c, stats_width);
      out << (stats_format == "text" ? r.to_text() : r.to_structured() + "\n");
    } else if (*train_cmd) {
      const TrainConfig cfg = train_cfg.resolve(*train_cmd);
      const Corpus data = read_all(train_inputs, train_cols.options(), err);
      std::optional<Corpus> dev;
      TrainOptions opts;
      opts.log = logger(err, quiet);
      if (!train_dev.empty()) {
        dev = read_conll_file(train_dev, train_cols.options());
        opts.dev = &*dev;
      }
      std::set<std::string> classes = data.label_classes;
      if (dev) classes.insert(dev->label_classes.begin(), dev->label_classes.end());
      TrainResult r = train(init_model(classes, data, cfg), data, cfg, opts);
      write_binary_file(train_out, save_model(r.model));
      write_text(train_history.empty() ? train_out + ".history.jsonl" : train_history,
                 r.history.to_jsonl(), out);
      const auto n = r.history.epochs.size();
      out << "saved " << train_out << " (" << n << (n == 1 ? " epoch)\n" : " epochs)\n");
    } else if (*predict_cmd) {
      Model m = load_model(read_binary_file(predict_model));
      m.config.threads = predict_threads;
      const Corpus input = read_conll_file(predict_input, predict_cols.options(true));
      write_text(predict_out, write_conll(predict(m, input)), out);
    } else if (*self_cmd) {
      const TrainConfig cfg = self_cfg.resolve(*self_cmd);
      const Corpus labeled = read_all(self_inputs, self_cols.options(), err);
      const Corpus unlabeled = read_conll_file(self_unlabeled, self_cols.options(true));
      std::optional<Corpus> dev;
      TrainOptions opts;
      opts.log = logger(err, quiet);
      if (!self_dev.empty()) {
        dev = read_conll_file(self_dev, self_cols.options());
        opts.dev = &*dev;
      }
      SelfTrainResult r = self_train(labeled, unlabeled, cfg, opts);
      for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      write_binary_file(self_out, save_model(r.model));
      if (!self_teacher.empty()) write_binary_file(self_teacher, save_model(r.teacher));
      const std::string weak = self_weak.empty() ? sibling(self_out, "weak.conll") : self_weak;
      write_conll_file(weak, r.weak);
      write_text(self_out + ".stage1.jsonl", r.teacher_history.to_jsonl(), out);
      write_text(self_out + ".stage2.jsonl", r.history.to_jsonl(), out);
      out << "saved " << self_out << ", " << weak << " (" << r.weak.sentences.size()
          << " weak sentences)\n";
    } else if (*eval_cmd) {
      const Corpus gold = read_conll_file(eval_gold, eval_cols.options());
      const Corpus pred = read_conll_file(eval_pred, eval_cols.options());
      ScoreOptions so;
      so.macro_absent_as_zero = eval_absent_zero;
      const EvalReport r = score(gold, pred, so);
      out << (eval_format == "text" ? r.to_text() : r.to_structured() + "\n");
    } else if (*grad_cmd) {
      return gradcheck(grad_seed, grad_points, out);
    } else if (*synth_cmd) {
      Corpus c = synthesize(synth);
      if (synth_strip) c = strip_labels(c);
      write_text(synth_out, write_conll(c), out);
    } else if (*abl_cmd) {
      const TrainConfig cfg = abl_cfg.resolve(*abl_cmd);
      const Corpus labeled = read_all(abl_inputs, abl_cols.options(), err);
      const Corpus unlabeled = read_conll_file(abl_unlabeled, abl_cols.options(true));
      const Corpus test = read_conll_file(abl_test, abl_cols.options());
      TrainOptions opts;
      opts.log = logger(err, quiet);
      const auto rows = run_ablation(labeled, unlabeled, test, cfg, opts);
      write_text(abl_out,
                 abl_format == "text" ? render_ablation_text(rows)
                                      : render_ablation_structured(rows) + "\n",
                 out);
    }
  } catch (const UsageError& e) {
    err << "nerkit: " << first_line(e.what()) << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "nerkit: numeric error: " << first_line(e.what()) << "\n";
    return kCheckFailed;
  } catch (const ShapeError& e) {
    err << "nerkit: shape error: " << first_line(e.what()) << "\n";
    return kCheckFailed;
  } catch (const std::exception& e) {
    err << "nerkit: " << first_line(e.what()) << "\n";
    return kDataError;
  }
  return kOk;
}

}  // namespace nerkit::cli
