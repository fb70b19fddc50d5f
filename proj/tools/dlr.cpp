// dlr: command-line driver for mining, corpus building, training,
// evaluation and interactive debugging.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "dlr/common/error.hpp"
#include "dlr/common/text.hpp"
#include "dlr/corpus/dataset_io.hpp"
#include "dlr/corpus/example.hpp"
#include "dlr/corpus/split.hpp"
#include "dlr/corpus/tokenizer.hpp"
#include "dlr/eval/end_to_end.hpp"
#include "dlr/miner/commit.hpp"
#include "dlr/miner/functions.hpp"
#include "dlr/miner/line_diff.hpp"
#include "dlr/miner/sample_builder.hpp"
#include "dlr/model/checkpoint.hpp"
#include "dlr/model/predictor.hpp"
#include "dlr/train/synthetic.hpp"
#include "dlr/train/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace dlr::cli {
namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
  json config = json::object();  // parsed --config

  json section(const char* name) const { return config.contains(name) ? config.at(name) : json::object(); }
  fs::path out(const std::string& file) const { return fs::path(out_dir) / file; }
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

// JSON first, then the human-readable rendering unless --quiet.
void emit(const Globals& g, const json& summary, const std::string& human) {
  std::cout << summary.dump(2) << '\n';
  if (!g.quiet && !human.empty()) std::cout << '\n' << human;
  std::cout.flush();
}

void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw UsageError(std::string(what) + " not found: " + path);
}

std::vector<std::string> texts_for_tokenizer(const std::vector<DebugSample>& samples) {
  std::vector<std::string> texts;
  texts.reserve(samples.size() * 2);
  for (const auto& s : samples) {
    texts.push_back(text::join_lines(s.before_lines));
    if (s.function_label) texts.push_back(text::join_lines(s.after_lines));
  }
  return texts;
}

SequenceLimits limits_of(const model::ModelConfig& mc) { return {mc.max_source_len, mc.max_target_len}; }

Tokenizer checkpoint_tokenizer(const model::Checkpoint& ck, const std::string& path) {
  if (!ck.tokenizer) throw DataError("checkpoint " + path + " carries no tokenizer");
  return *ck.tokenizer;
}

// ------------------------------------------------------------------ mine --

struct MineArgs {
  std::string input;
  std::string output;
};

int cmd_mine(const Globals& g, const MineArgs& a) {
  require_file(a.input, "commit export");
  const auto commits = miner::read_commit_export(fs::path(a.input));
  auto result = miner::build_samples(commits);
  const fs::path out = a.output.empty() ? g.out("dataset.jsonl") : fs::path(a.output);
  write_dataset(out, result.samples);
  json summary = result.stats.to_json();
  summary["output"] = out.string();
  write_text(g.out("mining_summary.json"), summary.dump(2) + "\n");

  std::ostringstream human;
  human << "scanned " << result.stats.commits_scanned << " commits, " << result.stats.bugfix_commits
        << " bug-fix, " << result.stats.samples_emitted << " samples -> " << out.string() << '\n';
  for (const auto& [pattern, count] : result.stats.patterns) human << "  " << pattern << ' ' << count << '\n';
  emit(g, summary, human.str());
  return 0;
}

// ----------------------------------------------------------------- synth --

struct SynthArgs {
  int commits = 32;
  int projects = 8;
  int noise = 0;
  std::string output;
};

int cmd_synth(const Globals& g, const SynthArgs& a) {
  train::SyntheticOptions opts;
  opts.num_projects = a.projects;
  opts.noise_commits = a.noise;
  const auto commits = train::synthetic_commits(a.commits, g.seed, opts);
  const fs::path out = a.output.empty() ? g.out("commits.jsonl") : fs::path(a.output);
  miner::write_commit_export(out, commits);
  emit(g, {{"commits", commits.size()}, {"output", out.string()}},
       "wrote " + std::to_string(commits.size()) + " synthetic commits to " + out.string() + "\n");
  return 0;
}

// ---------------------------------------------------------- build-corpus --

struct CorpusArgs {
  std::string input;
  int vocab_size = 0;
  std::vector<double> ratios;
};

int cmd_build_corpus(const Globals& g, const CorpusArgs& a) {
  require_file(a.input, "dataset");
  const json cfg = g.section("corpus");
  int vocab = a.vocab_size > 0 ? a.vocab_size : cfg.value("vocab_size", 1000);
  SplitRatios ratios;
  std::vector<double> r = a.ratios;
  if (r.empty() && cfg.contains("ratios")) r = cfg.at("ratios").get<std::vector<double>>();
  if (!r.empty()) {
    if (r.size() != 3) throw UsageError("--ratios takes three values: train val test");
    ratios = {r[0], r[1], r[2]};
  }

  const auto samples = read_dataset(fs::path(a.input));
  const auto split = split_by_project(samples, ratios, g.seed);
  if (split.train.empty()) throw DataError("training split is empty");
  const auto tok = train_tokenizer(texts_for_tokenizer(split.train), vocab);

  write_dataset(g.out("train.jsonl"), split.train);
  write_dataset(g.out("val.jsonl"), split.val);
  write_dataset(g.out("test.jsonl"), split.test);
  tok.save(g.out("tokenizer.json"));

  const auto tr = compute_statistics(split.train);
  const auto va = compute_statistics(split.val);
  const auto te = compute_statistics(split.test);
  auto stats = [](const SplitStatistics& s) { return json{{"projects", s.projects}, {"instances", s.instances}}; };
  const json summary{{"train", stats(tr)},
                     {"val", stats(va)},
                     {"test", stats(te)},
                     {"vocab_size", tok.size()},
                     {"seed", g.seed}};
  write_text(g.out("corpus_summary.json"), summary.dump(2) + "\n");
  emit(g, summary, format_split_table(tr, va, te));
  return 0;
}

// ----------------------------------------------------------------- train --

struct TrainArgs {
  std::string corpus_dir;
  std::string resume;
  std::string mask;
  int steps = -1;
  int batch_size = -1;
  double lr = -1;
  int eval_interval = -1;
  int patience = std::numeric_limits<int>::min();
  double target_score = -1;
};

std::vector<TokenizedExample> load_examples(const fs::path& path, const Tokenizer& tok, const model::ModelConfig& mc,
                                            std::vector<BugPattern>* patterns = nullptr) {
  const auto samples = read_dataset(path);
  auto built = build_examples(samples, tok, limits_of(mc));
  if (patterns) {
    const auto groups = eval::breakdown_groups(samples);
    patterns->clear();
    for (auto i : built.sample_index) patterns->push_back(groups[i]);
  }
  return std::move(built.examples);
}

int cmd_train(const Globals& g, const TrainArgs& a) {
  const fs::path dir(a.corpus_dir);
  for (const char* f : {"train.jsonl", "val.jsonl", "tokenizer.json"}) require_file((dir / f).string(), "corpus file");
  if (!a.resume.empty()) require_file(a.resume, "checkpoint");

  train::TrainConfig tc = train::TrainConfig::from_json(g.section("train"), {});
  tc.seed = g.seed;
  if (!a.mask.empty()) tc.mask = model::ObjectiveMask::parse(a.mask);
  if (a.steps >= 0) tc.max_steps = a.steps;
  if (a.batch_size > 0) tc.batch_size = a.batch_size;
  if (a.lr > 0) tc.learning_rate = a.lr;
  if (a.eval_interval > 0) tc.eval_interval = a.eval_interval;
  if (a.patience != std::numeric_limits<int>::min()) tc.patience = a.patience;
  if (a.target_score >= 0) tc.target_score = a.target_score;
  tc.validate();

  const auto tok = Tokenizer::load(dir / "tokenizer.json");
  auto mc = model::ModelConfig::from_json(g.section("model"));
  mc.vocab_size = tok.size();
  mc.seed = g.seed;

  std::optional<train::TrainState> state;
  if (!a.resume.empty()) {
    auto ck = model::load_checkpoint(a.resume);
    if (ck.params.config.vocab_size != tok.size()) throw DataError("checkpoint vocabulary does not match the corpus");
    mc = ck.params.config;
    state = train::TrainState::from_checkpoint(ck);
  }
  const auto train_set = load_examples(dir / "train.jsonl", tok, mc);
  const auto val_set = load_examples(dir / "val.jsonl", tok, mc);

  std::ofstream log(g.out("train_log.jsonl"), a.resume.empty() ? std::ios::trunc : std::ios::app);
  if (!log) throw DataError("cannot write " + g.out("train_log.jsonl").string());
  train::FitOptions opts;
  opts.log = &log;
  opts.last_checkpoint = g.out("last.ckpt");
  opts.tokenizer = tok;
  const auto result = state ? train::fit(tc, std::move(*state), train_set, val_set, opts)
                            : train::fit(tc, mc, train_set, val_set, opts);
  model::save_checkpoint(result.best, g.out("model.ckpt"));

  json history = json::array();
  for (const auto& h : result.history) history.push_back({{"step", h.step}, {"val_metrics", h.metrics.to_json()}});
  const json summary{{"steps", result.steps},
                     {"stop_reason", result.stop_reason},
                     {"best_score", result.best.train_state.value("best_score", -1.0)},
                     {"train_examples", train_set.size()},
                     {"val_examples", val_set.size()},
                     {"train_config", tc.to_json()},
                     {"model_config", mc.to_json()},
                     {"history", history},
                     {"checkpoint", g.out("model.ckpt").string()}};
  write_text(g.out("train_summary.json"), summary.dump(2) + "\n");

  std::ostringstream human;
  human << "trained " << result.steps << " steps (" << result.stop_reason << "), mask " << tc.mask.to_string()
        << '\n';
  for (const auto& h : result.history) {
    human << "  step " << std::setw(5) << h.step << "  loss " << std::fixed << std::setprecision(4) << h.losses.total
          << "  val score " << h.metrics.score << '\n';
  }
  human << "best checkpoint: " << g.out("model.ckpt").string() << '\n';
  emit(g, summary, human.str());
  return 0;
}

// -------------------------------------------------------------- evaluate --

struct EvalArgs {
  std::string model;
  std::string data;
  bool detect_via_repair = false;
  int beam_width = 0;
};

int cmd_evaluate(const Globals& g, const EvalArgs& a) {
  require_file(a.model, "checkpoint");
  require_file(a.data, "dataset");
  auto mcfg = eval::MetricConfig::from_json(g.section("metrics"), {});
  if (a.detect_via_repair) mcfg.detect_via_repair = true;
  if (a.beam_width > 0) mcfg.beam_width = a.beam_width;
  mcfg.validate();

  const auto ck = model::load_checkpoint(a.model);
  const auto tok = checkpoint_tokenizer(ck, a.model);
  std::vector<BugPattern> patterns;
  const auto examples = load_examples(a.data, tok, ck.params.config, &patterns);
  if (examples.empty()) throw DataError("no usable examples in " + a.data);

  const model::ModelPredictor predictor(ck.params);
  const auto report = eval::evaluate(predictor, examples, patterns, tok, mcfg);
  json summary = report.to_json();
  summary["metric_config"] = mcfg.to_json();
  write_text(g.out("metrics.json"), summary.dump(2) + "\n");
  write_text(g.out("per_pattern.csv"), report.per_pattern_csv());
  emit(g, summary, report.to_table());
  return 0;
}

// ----------------------------------------------------------------- debug --

struct DebugArgs {
  std::string model;
  std::string source;
  std::string function;
  std::string language;
  int top = 5;
};

miner::Language language_for(const DebugArgs& a) {
  if (!a.language.empty()) {
    const auto lang = miner::parse_language(a.language);
    if (!lang) throw UsageError("unsupported language: " + a.language);
    return *lang;
  }
  return fs::path(a.source).extension() == ".py" ? miner::Language::Python : miner::Language::Java;
}

// Unified before/after view of a repair.
std::string render_diff(const std::vector<std::string>& before, const std::vector<std::string>& after) {
  const auto d = miner::diff_lines(before, after);
  std::ostringstream os;
  os << "--- before\n+++ repair\n";
  std::size_t i = 0, j = 0;
  auto removed = [&](std::size_t k) { return std::binary_search(d.changed_before.begin(), d.changed_before.end(), k); };
  auto added = [&](std::size_t k) { return std::binary_search(d.changed_after.begin(), d.changed_after.end(), k); };
  while (i < before.size() || j < after.size()) {
    if (i < before.size() && removed(i)) {
      os << "- " << before[i++] << '\n';
    } else if (j < after.size() && added(j)) {
      os << "+ " << after[j++] << '\n';
    } else {
      if (i < before.size()) os << "  " << before[i] << '\n';
      ++i;
      ++j;
    }
  }
  return os.str();
}

int cmd_debug(const Globals& g, const DebugArgs& a) {
  require_file(a.model, "checkpoint");
  require_file(a.source, "source file");
  const auto ck = model::load_checkpoint(a.model);
  const auto tok = checkpoint_tokenizer(ck, a.model);
  auto mcfg = eval::MetricConfig::from_json(g.section("metrics"), {});

  std::ifstream in(a.source, std::ios::binary);
  const std::string source((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto extracted = miner::extract_functions(source, language_for(a));
  std::vector<const miner::FunctionSpan*> chosen;
  for (const auto& f : extracted.functions) {
    if (a.function.empty() || f.name == a.function) chosen.push_back(&f);
  }
  if (chosen.empty()) {
    std::string names;
    for (const auto& f : extracted.functions) names += (names.empty() ? "" : ", ") + f.name;
    if (!a.function.empty()) {
      throw UsageError("no function named " + a.function + " in " + a.source +
                       "; available: " + (names.empty() ? "(none)" : names));
    }
    throw DataError("no functions found in " + a.source);
  }

  const model::ModelPredictor predictor(ck.params);
  json functions = json::array();
  std::ostringstream human;
  for (const auto* f : chosen) {
    const auto lines = text::dedent(f->body_lines);
    const auto ex = build_example(make_clean_sample(lines), tok, limits_of(ck.params.config));
    model::PredictOptions opts;
    opts.beam.width = mcfg.beam_width;
    opts.beam.length_penalty = mcfg.length_penalty;
    opts.beam.max_len =
        static_cast<int>(mcfg.max_len_ratio * static_cast<double>(ex.input_ids.size())) + mcfg.max_len_offset;
    const auto p = predictor.predict(ex, opts);
    const bool buggy = model::is_buggy(p.detect_prob, mcfg.threshold);
    const std::string repair = eval::top_repair_text(p, tok);
    const bool repair_says_buggy = model::detect_via_repair(text::join_lines(lines), repair);

    json suspicious = json::array();
    const auto ranking = p.line_ranking();
    for (std::size_t r = 0; r < ranking.size() && r < static_cast<std::size_t>(a.top); ++r) {
      const auto idx = static_cast<std::size_t>(ranking[r]);
      suspicious.push_back({{"line", f->start_line + idx + 1},
                            {"score", p.line_probs[idx]},
                            {"text", lines[idx]}});
    }
    json entry{{"name", f->name},
               {"start_line", f->start_line + 1},
               {"end_line", f->end_line + 1},
               {"verdict", buggy ? "buggy" : "clean"},
               {"probability", p.detect_prob},
               {"suspicious_lines", suspicious},
               {"repair", buggy ? json(repair) : json(nullptr)},
               {"heads_disagree", buggy != repair_says_buggy}};
    if (ex.num_lines() < lines.size()) entry["truncated_lines"] = lines.size() - ex.num_lines();

    human << f->name << " (lines " << f->start_line + 1 << "-" << f->end_line + 1 << "): "
          << (buggy ? "BUGGY" : "clean") << "  p=" << std::fixed << std::setprecision(4) << p.detect_prob << '\n';
    if (buggy) {
      human << "  suspicious lines:\n";
      for (const auto& s : suspicious) {
        human << "    " << std::setw(5) << s["line"].get<std::size_t>() << "  " << std::setprecision(4)
              << s["score"].get<double>() << "  " << s["text"].get<std::string>() << '\n';
      }
      human << render_diff(lines, text::split_lines(repair));
    }
    if (buggy != repair_says_buggy) {
      // Repair stays gated on the detection verdict; the raw output is logged.
      std::cerr << "note: repair head " << (repair_says_buggy ? "proposes a change for" : "reproduces")
                << " function " << f->name << " judged " << (buggy ? "buggy" : "clean") << '\n';
      entry["raw_repair"] = repair;
    }
    functions.push_back(entry);
  }
  json summary{{"source", a.source}, {"functions", functions}};
  if (!extracted.warnings.empty()) summary["warnings"] = extracted.warnings;
  emit(g, summary, human.str());
  return 0;
}

// ---------------------------------------------------------------- report --

struct ReportArgs {
  std::vector<std::string> metrics;
  std::string corpus_dir;
};

std::string cell(const json& j, const json::json_pointer& ptr, int precision = 4) {
  if (!j.contains(ptr) || j.at(ptr).is_null()) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << j.at(ptr).get<double>();
  return os.str();
}

int cmd_report(const Globals& g, const ReportArgs& a) {
  if (a.metrics.empty() && a.corpus_dir.empty()) throw UsageError("report needs --metrics files or --corpus");
  json summary = json::object();
  std::ostringstream human;
  if (!a.corpus_dir.empty()) {
    const fs::path dir(a.corpus_dir);
    std::vector<SplitStatistics> stats;
    for (const char* f : {"train.jsonl", "val.jsonl", "test.jsonl"}) {
      require_file((dir / f).string(), "corpus file");
      stats.push_back(compute_statistics(read_dataset(dir / f)));
    }
    summary["splits"] = {{"train", {{"projects", stats[0].projects}, {"instances", stats[0].instances}}},
                         {"val", {{"projects", stats[1].projects}, {"instances", stats[1].instances}}},
                         {"test", {{"projects", stats[2].projects}, {"instances", stats[2].instances}}}};
    human << format_split_table(stats[0], stats[1], stats[2]) << '\n';
  }
  if (!a.metrics.empty()) {
    json rows = json::array();
    human << std::left << std::setw(28) << "run" << std::right << std::setw(8) << "F1" << std::setw(8) << "FPR"
          << std::setw(8) << "MRR@1" << std::setw(8) << "MRR@5" << std::setw(8) << "MAP@5" << std::setw(8) << "EM"
          << std::setw(8) << "BLEU" << std::setw(8) << "BL" << std::setw(8) << "PR" << '\n';
    for (const auto& path : a.metrics) {
      require_file(path, "metrics file");
      const json m = read_json_file(path);
      const std::string name = fs::path(path).parent_path().filename().string().empty()
                                   ? path
                                   : fs::path(path).parent_path().filename().string();
      rows.push_back({{"run", name}, {"metrics", path}, {"detection", m.value("detection", json())},
                      {"end_to_end", m.value("end_to_end", json())}});
      human << std::left << std::setw(28) << name.substr(0, 27) << std::right << std::setw(8)
            << cell(m, "/detection/f1"_json_pointer) << std::setw(8) << cell(m, "/detection/fpr"_json_pointer)
            << std::setw(8) << cell(m, "/localization/mrr@1"_json_pointer) << std::setw(8)
            << cell(m, "/localization/mrr@5"_json_pointer) << std::setw(8)
            << cell(m, "/localization/map@5"_json_pointer) << std::setw(8) << cell(m, "/repair/em"_json_pointer)
            << std::setw(8) << cell(m, "/repair/bleu"_json_pointer, 2) << std::setw(8)
            << cell(m, "/end_to_end/bl"_json_pointer) << std::setw(8) << cell(m, "/end_to_end/pr"_json_pointer, 2)
            << '\n';
    }
    summary["runs"] = rows;
  }
  emit(g, summary, human.str());
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Joint bug detection, localization and repair toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--config", g.config_path, "JSON file with model/train/metrics/corpus sections");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--quiet", g.quiet, "Print only the JSON summary");

  MineArgs mine;
  auto* c_mine = app.add_subcommand("mine", "Mine debug samples from a commit export");
  c_mine->add_option("input", mine.input, "Commit export (JSON lines)")->required();
  c_mine->add_option("-o,--output", mine.output, "Dataset path (default <out>/dataset.jsonl)");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic commit export with planted bugs");
  c_synth->add_option("--commits", synth.commits, "Bug-fix commits")->capture_default_str();
  c_synth->add_option("--projects", synth.projects, "Distinct projects")->capture_default_str();
  c_synth->add_option("--noise", synth.noise, "Additional non-fix commits")->capture_default_str();
  c_synth->add_option("-o,--output", synth.output, "Export path (default <out>/commits.jsonl)");

  CorpusArgs corpus;
  auto* c_corpus = app.add_subcommand("build-corpus", "Split a dataset by project and train the tokenizer");
  c_corpus->add_option("input", corpus.input, "Dataset (JSON lines)")->required();
  c_corpus->add_option("--vocab-size", corpus.vocab_size, "Tokenizer vocabulary size (default 1000)");
  c_corpus->add_option("--ratios", corpus.ratios, "Train/val/test project fractions")->expected(3);

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a model on a built corpus");
  c_train->add_option("corpus", tr.corpus_dir, "Directory written by build-corpus")->required();
  c_train->add_option("--resume", tr.resume, "Continue from a last.ckpt");
  c_train->add_option("--mask", tr.mask, "Objectives: any of D, L, R (default DLR)");
  c_train->add_option("--steps", tr.steps, "Maximum optimizer steps");
  c_train->add_option("--batch-size", tr.batch_size, "Examples per step");
  c_train->add_option("--lr", tr.lr, "Peak learning rate");
  c_train->add_option("--eval-interval", tr.eval_interval, "Steps between validations");
  c_train->add_option("--patience", tr.patience, "Non-improving validations tolerated (negative: never stop)");
  c_train->add_option("--target-score", tr.target_score, "Stop once the validation score reaches this");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score a checkpoint on a dataset");
  c_eval->add_option("--model", ev.model, "Checkpoint")->required();
  c_eval->add_option("--data", ev.data, "Dataset (JSON lines)")->required();
  c_eval->add_flag("--detect-via-repair", ev.detect_via_repair, "Judge bugginess by whether the repair changes code");
  c_eval->add_option("--beam-width", ev.beam_width, "Beam width for repairs");

  DebugArgs dbg;
  auto* c_debug = app.add_subcommand("debug", "Detect, localize and repair functions of a source file");
  c_debug->add_option("--model", dbg.model, "Checkpoint")->required();
  c_debug->add_option("source", dbg.source, "Source file")->required();
  c_debug->add_option("--function", dbg.function, "Only this function");
  c_debug->add_option("--language", dbg.language, "java or python (default from extension)");
  c_debug->add_option("--top", dbg.top, "Suspicious lines to show")->capture_default_str();

  ReportArgs rep;
  auto* c_report = app.add_subcommand("report", "Tabulate metrics files and corpus statistics");
  c_report->add_option("--metrics", rep.metrics, "metrics.json files, one row each");
  c_report->add_option("--corpus", rep.corpus_dir, "Directory written by build-corpus");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (!g.config_path.empty()) {
      require_file(g.config_path, "config file");
      g.config = read_json_file(g.config_path);
      if (!g.config.is_object()) throw UsageError("config file must hold a JSON object");
    }
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec || !fs::is_directory(g.out_dir)) throw UsageError("cannot create output directory " + g.out_dir);

    if (*c_mine) return cmd_mine(g, mine);
    if (*c_synth) return cmd_synth(g, synth);
    if (*c_corpus) return cmd_build_corpus(g, corpus);
    if (*c_train) return cmd_train(g, tr);
    if (*c_eval) return cmd_evaluate(g, ev);
    if (*c_debug) return cmd_debug(g, dbg);
    if (*c_report) return cmd_report(g, rep);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "usage error: bad configuration value: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace
}  // namespace dlr::cli

int main(int argc, char** argv) { return dlr::cli::run(argc, argv); }
