#include "toxpipe/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "toxpipe/augment.hpp"
#include "toxpipe/corpus.hpp"
#include "toxpipe/embed.hpp"
#include "toxpipe/eval.hpp"
#include "toxpipe/model/pipeline.hpp"
#include "toxpipe/model/tuner.hpp"
#include "toxpipe/preprocess.hpp"
#include "toxpipe/sentiment.hpp"

namespace toxpipe {

std::size_t worker_threads() {
  if (const char* env = std::getenv("TOXPIPE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toxpipe::model;

const std::string kDataDir = TOXPIPE_DATA_DIR;

// Flags shared by the commands that build a text pipeline.
struct TextOptions {
  std::string slang = kDataDir + "/slang.tsv";
  std::string emoji = kDataDir + "/emoji.tsv";
  bool no_clean = false;

  CleanConfig config() const {
    if (no_clean) return CleanConfig::passthrough();
    CleanConfig c;
    if (!slang.empty()) c.slang_map = load_word_map(slang);
    if (!emoji.empty()) c.emoji_map = load_word_map(emoji);
    return c;
  }
};

void add_text_options(CLI::App* cmd, TextOptions& t) {
  cmd->add_option("--slang", t.slang, "slang map (key<TAB>value); empty to disable")->capture_default_str();
  cmd->add_option("--emoji", t.emoji, "emoji map (key<TAB>value); empty to disable")->capture_default_str();
  cmd->add_flag("--no-clean", t.no_clean, "skip every cleaning stage");
}

struct SplitOptions {
  std::vector<double> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  bool unstratified = false;

  SplitSpec spec() const {
    if (ratios.size() != 3) throw std::invalid_argument("--split needs three ratios");
    return {{ratios[0], ratios[1], ratios[2]}, seed, !unstratified};
  }
};

void add_split_options(CLI::App* cmd, SplitOptions& s) {
  cmd->add_option("--split", s.ratios, "train/validation/test ratios")->expected(3)->capture_default_str();
  cmd->add_option("--split-seed", s.seed, "seed for the corpus split")->capture_default_str();
  cmd->add_flag("--unstratified", s.unstratified, "split without per-class stratification");
}

// Everything needed to turn a labelled CSV into encoded train/val/test sets.
struct ModelOptions {
  ModelSpec spec;
  TrainConfig train;
  std::string head_input = "flatten";
  bool frozen_embedding = false;
  std::string embeddings;
  bool augment = false;
  std::string policy;
  std::vector<double> rebalance{0.5, 0.0, 0.0};
};

void add_model_options(CLI::App* cmd, ModelOptions& m) {
  auto& s = m.spec;
  cmd->add_option("--vocab-size", s.vocab_size, "maximum vocabulary size")->capture_default_str();
  cmd->add_option("--embed-dim", s.embed_dim, "embedding width")->capture_default_str();
  cmd->add_option("--max-len", s.max_len, "padded sequence length")->capture_default_str();
  cmd->add_option("--lstm1-units", s.lstm1_units)->capture_default_str();
  cmd->add_option("--lstm1-dropout", s.lstm1_dropout)->capture_default_str();
  cmd->add_option("--lstm2-units", s.lstm2_units)->capture_default_str();
  cmd->add_option("--lstm2-dropout", s.lstm2_dropout)->capture_default_str();
  cmd->add_option("--head-input", m.head_input, "flatten or final_state")->capture_default_str();
  cmd->add_option("--dense1-units", s.dense1_units)->capture_default_str();
  cmd->add_option("--dense1-dropout", s.dense1_dropout)->capture_default_str();
  cmd->add_option("--dense2-units", s.dense2_units)->capture_default_str();
  cmd->add_option("--dense2-dropout", s.dense2_dropout)->capture_default_str();
  cmd->add_option("--l2", s.l2, "L2 coefficient on the hidden dense kernels")->capture_default_str();
  cmd->add_flag("--frozen-embedding", m.frozen_embedding, "do not train the embedding matrix");
  cmd->add_option("--embeddings", m.embeddings, "pretrained vectors (word v1 ... vdim)");
  cmd->add_option("--batch-size", m.train.batch_size)->capture_default_str();
  cmd->add_option("--epochs", m.train.epochs)->capture_default_str();
  cmd->add_option("--lr", m.train.lr)->capture_default_str();
  cmd->add_option("--seed", m.train.seed, "seed for init, shuffling, dropout and augmentation")
      ->capture_default_str();
  cmd->add_flag("--augment", m.augment, "rebalance the training split by augmentation");
  cmd->add_option("--policy", m.policy, "augmentation policy JSON (default: composite)");
  cmd->add_option("--rebalance", m.rebalance, "per-class target ratio of the majority count, 0 = untouched")
      ->expected(3)
      ->capture_default_str();
}

struct Prepared {
  TextPipeline pipeline;
  ModelSpec spec;
  EncodedDataset train;
  EncodedDataset validation;
  EncodedDataset test;
  EmbeddingMatrix matrix;
  json config;
};

EmbeddingTable load_table(const std::string& path, std::size_t dim) {
  return path.empty() ? EmbeddingTable(dim) : load_embeddings(path, dim);
}

AugmentPolicy load_policy(const std::string& path, std::uint64_t seed) {
  if (path.empty()) return AugmentPolicy::composite(seed);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open policy " + path);
  return policy_from_json(json::parse(in));
}

RebalanceTarget rebalance_target(const std::vector<double>& ratios) {
  if (ratios.size() != 3) throw std::invalid_argument("--rebalance needs three ratios");
  RebalanceTarget t;
  for (int k = 0; k < kNumClasses; ++k)
    if (ratios[k] > 0) t.ratio[k] = ratios[k];
  return t;
}

Prepared prepare(const std::string& data, const TextOptions& text, const SplitOptions& split_opts,
                 ModelOptions m) {
  m.spec.head_input = head_input_from_string(m.head_input);
  m.spec.embedding = m.frozen_embedding ? EmbeddingMode::frozen : EmbeddingMode::trainable;
  const SplitSpec split_spec = split_opts.spec();
  const Corpus corpus = load_csv(data);
  Split parts = split(corpus, split_spec);
  const EmbeddingTable table = load_table(m.embeddings, m.spec.embed_dim);

  json augment_cfg = nullptr;
  if (m.augment) {
    const AugmentPolicy policy = load_policy(m.policy, m.train.seed);
    parts.train = rebalance(parts.train, rebalance_target(m.rebalance), policy, table);
    augment_cfg = {{"policy", policy_to_json(policy)}, {"rebalance", m.rebalance}};
  }

  Prepared p;
  p.pipeline.clean = text.config();
  std::vector<std::vector<std::string>> docs;
  docs.reserve(parts.train.size());
  for (const auto& ex : parts.train) docs.push_back(split_tokens(clean(ex.text, p.pipeline.clean)));
  p.pipeline.vocab = build_vocab(docs, m.spec.vocab_size);
  p.pipeline.max_len = m.spec.max_len;
  // The embedding is sized to the words actually observed.
  m.spec.vocab_size = p.pipeline.vocab.size();
  m.spec.check();
  p.spec = m.spec;
  p.train = encode_corpus(parts.train, p.pipeline);
  p.validation = encode_corpus(parts.validation, p.pipeline);
  p.test = encode_corpus(parts.test, p.pipeline);
  p.matrix = build_matrix(p.pipeline.vocab, table, m.spec.embed_dim, nn::mix_seed(m.train.seed, 0xe3b));

  p.config = {{"data", data},
              {"split", split_spec},
              {"clean", p.pipeline.clean},
              {"spec", p.spec},
              {"train", m.train},
              {"embeddings", m.embeddings.empty() ? json(nullptr) : json(m.embeddings)},
              {"augment", augment_cfg},
              {"vocab_hash", p.pipeline.vocab.hash()}};
  return p;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json eval_report(const Evaluation& ev, const std::vector<int>& labels, const CostMatrix* costs) {
  const ConfusionMatrix cm = confusion(ev.predictions, labels);
  json j = {{"examples", labels.size()},
            {"loss", ev.loss},
            {"confusion", cm},
            {"metrics", metrics(cm)},
            {"binary", binary_view(cm)}};
  if (costs) {
    j["costs"] = *costs;
    j["expected_cost"] = expected_cost(cm, *costs);
  }
  return j;
}

std::vector<std::string> argv_vector(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hate and offensive tweet classification pipeline", "toxpipe"};
  app.require_subcommand(1);

  std::string data, out_path, out_dir, model_path, text, input, config_path;
  TextOptions text_opts;
  SplitOptions split_opts;
  ModelOptions model_opts;

  auto* validate_cmd = app.add_subcommand("validate", "check a labelled CSV and print a JSON report");
  validate_cmd->add_option("--data", data, "labelled CSV")->required();

  auto* stats_cmd = app.add_subcommand("stats", "class distribution and per-class sentiment");
  std::string lexicon_path = kDataDir + "/lexicon.txt";
  stats_cmd->add_option("--data", data, "labelled CSV")->required();
  stats_cmd->add_option("--lexicon", lexicon_path, "word polarity subjectivity file")->capture_default_str();
  add_text_options(stats_cmd, text_opts);

  auto* augment_cmd = app.add_subcommand("augment", "rebalance the training split and write it as CSV");
  augment_cmd->add_option("--data", data, "labelled CSV")->required();
  augment_cmd->add_option("--out", out_path, "output CSV")->required();
  augment_cmd->add_option("--policy", model_opts.policy, "augmentation policy JSON (default: composite)");
  augment_cmd->add_option("--embeddings", model_opts.embeddings, "vectors used for synonyms");
  augment_cmd->add_option("--embed-dim", model_opts.spec.embed_dim)->capture_default_str();
  augment_cmd->add_option("--seed", model_opts.train.seed)->capture_default_str();
  augment_cmd->add_option("--rebalance", model_opts.rebalance)->expected(3)->capture_default_str();
  add_split_options(augment_cmd, split_opts);

  auto* train_cmd = app.add_subcommand("train", "train a classifier; writes model.toxm, history.csv, run_config.json");
  train_cmd->add_option("--data", data, "labelled CSV")->required();
  train_cmd->add_option("--out-dir", out_dir, "output directory")->default_val(".");
  add_model_options(train_cmd, model_opts);
  add_text_options(train_cmd, text_opts);
  add_split_options(train_cmd, split_opts);

  auto* tune_cmd = app.add_subcommand("tune", "random search over the hyperparameter space");
  TuneSettings tune_settings;
  tune_cmd->add_option("--data", data, "labelled CSV")->required();
  tune_cmd->add_option("--out", out_path, "leaderboard JSON")->required();
  tune_cmd->add_option("--budget", tune_settings.budget, "candidates to train")->capture_default_str();
  tune_cmd->add_option("--tune-epochs", tune_settings.epochs, "epochs per candidate")->capture_default_str();
  tune_cmd->add_option("--unit-divisor", tune_settings.unit_divisor, "divide sampled unit counts by this")
      ->capture_default_str();
  add_model_options(tune_cmd, model_opts);
  add_text_options(tune_cmd, text_opts);
  add_split_options(tune_cmd, split_opts);

  auto* eval_cmd = app.add_subcommand("eval", "metrics and costs of a checkpoint on the test split");
  double fp_cost = -1, fn_cost = -1;
  std::string costs_path, confusion_csv;
  bool eval_all = false;
  eval_cmd->add_option("--model", model_path, "checkpoint")->required();
  eval_cmd->add_option("--data", data, "labelled CSV")->required();
  eval_cmd->add_flag("--all", eval_all, "evaluate every row instead of the stored test split");
  eval_cmd->add_option("--fp-cost", fp_cost, "cost of flagging an acceptable tweet as hate");
  eval_cmd->add_option("--fn-cost", fn_cost, "cost of missing a hate tweet");
  eval_cmd->add_option("--costs", costs_path, "3x3 cost matrix JSON");
  eval_cmd->add_option("--confusion-csv", confusion_csv, "also write the confusion matrix as CSV");
  eval_cmd->add_option("--out", out_path, "write the report here instead of stdout");

  auto* classify_cmd = app.add_subcommand("classify", "print `class p_hate p_offensive p_neither` per input");
  classify_cmd->add_option("--model", model_path, "checkpoint")->required();
  auto* text_opt = classify_cmd->add_option("--text", text, "single text");
  auto* input_opt = classify_cmd->add_option("--input", input, "file with one text per line");
  text_opt->excludes(input_opt);

  auto* rerun_cmd = app.add_subcommand("rerun", "repeat the command recorded in a run_config.json");
  rerun_cmd->add_option("--config", config_path, "run_config.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const auto args = argv_vector(argc, argv);
  try {
    if (*validate_cmd) {
      out << json(validate(load_csv(data))).dump(2) << '\n';
    } else if (*stats_cmd) {
      const Corpus corpus = load_csv(data);
      const auto counts = class_counts(corpus);
      const auto dist = class_distribution(corpus);
      json j = {{"examples", corpus.size()}, {"class_counts", counts}, {"class_distribution", dist}};
      if (!lexicon_path.empty())
        j["sentiment"] = class_sentiment_report(corpus, load_lexicon(lexicon_path), text_opts.config());
      out << j.dump(2) << '\n';
    } else if (*augment_cmd) {
      const Split parts = split(load_csv(data), split_opts.spec());
      const AugmentPolicy policy = load_policy(model_opts.policy, model_opts.train.seed);
      const EmbeddingTable table = load_table(model_opts.embeddings, model_opts.spec.embed_dim);
      const Corpus balanced = rebalance(parts.train, rebalance_target(model_opts.rebalance), policy, table);
      write_csv(fs::path(out_path), balanced);
      const auto counts = class_counts(balanced);
      write_json(out_path + ".run_config.json",
                 {{"command", "augment"},
                  {"args", args},
                  {"data", data},
                  {"split", split_opts.spec()},
                  {"policy", policy_to_json(policy)},
                  {"rebalance", model_opts.rebalance},
                  {"embeddings", model_opts.embeddings},
                  {"class_counts", counts}});
      out << json{{"examples", balanced.size()}, {"class_counts", counts}}.dump() << '\n';
    } else if (*train_cmd) {
      Prepared p = prepare(data, text_opts, split_opts, model_opts);
      const fs::path dir(out_dir);
      fs::create_directories(dir);
      Model model(p.spec, p.matrix, model_opts.train.seed);
      const History history = train(model, p.train, p.validation, model_opts.train);
      save_checkpoint(dir / "model.toxm", model, p.pipeline, p.config);
      {
        std::ofstream h(dir / "history.csv");
        write_history_csv(h, history);
      }
      json run = p.config;
      run["command"] = "train";
      run["args"] = args;
      run["out_dir"] = out_dir;
      write_json(dir / "run_config.json", run);
      const Evaluation test = evaluate(model, p.test);
      out << json{{"best_epoch", history.best_epoch},
                  {"val_accuracy", history.val_acc[history.best_epoch - 1]},
                  {"test_accuracy", test.accuracy},
                  {"param_count", model.param_count()}}
                 .dump()
          << '\n';
    } else if (*tune_cmd) {
      Prepared p = prepare(data, text_opts, split_opts, model_opts);
      tune_settings.seed = model_opts.train.seed;
      tune_settings.base = p.spec;
      tune_settings.train = model_opts.train;
      tune_settings.threads = worker_threads();
      const TuneResult result = tune(SearchSpace::standard(), tune_settings, p.train, p.validation, p.matrix);
      write_json(out_path, result);
      json run = p.config;
      run["command"] = "tune";
      run["args"] = args;
      run["tune"] = {{"budget", tune_settings.budget},
                     {"epochs", tune_settings.epochs},
                     {"unit_divisor", tune_settings.unit_divisor},
                     {"threads", tune_settings.threads}};
      write_json(out_path + ".run_config.json", run);
      out << json(result.best).dump() << '\n';
    } else if (*eval_cmd) {
      LoadedModel loaded = load_checkpoint(model_path);
      const Corpus corpus = load_csv(data);
      const Corpus rows = eval_all ? corpus : split(corpus, loaded.run.at("split").get<SplitSpec>()).test;
      const EncodedDataset set = encode_corpus(rows, loaded.pipeline);
      std::optional<CostMatrix> costs;
      if (!costs_path.empty()) {
        std::ifstream in(costs_path);
        if (!in) throw std::runtime_error("cannot open " + costs_path);
        costs = json::parse(in).get<CostMatrix>();
      } else if (fp_cost >= 0 || fn_cost >= 0) {
        if (fp_cost < 0 || fn_cost < 0) throw std::invalid_argument("--fp-cost and --fn-cost go together");
        costs = CostMatrix::from_binary(fp_cost, fn_cost);
      }
      const Evaluation ev = evaluate(loaded.model, set);
      const json report = eval_report(ev, set.labels, costs ? &*costs : nullptr);
      if (!confusion_csv.empty()) {
        std::ofstream c(confusion_csv);
        if (!c) throw std::runtime_error("cannot write " + confusion_csv);
        write_confusion_csv(c, confusion(ev.predictions, set.labels));
      }
      if (out_path.empty())
        out << report.dump(2) << '\n';
      else
        write_json(out_path, report);
    } else if (*classify_cmd) {
      if (text_opt->count() == 0 && input_opt->count() == 0)
        throw std::invalid_argument("classify needs --text or --input");
      const LoadedModel loaded = load_checkpoint(model_path);
      auto emit = [&](const std::string& line) {
        const Prediction p = predict(loaded.model, line, loaded.pipeline);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f\n", p.label, p.probs[0], p.probs[1], p.probs[2]);
        out << buf;
      };
      if (text_opt->count()) {
        emit(text);
      } else {
        std::ifstream in(input);
        if (!in) throw std::runtime_error("cannot open " + input);
        for (std::string line; std::getline(in, line);) {
          if (!line.empty() && line.back() == '\r') line.pop_back();
          emit(line);
        }
      }
    } else if (*rerun_cmd) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open " + config_path);
      const auto recorded = json::parse(in).at("args").get<std::vector<std::string>>();
      if (!recorded.empty() && recorded.front() == "rerun") throw std::invalid_argument("recursive rerun");
      std::vector<const char*> replay{"toxpipe"};
      for (const auto& a : recorded) replay.push_back(a.c_str());
      return run_cli(static_cast<int>(replay.size()), replay.data(), out, err);
    }
  } catch (const std::exception& e) {
    err << "toxpipe " << args.front() << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace toxpipe
