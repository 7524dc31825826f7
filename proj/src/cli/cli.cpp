#include "dre/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "dre/cli/config.hpp"
#include "dre/cli/manifest.hpp"
#include "dre/data/dataset.hpp"
#include "dre/data/tfidf.hpp"
#include "dre/embedding/contextual_store.hpp"
#include "dre/error.hpp"
#include "dre/model/model_gradcheck.hpp"
#include "dre/train/ablate.hpp"
#include "dre/train/train.hpp"

namespace fs = std::filesystem;

namespace dre::cli {
namespace {

constexpr double kGradCheckTolerance = 1e-4;

struct OverrideFlag {
  const char* flag;
  const char* key;
  const char* help;
};

constexpr OverrideFlag kOverrideFlags[] = {
    {"--seed", "train.seed", "Random seed"},
    {"--layers", "model.layers", "Bi-LSTM layers"},
    {"--hidden", "model.hidden", "Hidden units per direction"},
    {"--residual", "model.residual", "Dense residual wiring: on or off"},
    {"--mode", "model.mode", "Embedding mode: lookup or contextual"},
    {"--embeddings", "model.embeddings", "Contextual embedding store (DREE file)"},
    {"--max-len", "train.max_len", "Maximum joint sequence length"},
    {"--batch-size", "train.batch_size", "Examples per batch"},
    {"--epochs", "train.max_epochs", "Maximum training epochs"},
    {"--train", "data.train", "Training set"},
    {"--dev", "data.dev", "Development set"},
    {"--test", "data.test", "Test set"},
    {"--questions", "data.questions", "Question list for mining"},
    {"--format", "data.format", "Dataset format: jsonl or tsv"},
};

struct Flags {
  std::string config;
  std::string out = "out";
  std::string checkpoint;
  std::string data;
  std::string text_a;
  std::string text_b;
  std::string dims = "tiny";
  std::vector<std::string> band;
  std::map<std::string, std::string> values;  // override key -> raw flag value
};

struct Context {
  RunConfig config;
  Flags flags;
  fs::path out_dir;
  RunManifest& manifest;
  std::ostream& out;
  std::ostream& err;

  fs::path artifact(const std::string& name) {
    const fs::path p = out_dir / name;
    manifest.artifacts.push_back(p.string());
    return p;
  }
};

std::string require_file(Context& ctx, const std::string& key, const std::string& path) {
  if (path.empty()) throw UsageError(key + " is required");
  if (!fs::is_regular_file(path)) throw UsageError(key + ": no such file '" + path + "'");
  ctx.manifest.inputs.push_back(path);
  return path;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << text;
}

data::Dataset load(Context& ctx, const std::string& key, const std::string& path) {
  require_file(ctx, key, path);
  return data::load_dataset(path, dataset_format(ctx.config, path));
}

std::optional<emb::ContextualStore> load_store(Context& ctx, emb::EmbeddingMode mode,
                                               std::size_t dimension) {
  if (mode != emb::EmbeddingMode::contextual) return std::nullopt;
  require_file(ctx, "model.embeddings", ctx.config.embeddings_path);
  return emb::ContextualStore::load(ctx.config.embeddings_path, dimension);
}

const emb::ContextualStore* ptr(const std::optional<emb::ContextualStore>& s) {
  return s ? &*s : nullptr;
}

int cmd_train(Context& ctx) {
  const auto& rc = ctx.config;
  const auto train_set = load(ctx, "data.train", rc.train_path);
  data::Dataset dev;
  if (!rc.dev_path.empty()) dev = load(ctx, "data.dev", rc.dev_path);
  const auto store = load_store(ctx, rc.model.mode, rc.model.embedding_dim);

  const fs::path ckpt = ctx.artifact("model.ckpt");
  const fs::path log_path = ctx.artifact("train_log.jsonl");
  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw ConfigError("cannot write '" + log_path.string() + "'");

  train::TrainCallbacks callbacks;
  callbacks.on_epoch = [&](const train::EpochLog& e) {
    log << train::to_json(e).dump() << '\n' << std::flush;
    ctx.out << "epoch " << e.epoch << "  loss " << fmt(e.train_loss) << "  dev_acc "
            << fmt(e.dev_acc) << "  dev_macro_f1 " << fmt(e.dev_macro_f1) << "  ("
            << fmt(e.seconds, 2) << "s)\n";
  };
  callbacks.on_best = [&](const train::Matcher& m) {
    const fs::path tmp = ckpt.string() + ".tmp";
    train::save_matcher(tmp, m);
    fs::rename(tmp, ckpt);
  };

  ctx.out << "training on " << train_set.examples.size() << " pairs ("
          << (dev.examples.empty() ? "selecting on train" : std::to_string(dev.examples.size()) + " dev")
          << "), " << rc.model.encoder.num_layers << " layers x " << rc.model.encoder.hidden_size
          << " hidden, residual " << (rc.model.encoder.residual ? "on" : "off") << ", mode "
          << emb::to_string(rc.model.mode) << '\n';
  try {
    const auto result =
        train::train(rc.model, rc.train, train_set, dev.examples, ptr(store), callbacks);
    ctx.out << "best epoch " << result.best_epoch << " of " << result.log.size()
            << (result.stopped_early ? " (early stop)" : "") << ", "
            << model::parameter_count(result.best.config()) << " parameters, checkpoint "
            << ckpt.string() << '\n';
  } catch (const NumericError& e) {
    ctx.err << "error: training diverged: " << e.what() << "; last good checkpoint kept at "
            << ckpt.string() << '\n';
    return 1;
  }
  return 0;
}

int cmd_eval(Context& ctx) {
  const auto& rc = ctx.config;
  const std::string ckpt = ctx.flags.checkpoint.empty() ? (ctx.out_dir / "model.ckpt").string()
                                                        : ctx.flags.checkpoint;
  require_file(ctx, "--checkpoint", ckpt);
  std::string data_path = ctx.flags.data;
  std::string key = "--data";
  if (data_path.empty()) {
    data_path = rc.test_path.empty() ? rc.dev_path : rc.test_path;
    key = rc.test_path.empty() ? "data.dev" : "data.test";
  }
  if (data_path.empty()) throw UsageError("--data (or data.test / data.dev) is required");
  const auto ds = load(ctx, key, data_path);
  const auto matcher = train::load_matcher(ckpt);
  const auto store = load_store(ctx, matcher.config().mode, matcher.config().embedding_dim);

  const auto ev = train::evaluate(matcher, ds.examples, ptr(store));
  nlohmann::json j = train::to_json(ev.metrics, matcher.labels);
  write_text(ctx.artifact("metrics.json"), j.dump(2) + "\n");
  ctx.out << "examples " << ev.metrics.total << "  accuracy " << fmt(ev.metrics.accuracy)
          << "  macro_f1 " << fmt(ev.metrics.macro_f1) << '\n';
  for (std::size_t c = 0; c < matcher.labels.size(); ++c) {
    const auto& cm = ev.metrics.per_class[c];
    ctx.out << "  " << matcher.labels[c] << "  P " << fmt(cm.precision) << "  R "
            << fmt(cm.recall) << "  F1 " << fmt(cm.f1) << "  support " << cm.support << '\n';
  }
  return 0;
}

int cmd_predict(Context& ctx) {
  const std::string ckpt = ctx.flags.checkpoint.empty() ? (ctx.out_dir / "model.ckpt").string()
                                                        : ctx.flags.checkpoint;
  require_file(ctx, "--checkpoint", ckpt);
  if (ctx.flags.text_a.empty()) throw UsageError("--a is required");
  if (ctx.flags.text_b.empty()) throw UsageError("--b is required");
  const auto matcher = train::load_matcher(ckpt);
  const auto p = train::predict_pair(matcher, ctx.flags.text_a, ctx.flags.text_b);

  nlohmann::json probs = nlohmann::json::array();
  for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
    probs.push_back({{"label", matcher.labels[c]}, {"probability", p.probabilities[c]}});
  }
  const nlohmann::json j = {{"text_a", ctx.flags.text_a},
                            {"text_b", ctx.flags.text_b},
                            {"label", p.label},
                            {"probabilities", probs}};
  write_text(ctx.artifact("prediction.json"), j.dump(2) + "\n");
  ctx.out << p.label;
  for (std::size_t c = 0; c < p.probabilities.size(); ++c) {
    ctx.out << "  " << matcher.labels[c] << "=" << fmt(p.probabilities[c]);
  }
  ctx.out << '\n';
  return 0;
}

int cmd_mine(Context& ctx) {
  const auto& rc = ctx.config;
  require_file(ctx, "data.questions", rc.questions_path);
  const auto questions = data::load_questions(rc.questions_path);
  std::vector<std::string> texts;
  for (const auto& q : questions) texts.push_back(q.text);
  const auto mined = data::mine_negatives(texts, rc.band);

  std::string negatives;
  for (const auto& n : mined.negatives) {
    const auto& a = questions[n.anchor];
    const auto& b = questions[n.candidate];
    negatives += nlohmann::json{{"id", "neg-" + a.id + "-" + b.id},
                                {"text_a", a.text},
                                {"text_b", b.text},
                                {"label", rc.negative_label},
                                {"similarity", n.similarity}}
                     .dump() +
                 "\n";
  }
  std::string unmatched;
  for (const auto& u : mined.unmatched) {
    unmatched += nlohmann::json{{"id", questions[u.anchor].id},
                                {"best_similarity", u.best_similarity},
                                {"reason", u.reason}}
                     .dump() +
                 "\n";
  }
  write_text(ctx.artifact("negatives.jsonl"), negatives);
  write_text(ctx.artifact("unmatched.jsonl"), unmatched);
  ctx.out << "mined " << mined.negatives.size() << " negatives from " << questions.size()
          << " questions in band [" << fmt(rc.band.low, 2) << ", " << fmt(rc.band.high, 2)
          << "]; " << mined.unmatched.size() << " anchors unmatched\n";
  return 0;
}

int cmd_ablate(Context& ctx) {
  const auto& rc = ctx.config;
  const auto train_set = load(ctx, "data.train", rc.train_path);
  data::Dataset dev, test;
  if (!rc.dev_path.empty()) dev = load(ctx, "data.dev", rc.dev_path);
  if (!rc.test_path.empty()) test = load(ctx, "data.test", rc.test_path);
  const auto store = load_store(ctx, rc.model.mode, rc.model.embedding_dim);

  const auto grid = train::ablation_grid(rc.model.encoder.hidden_size, rc.ablate_hidden);
  train::AblationData data{&train_set, dev.examples, test.examples, ptr(store)};
  const auto rows = train::ablate(rc.model, rc.train, data, grid, [&](const train::AblationRow& r) {
    ctx.out << r.config.id << "  " << r.config.description << "  params " << r.parameters
            << "  train_f1 " << fmt(r.train_f1) << "  dev_f1 " << fmt(r.dev_f1) << "  test_f1 "
            << (r.test_f1 ? fmt(*r.test_f1) : "NA") << '\n';
  });
  std::ostringstream tsv;
  train::write_ablation_tsv(tsv, rows, rc.train);
  write_text(ctx.artifact("ablation.tsv"), tsv.str());
  return 0;
}

int cmd_gradcheck(Context& ctx) {
  const auto setup = model::gradcheck_setup(ctx.flags.dims, ctx.config.train.seed);
  const auto started = std::chrono::steady_clock::now();
  const auto r = model::model_gradcheck(setup);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  const bool passed = r.max_relative_error < kGradCheckTolerance;
  const nlohmann::json j = {{"dims", ctx.flags.dims},
                            {"model", model::to_json(setup.config)},
                            {"sequence_length", setup.sequence_length},
                            {"max_relative_error", r.max_relative_error},
                            {"worst_parameter", r.worst_parameter},
                            {"worst_index", r.worst_index},
                            {"coordinates_checked", r.coordinates_checked},
                            {"steps_reduced", r.steps_reduced},
                            {"tolerance", kGradCheckTolerance},
                            {"passed", passed}};
  write_text(ctx.artifact("gradcheck.json"), j.dump(2) + "\n");
  char err_text[32];
  std::snprintf(err_text, sizeof err_text, "%.3e", r.max_relative_error);
  ctx.out << "max relative error " << err_text << " at " << r.worst_parameter << "["
          << r.worst_index << "] over " << r.coordinates_checked << " coordinates in "
          << fmt(seconds, 2) << "s: " << (passed ? "PASS" : "FAIL") << '\n';
  return passed ? 0 : 1;
}

void add_common(CLI::App* sub, Flags& flags) {
  sub->add_option("--config", flags.config, "Configuration file (key = value lines)");
  sub->add_option("--out", flags.out, "Output directory")->capture_default_str();
  for (const auto& f : kOverrideFlags) {
    sub->add_option(f.flag, flags.values[f.key], f.help);
  }
  sub->add_option("--band", flags.band, "Mining similarity band: low high")->expected(2);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags flags;
  CLI::App app{"Dense recurrent sentence-pair matcher"};
  app.name("dre");
  app.require_subcommand(1);

  struct Command {
    const char* name;
    const char* help;
    int (*fn)(Context&);
    CLI::App* app = nullptr;
  };
  Command commands[] = {
      {"train", "Train a matcher and write model.ckpt and train_log.jsonl", cmd_train},
      {"eval", "Score a checkpoint on a dataset and write metrics.json", cmd_eval},
      {"predict", "Classify one pair and write prediction.json", cmd_predict},
      {"mine", "Mine tf-idf band negatives into negatives.jsonl", cmd_mine},
      {"ablate", "Run the nine-configuration encoder ablation into ablation.tsv", cmd_ablate},
      {"gradcheck", "Compare model gradients with finite differences", cmd_gradcheck},
  };
  for (auto& c : commands) {
    c.app = app.add_subcommand(c.name, c.help);
    add_common(c.app, flags);
  }
  for (auto& c : commands) {
    const std::string name = c.name;
    if (name == "eval" || name == "predict") {
      c.app->add_option("--checkpoint", flags.checkpoint, "Checkpoint (default <out>/model.ckpt)");
    }
    if (name == "eval") c.app->add_option("--data", flags.data, "Dataset to score");
    if (name == "predict") {
      c.app->add_option("--a", flags.text_a, "First text")->required();
      c.app->add_option("--b", flags.text_b, "Second text")->required();
    }
    if (name == "gradcheck") {
      c.app->add_option("--dims", flags.dims, "tiny or small")
          ->check(CLI::IsMember({"tiny", "small"}))
          ->capture_default_str();
    }
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Command* chosen = nullptr;
  for (auto& c : commands) {
    if (c.app->parsed()) chosen = &c;
  }

  RunConfig config;
  try {
    KeyValues values;
    if (!flags.config.empty()) values = load_config(flags.config);
    KeyValues overrides;
    for (const auto& f : kOverrideFlags) {
      if (chosen->app->count(f.flag) > 0) overrides[f.key] = flags.values[f.key];
    }
    if (!flags.band.empty()) {
      overrides["mine.low"] = flags.band[0];
      overrides["mine.high"] = flags.band[1];
    }
    apply_overrides(values, overrides);
    config = resolve(values);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const fs::path out_dir = flags.out;
  RunManifest manifest;
  manifest.command = chosen->name;
  manifest.args = args;
  manifest.config = to_json(config);
  manifest.seed = config.train.seed;
  manifest.started_at = utc_timestamp(std::chrono::system_clock::now());
  if (!flags.config.empty()) manifest.inputs.push_back(flags.config);

  int code = 0;
  try {
    fs::create_directories(out_dir);
    Context ctx{config, flags, out_dir, manifest, out, err};
    code = chosen->fn(ctx);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    code = 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    code = 1;
  }

  manifest.finished_at = utc_timestamp(std::chrono::system_clock::now());
  manifest.exit_code = code;
  try {
    if (fs::is_directory(out_dir)) manifest.write(out_dir);
  } catch (const std::exception& e) {
    err << "error: cannot write run manifest: " << e.what() << '\n';
    if (code == 0) code = 1;
  }
  return code;
}

}  // namespace dre::cli
