// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <sstream>

#include "dre/cli/cli.hpp"
#include "dre/data/dataset.hpp"
#include "dre/data/synthetic.hpp"
#include "dre/data/tfidf.hpp"
#include "dre/model/model.hpp"
#include "dre/model/model_gradcheck.hpp"
#include "dre/train/metrics.hpp"
#include "dre/train/train.hpp"
#include "test_support.hpp"

using namespace dre;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string num(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

Verdict gradient_fidelity() {
  const auto started = Clock::now();
  const auto setup = model::gradcheck_setup("tiny");
  const auto& c = setup.config;
  if (c.embedding_dim != 8 || c.encoder.hidden_size != 4 || setup.sequence_length != 3 || c.num_classes != 3 ||
      c.encoder.num_layers != 3) {
    return {false, "gradcheck dims are not k=8 H=4 T=3 n=3"};
  }
  const auto r = model::model_gradcheck(setup);
  const double secs = seconds_since(started);
  const bool all = r.coordinates_checked == model::parameter_count(c);
  return {r.max_relative_error < 1e-4 && secs < 30.0 && all,
          "max relative error " + num(r.max_relative_error) + " over " + std::to_string(r.coordinates_checked) +
              " coordinates in " + num(secs) + "s"};
}

Verdict architecture_arithmetic() {
  auto on = testing::small_config(3, 8, true, 16, 40, 2);
  auto off = testing::small_config(3, 8, false, 16, 40, 2);
  const auto w_on = enc::layer_input_widths(on.encoder, 16);
  const auto w_off = enc::layer_input_widths(off.encoder, 16);
  if (w_on != std::vector<std::size_t>{16, 32, 48}) return {false, "residual-on widths"};
  if (w_off != std::vector<std::size_t>{16, 16, 16}) return {false, "residual-off widths"};
  if (model::attention_width(on) != 64) return {false, "attention width"};
  std::size_t configs = 0;
  for (std::size_t layers = 1; layers <= 5; ++layers) {
    for (std::size_t hidden : {2u, 8u, 32u}) {
      for (bool residual : {true, false}) {
        const auto cfg = testing::small_config(layers, hidden, residual, 16, 40, 3);
        const model::DreModel<float> m(cfg, 1);
        if (m.parameters().total_values() != model::parameter_count(cfg)) {
          return {false, "count mismatch at layers=" + std::to_string(layers) + " H=" + std::to_string(hidden)};
        }
        ++configs;
      }
    }
  }
  return {true, "widths 16/32/48 and 16/16/16, attention 64, counts enumerated for " + std::to_string(configs) +
                    " configurations"};
}

Verdict attention_invariants() {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto failure = testing::attention_trial(1'000'000 + seed);
    if (!failure.empty()) return {false, failure};
  }
  return {true, "1000 random trials"};
}

Verdict overfit_sanity() {
  const auto d = data::synthetic_matching_set(64, 11);
  auto run = [&](bool residual, std::size_t& reached_at, double& final_acc, double& secs) {
    train::TrainCallbacks cb;
    cb.should_stop = [&](const train::EpochLog& l) {
      if (l.dev_acc >= 0.95 && reached_at == 0) reached_at = l.epoch;
      return reached_at != 0;
    };
    const auto started = Clock::now();
    const auto r = train::train(testing::overfit_model_config(residual), testing::overfit_train_config(), d, {},
                                nullptr, cb);
    secs = seconds_since(started);
    final_acc = r.log.empty() ? 0.0 : r.log.back().dev_acc;
    for (const auto& e : r.log) {
      if (!std::isfinite(e.train_loss)) return false;
    }
    return true;
  };
  std::size_t on_epoch = 0, off_epoch = 0;
  double on_acc = 0, off_acc = 0, on_secs = 0, off_secs = 0;
  bool off_ok = false;
  try {
    run(true, on_epoch, on_acc, on_secs);
    off_ok = run(false, off_epoch, off_acc, off_secs);
  } catch (const std::exception& e) {
    return {false, std::string("training threw: ") + e.what()};
  }
  const bool pass = on_epoch != 0 && on_epoch <= 300 && on_secs < 300.0 && off_ok;
  return {pass, "residual on: " + (on_epoch ? "95% at epoch " + std::to_string(on_epoch) : std::string("never 95%")) +
                    " in " + num(on_secs) + "s; residual off: finished, train accuracy " + num(off_acc) + " in " +
                    num(off_secs) + "s"};
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << "dre " << args[0] << " exited " << code << ": " << err.str();
  return code;
}

struct Toy {
  testing::TempDir dir;
  fs::path config;
  fs::path train;

  Toy() {
    const auto d = data::synthetic_matching_set(64, 11);
    train = dir / "train.jsonl";
    std::ofstream f(train);
    data::write_jsonl(f, d.examples);
    f.close();
    std::string q;
    for (const auto& line : data::synthetic_questions(50, 3)) q += line + "\n";
    testing::write_file(dir / "questions.txt", q);
    const auto dev = data::synthetic_matching_set(24, 12);
    std::ofstream g(dir / "dev.jsonl");
    data::write_jsonl(g, dev.examples);
    g.close();
    config = dir / "toy.cfg";
    testing::write_file(config, "data.train = " + train.string() + "\n" +
                                    "data.dev = " + (dir / "dev.jsonl").string() + "\n" +
                                    "data.questions = " + (dir / "questions.txt").string() + "\n" +
                                    "model.embedding_dim = 16\n"
                                    "model.hidden = 16\n"
                                    "model.head_hidden = 16\n"
                                    "ablate.hidden_sizes = 8,16,32\n"
                                    "train.batch_size = 8\n"
                                    "train.max_epochs = 8\n"
                                    "train.patience = 3\n");
  }

  std::vector<std::string> args(const std::string& cmd, const fs::path& out, std::vector<std::string> extra = {}) const {
    std::vector<std::string> a = {cmd, "--config", config.string(), "--out", out.string(), "--seed", "7"};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }
};

Verdict ablation_harness() {
  Toy toy;
  const auto started = Clock::now();
  if (cli(toy.args("ablate", toy.dir / "ablate")) != 0) return {false, "ablate command failed"};
  const double secs = seconds_since(started);
  std::istringstream in(testing::read_file(toy.dir / "ablate" / "ablation.tsv"));
  std::string line;
  std::getline(in, line);
  if (line.rfind("# ", 0) != 0) return {false, "missing defaults line"};
  std::getline(in, line);
  if (line.rfind("id\tconfig\tlayers\thidden\tresidual\tparameters", 0) != 0) return {false, "bad header"};
  const std::vector<std::string> ids = {"1a", "1b", "1c", "1d", "1e", "2a", "2b", "2c", "3"};
  const auto vocab = emb::Vocabulary::build(data::synthetic_matching_set(64, 11).examples, 1);
  std::map<std::string, std::size_t> params;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (row >= ids.size() || cols.size() != 11 || cols[0] != ids[row]) return {false, "row " + std::to_string(row)};
    const std::size_t layers = std::stoul(cols[2]), hidden = std::stoul(cols[3]);
    auto cfg = testing::small_config(layers, hidden, cols[4] == "on", 16, vocab.size(), 2);
    cfg.head_hidden = 16;
    const std::size_t count = std::stoul(cols[5]);
    if (count != model::parameter_count(cfg)) return {false, "parameter count of row " + cols[0]};
    params[cols[0]] = count;
    ++row;
  }
  if (row != ids.size()) return {false, std::to_string(row) + " rows"};
  // Same hidden size 16: 1c and 2b are the same architecture; 3 drops only input weights.
  const std::size_t k = 16, h = 16;
  const std::size_t residual_gap = 2 * 4 * (k + 2 * h - 2 * h) * h + 2 * 4 * (k + 4 * h - 2 * h) * h;
  if (params["1c"] != params["2b"]) return {false, "1c and 2b differ"};
  if (params["1c"] - params["3"] != residual_gap) return {false, "residual parameter gap"};
  bool layers_grow = true;
  for (std::size_t i = 1; i < 5; ++i) layers_grow &= params[ids[i]] > params[ids[i - 1]];
  if (!layers_grow) return {false, "layer sweep counts not increasing"};
  return {secs < 1800.0, "9 rows 1a-1e, 2a-2c, 3 with consistent parameter counts in " + num(secs) + "s"};
}

Verdict negative_miner() {
  std::size_t negatives = 0, anchors = 0;
  for (std::uint64_t seed : {3u, 11u, 29u}) {
    const auto qs = data::synthetic_questions(50, seed);
    const auto expected = testing::brute_force_selection(testing::dense_cosine_table(qs), 0.10, 0.20);
    const auto mined = data::mine_negatives(qs, {0.10, 0.20});
    std::vector<std::optional<std::size_t>> got(qs.size());
    for (const auto& n : mined.negatives) {
      if (n.similarity < 0.10 || n.similarity > 0.20) return {false, "negative outside the band"};
      got[n.anchor] = n.candidate;
    }
    if (got != expected) return {false, "selection differs from the oracle for corpus seed " + std::to_string(seed)};
    negatives += mined.negatives.size();
    anchors += qs.size();
  }
  return {negatives > 0, std::to_string(negatives) + " negatives over " + std::to_string(anchors) +
                             " anchors, all in band and equal to the all-pairs oracle"};
}

Verdict metrics_oracle() {
  ad::Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t classes = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 200)(rng);
    std::uniform_int_distribution<std::size_t> cls(0, classes - 1);
    std::vector<std::size_t> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = cls(rng);
      pred[i] = rng() % 3 == 0 ? gold[i] : cls(rng);
    }
    const auto m = train::compute_metrics(pred, gold, classes);
    const auto diff = testing::compare_with_recount(m, testing::recount_metrics(pred, gold, classes));
    if (!diff.empty()) return {false, "trial " + std::to_string(trial) + ": " + diff};
  }
  // The same path through evaluate on real predictions.
  const auto d = data::synthetic_matching_set(40, 5);
  auto vocab = emb::Vocabulary::build(d.examples, 1);
  auto cfg = testing::small_config(2, 4, true, 8, vocab.size(), 2);
  const train::Matcher matcher{vocab, d.labels, 100, model::DreModel<float>(cfg, 3), nlohmann::json::object()};
  const auto ev = train::evaluate(matcher, d.examples);
  const auto diff = testing::compare_with_recount(ev.metrics, testing::recount_metrics(ev.predictions, ev.gold, 2));
  if (!diff.empty()) return {false, "evaluate: " + diff};
  return {true, "1000 random sets plus one evaluate run equal the re-count exactly"};
}

std::string mask(const std::string& name, const std::string& bytes) {
  static const std::regex stamp(R"x("(started_at|finished_at)": "[^"]*")x");
  static const std::regex secs(R"("seconds":[-0-9.eE+]+)");
  if (name.ends_with("run_manifest.json")) return std::regex_replace(bytes, stamp, "\"$1\": \"\"");
  if (name.ends_with("train_log.jsonl")) return std::regex_replace(bytes, secs, "\"seconds\":0");
  return bytes;
}

Verdict determinism() {
  Toy toy;
  const auto ckpt = (toy.dir / "run" / "train" / "model.ckpt").string();
  const std::vector<std::vector<std::string>> commands = {
      toy.args("train", toy.dir / "run" / "train"),
      toy.args("eval", toy.dir / "run" / "eval", {"--checkpoint", ckpt, "--data", toy.train.string()}),
      toy.args("predict", toy.dir / "run" / "predict", {"--checkpoint", ckpt, "--a", "x y", "--b", "y x"}),
      toy.args("mine", toy.dir / "run" / "mine"),
      toy.args("gradcheck", toy.dir / "run" / "gradcheck"),
      toy.args("ablate", toy.dir / "run" / "ablate"),
  };
  std::map<std::string, std::string> first;
  std::size_t compared = 0;
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& c : commands) {
      if (cli(c) != 0) return {false, c[0] + " failed"};
    }
    for (const auto& e : fs::recursive_directory_iterator(toy.dir / "run")) {
      if (!e.is_regular_file()) continue;
      const std::string name = fs::relative(e.path(), toy.dir.path()).string();
      const std::string bytes = mask(name, testing::read_file(e.path()));
      if (pass == 0) {
        first[name] = bytes;
      } else {
        if (!first.count(name) || first[name] != bytes) return {false, name + " differs between runs"};
        ++compared;
      }
    }
  }
  if (compared != first.size()) return {false, "file sets differ"};
  return {true, std::to_string(compared) +
                    " artifacts from train/eval/predict/mine/gradcheck/ablate identical; manifests differ only in "
                    "timestamps, logs only in per-epoch wall seconds"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gradient fidelity", gradient_fidelity},
      {"architecture arithmetic", architecture_arithmetic},
      {"attention/pooling invariants", attention_invariants},
      {"overfit sanity", overfit_sanity},
      {"ablation harness", ablation_harness},
      {"negative miner", negative_miner},
      {"metrics oracle", metrics_oracle},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
    failed += v.pass ? 0 : 1;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
