#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "dre/cli/cli.hpp"
#include "dre/cli/config.hpp"
#include "dre/cli/manifest.hpp"
#include "dre/data/dataset.hpp"
#include "dre/data/synthetic.hpp"
#include "test_support.hpp"

using namespace dre;
using namespace dre::cli;
using dre::testing::read_file;
using dre::testing::TempDir;
using dre::testing::write_file;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

KeyValues parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "cfg");
}

std::string usage_error(const std::string& text) {
  try {
    resolve(parse(text));
  } catch (const UsageError& e) {
    return e.what();
  }
  return "";
}

// Toy paraphrase data and a small-model config next to it.
struct Workspace {
  TempDir dir;
  fs::path config;
  fs::path train;
  fs::path questions;

  explicit Workspace(std::size_t epochs = 2) {
    const auto d = data::synthetic_matching_set(64, 11);
    train = dir / "train.jsonl";
    std::ofstream f(train);
    data::write_jsonl(f, d.examples);
    f.close();
    questions = dir / "questions.txt";
    std::string q;
    for (const auto& line : data::synthetic_questions(50, 3)) q += line + "\n";
    write_file(questions, q);
    config = dir / "toy.cfg";
    write_file(config, "# toy run\n"
                       "data.train = " + train.string() + "\n"
                       "data.questions = " + questions.string() + "\n"
                       "model.embedding_dim = 32\n"
                       "model.layers = 3\n"
                       "model.hidden = 32\n"
                       "model.head_hidden = 32\n"
                       "train.batch_size = 8\n"
                       "train.patience = 10\n"
                       "train.max_epochs = " + std::to_string(epochs) + "\n");
  }

  std::vector<std::string> args(const std::string& cmd, const std::string& out,
                                std::vector<std::string> extra = {}) const {
    std::vector<std::string> a = {cmd, "--config", config.string(), "--out", (dir / out).string()};
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }
};

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
  }
  return files;
}

std::string mask_timestamps(const std::string& manifest) {
  static const std::regex stamp(R"x("(started_at|finished_at)": "[^"]*")x");
  return std::regex_replace(manifest, stamp, "\"$1\": \"\"");
}

std::string mask_seconds(const std::string& log) {
  static const std::regex secs(R"("seconds":[-0-9.eE+]+)");
  return std::regex_replace(log, secs, "\"seconds\":0");
}

}  // namespace

TEST(Config, ParsesKeyValueLines) {
  const auto kv = parse("# comment\n\ntrain.seed = 9   # trailing\n model.residual=off\n");
  EXPECT_EQ(kv.at("train.seed"), "9");
  EXPECT_EQ(kv.at("model.residual"), "off");
  const auto rc = resolve(kv);
  EXPECT_EQ(rc.train.seed, 9u);
  EXPECT_FALSE(rc.model.encoder.residual);
}

TEST(Config, DefaultsFollowTheMode) {
  const auto lookup = resolve({});
  EXPECT_EQ(lookup.train.learning_rate, 1e-3);
  EXPECT_EQ(lookup.model.encoder.num_layers, 3u);
  EXPECT_EQ(lookup.model.encoder.hidden_size, 128u);
  EXPECT_TRUE(lookup.model.encoder.residual);
  EXPECT_EQ(lookup.band.low, 0.10);
  EXPECT_EQ(lookup.band.high, 0.20);
  EXPECT_EQ(resolve({{"model.mode", "contextual"}}).train.learning_rate, 2e-5);
  EXPECT_EQ(resolve({{"model.mode", "contextual"}, {"train.learning_rate", "1e-4"}}).train.learning_rate, 1e-4);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(usage_error("train.sed = 3\n").find("train.sed"), std::string::npos);
  EXPECT_NE(usage_error("train.seed = x\n").find("train.seed"), std::string::npos);
  EXPECT_NE(usage_error("model.residual = maybe\n").find("model.residual"), std::string::npos);
  EXPECT_NE(usage_error("train.seed = 1\ntrain.seed = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(usage_error("just words\n").find("cfg:1"), std::string::npos);
  EXPECT_NE(usage_error("mine.low = 0.3\nmine.high = 0.2\n").find("mine.low"), std::string::npos);
  EXPECT_NE(usage_error("train.dropout_retention = 0\n").find("train.dropout_retention"), std::string::npos);
  EXPECT_NE(usage_error("model.hidden = 0\n").find("model.hidden"), std::string::npos);
  EXPECT_NE(usage_error("data.format = csv\n").find("data.format"), std::string::npos);
  EXPECT_NE(usage_error("ablate.hidden_sizes = 1,2\n").find("ablate.hidden_sizes"), std::string::npos);
}

TEST(Config, OverridesWinAndAreChecked) {
  KeyValues base = parse("train.seed = 1\nmodel.hidden = 8\n");
  apply_overrides(base, {{"train.seed", "5"}});
  EXPECT_EQ(resolve(base).train.seed, 5u);
  EXPECT_EQ(resolve(base).model.encoder.hidden_size, 8u);
  EXPECT_THROW(apply_overrides(base, {{"nope", "1"}}), UsageError);
  const auto j = to_json(resolve(base));
  EXPECT_EQ(j["train.seed"], 5);
  EXPECT_EQ(j["model.residual"], "on");
}

TEST(Manifest, GitBlobHashes) {
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  TempDir dir;
  write_file(dir / "h.txt", "hello\n");
  EXPECT_EQ(git_blob_sha1_file(dir / "h.txt"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Manifest, TimestampFormat) {
  EXPECT_EQ(utc_timestamp(std::chrono::system_clock::from_time_t(0)), "1970-01-01T00:00:00Z");
  EXPECT_EQ(utc_timestamp(std::chrono::system_clock::from_time_t(1769860800)), "2026-01-31T12:00:00Z");
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({"gradcheck", "--dims", "huge"}).code, 2);
  TempDir dir;
  const auto missing = invoke({"train", "--out", (dir / "o").string()});
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("data.train"), std::string::npos) << missing.err;
  const auto absent = invoke({"train", "--train", "/nonexistent.jsonl", "--out", (dir / "o").string()});
  EXPECT_EQ(absent.code, 2);
  EXPECT_NE(absent.err.find("data.train"), std::string::npos);
  const auto bad_flag = invoke({"train", "--residual", "sideways", "--out", (dir / "o").string()});
  EXPECT_EQ(bad_flag.code, 2);
  EXPECT_NE(bad_flag.err.find("model.residual"), std::string::npos);
  EXPECT_EQ(invoke({"mine", "--band", "0.3", "0.2", "--out", (dir / "o").string()}).code, 2);
  EXPECT_EQ(invoke({"predict", "--a", "x", "--b", "y", "--out", (dir / "o").string()}).code, 2);
  EXPECT_EQ(invoke({"train", "--config", (dir / "none.cfg").string()}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST(Cli, RuntimeFailureExitsOne) {
  TempDir dir;
  write_file(dir / "broken.jsonl", "{\"id\":\"1\",\"text_a\":\"a\",\"text_b\":\"\",\"label\":\"x\"}\n");
  const auto r = invoke({"train", "--train", (dir / "broken.jsonl").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
  const auto manifest = nlohmann::json::parse(read_file(dir / "o" / "run_manifest.json"));
  EXPECT_EQ(manifest["exit_code"], 1);
}

TEST(Cli, GradcheckTinyPasses) {
  TempDir dir;
  const auto r = invoke({"gradcheck", "--dims", "tiny", "--out", (dir / "g").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("max relative error"), std::string::npos);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  const auto j = nlohmann::json::parse(read_file(dir / "g" / "gradcheck.json"));
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_LT(j["max_relative_error"].get<double>(), 1e-4);
}

TEST(Cli, MineWritesBandNegatives) {
  Workspace ws;
  const auto r = invoke(ws.args("mine", "m", {"--band", "0.10", "0.20"}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("mined "), std::string::npos);
  std::istringstream neg(read_file(ws.dir / "m" / "negatives.jsonl"));
  std::istringstream un(read_file(ws.dir / "m" / "unmatched.jsonl"));
  std::string line;
  std::size_t n = 0, u = 0;
  while (std::getline(neg, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j["label"], "not_match");
    EXPECT_EQ(j["id"].get<std::string>().rfind("neg-q", 0), 0u);
    EXPECT_GE(j["similarity"].get<double>(), 0.10);
    EXPECT_LE(j["similarity"].get<double>(), 0.20);
    ++n;
  }
  while (std::getline(un, line)) {
    const auto reason = nlohmann::json::parse(line)["reason"].get<std::string>();
    EXPECT_TRUE(reason == "above_band" || reason == "below_band" || reason == "band_gap") << reason;
    ++u;
  }
  EXPECT_EQ(n + u, 50u);
  EXPECT_GT(n, 0u);
}

TEST(Cli, TrainTwiceIsIdempotent) {
  Workspace ws(2);
  ASSERT_EQ(invoke(ws.args("train", "a", {"--seed", "7"})).code, 0);
  const auto first = snapshot(ws.dir / "a");
  ASSERT_EQ(invoke(ws.args("train", "a", {"--seed", "7"})).code, 0);
  const auto second = snapshot(ws.dir / "a");
  ASSERT_EQ(first.size(), second.size());
  for (const auto& [name, bytes] : first) {
    if (name == "run_manifest.json") {
      EXPECT_EQ(mask_timestamps(bytes), mask_timestamps(second.at(name)));
    } else if (name == "train_log.jsonl") {
      EXPECT_EQ(mask_seconds(bytes), mask_seconds(second.at(name)));
    } else {
      EXPECT_EQ(bytes, second.at(name)) << name;
    }
  }
  // A second output directory gets the same checkpoint and epoch-1 loss.
  ASSERT_EQ(invoke(ws.args("train", "b", {"--seed", "7"})).code, 0);
  EXPECT_EQ(read_file(ws.dir / "b" / "model.ckpt"), first.at("model.ckpt"));
  auto first_line = [](const std::string& log) {
    return nlohmann::json::parse(log.substr(0, log.find('\n')))["train_loss"].get<double>();
  };
  EXPECT_EQ(first_line(read_file(ws.dir / "b" / "train_log.jsonl")), first_line(first.at("train_log.jsonl")));
  ASSERT_EQ(invoke(ws.args("train", "c", {"--seed", "8"})).code, 0);
  EXPECT_NE(read_file(ws.dir / "c" / "model.ckpt"), first.at("model.ckpt"));
}

TEST(Cli, ManifestDescribesTheRun) {
  Workspace ws(1);
  ASSERT_EQ(invoke(ws.args("train", "a")).code, 0);
  const auto j = nlohmann::json::parse(read_file(ws.dir / "a" / "run_manifest.json"));
  EXPECT_EQ(j["command"], "train");
  EXPECT_EQ(j["seed"], 7);
  EXPECT_EQ(j["exit_code"], 0);
  EXPECT_EQ(j["config"]["model.hidden"], 32);
  EXPECT_EQ(j["artifacts"].size(), 2u);
  ASSERT_EQ(j["inputs"].size(), 2u);
  EXPECT_EQ(j["inputs"][1]["blob_sha1"], git_blob_sha1_file(ws.train));
  std::regex stamp(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)");
  EXPECT_TRUE(std::regex_match(j["started_at"].get<std::string>(), stamp));
  EXPECT_EQ(j["input_hash"].get<std::string>().size(), 40u);
}

TEST(Cli, WritesOnlyInsideItsOutputDirectory) {
  Workspace ws(1);
  const auto before = snapshot(ws.dir.path());
  for (const auto& cmd : {ws.args("train", "o/t"), ws.args("mine", "o/m"),
                          ws.args("eval", "o/e", {"--checkpoint", (ws.dir / "o/t/model.ckpt").string(),
                                                  "--data", ws.train.string()}),
                          ws.args("predict", "o/p", {"--checkpoint", (ws.dir / "o/t/model.ckpt").string(),
                                                     "--a", "red fox", "--b", "red fox"}),
                          ws.args("gradcheck", "o/g")}) {
    ASSERT_EQ(invoke(cmd).code, 0) << cmd[0];
  }
  const auto after = snapshot(ws.dir.path());
  for (const auto& [name, bytes] : after) {
    if (name.rfind("o/", 0) == 0) continue;
    ASSERT_TRUE(before.count(name)) << "unexpected file " << name;
    EXPECT_EQ(before.at(name), bytes) << name;
  }
  std::string listing;
  for (const auto& [name, bytes] : after) listing += name + " ";
  EXPECT_EQ(after.size(), before.size() + 3 + 3 + 2 + 2 + 2) << listing;
}

TEST(Cli, ToyCheckpointEvaluatesAboveNinetyFive) {
  Workspace ws(60);
  const auto t = invoke(ws.args("train", "toy"));
  ASSERT_EQ(t.code, 0) << t.err;
  const auto e = invoke(ws.args("eval", "eval", {"--checkpoint", (ws.dir / "toy/model.ckpt").string(),
                                                 "--data", ws.train.string()}));
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_NE(e.out.find("accuracy "), std::string::npos);
  const auto metrics = nlohmann::json::parse(read_file(ws.dir / "eval" / "metrics.json"));
  EXPECT_GE(metrics["accuracy"].get<double>(), 0.95) << e.out;

  const auto p = invoke(ws.args("predict", "pred", {"--checkpoint", (ws.dir / "toy/model.ckpt").string(),
                                                    "--a", "how do i bake bread", "--b", "how do i bake bread"}));
  ASSERT_EQ(p.code, 0) << p.err;
  const auto pj = nlohmann::json::parse(read_file(ws.dir / "pred" / "prediction.json"));
  double total = 0;
  for (const auto& c : pj["probabilities"]) total += c["probability"].get<double>();
  EXPECT_NEAR(total, 1.0, 1e-6);
}
