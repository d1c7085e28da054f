#include <fstream>
#include <sstream>

#include "arena/cli/cli.hpp"
#include "arena/config/run_config.hpp"
#include "arena/eval/evaluation.hpp"
#include "arena/model/policy_model.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace arena;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run arena_cmd(std::vector<std::string> args, const std::map<std::string, std::string>& env = {}) {
  args.insert(args.begin(), "arena");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err, env);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Small model and short games so every command finishes in seconds.
const std::vector<std::string> kTiny = {
    "--set", "game.max_steps=120", "--set", "model.preset=custom", "--set", "model.embed_dim=8",
    "--set", "model.trunk=16,16"};

std::vector<std::string> with_tiny(std::vector<std::string> args) {
  args.insert(args.end(), kTiny.begin(), kTiny.end());
  return args;
}

GameConfig tiny_game() {
  GameConfig g;
  g.max_steps = 120;
  return g;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2") {
  CHECK(arena_cmd({"--help"}).code == kExitOk);
  CHECK(arena_cmd({}).code == kExitUsage);
  CHECK(arena_cmd({"frobnicate"}).code == kExitUsage);
  CHECK(arena_cmd({"collect", "--no-such-flag"}).code == kExitUsage);
  const Run bad_set = arena_cmd({"gradcheck", "--set", "seed"});
  CHECK(bad_set.code == kExitUsage);
  CHECK(bad_set.err.find("key=value") != std::string::npos);
  const Run unknown_key = arena_cmd({"gradcheck", "--set", "game.gravity=1"});
  CHECK(unknown_key.code == kExitUsage);
  CHECK(unknown_key.err.find("game.gravity") != std::string::npos);
  const Run bad_env = arena_cmd({"gradcheck"}, {{"ARENA_NOPE", "1"}});
  CHECK(bad_env.code == kExitUsage);
}

TEST_CASE("gradcheck passes every block") {
  const Run r = arena_cmd({"gradcheck", "--seed", "3"});
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("PASS model") != std::string::npos);
}

TEST_CASE("settings resolve as defaults, then file, then environment, then flags") {
  const auto dir = arena::testing::temp_dir("cli-precedence");
  const fs::path cfg = dir / "run.cfg";
  std::ofstream(cfg) << "collect.episodes = 3\ngame.max_steps = 120\nseed = 5\n";
  auto episodes_in_manifest = [&](const std::string& sub) {
    const RunConfig m = load_run_config(dir / sub / "collect.cfg");
    return m.collect.episodes;
  };
  auto collect = [&](const std::string& sub, std::vector<std::string> extra,
                     const std::map<std::string, std::string>& env) {
    std::vector<std::string> args = {"collect", "--config", cfg.string(), "--out",
                                     (dir / sub).string(), "--dataset",
                                     (dir / sub / "d.jsonl").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    return arena_cmd(args, env);
  };
  REQUIRE(collect("file", {}, {}).code == kExitOk);
  CHECK(episodes_in_manifest("file") == 3);
  REQUIRE(collect("env", {}, {{"ARENA_COLLECT_EPISODES", "2"}}).code == kExitOk);
  CHECK(episodes_in_manifest("env") == 2);
  REQUIRE(collect("flag", {"--episodes", "1"}, {{"ARENA_COLLECT_EPISODES", "2"}}).code == kExitOk);
  CHECK(episodes_in_manifest("flag") == 1);
  CHECK(load_run_config(dir / "flag" / "collect.cfg").seed == 5);
  fs::remove_all(dir);
}

TEST_CASE("outputs are never overwritten without --force") {
  const auto dir = arena::testing::temp_dir("cli-force");
  const std::vector<std::string> args =
      with_tiny({"collect", "--episodes", "1", "--dataset", (dir / "d.jsonl").string(), "--out",
                 dir.string()});
  REQUIRE(arena_cmd(args).code == kExitOk);
  const std::string first = slurp(dir / "d.jsonl");
  const Run again = arena_cmd(args);
  CHECK(again.code == kExitUsage);
  CHECK(again.err.find("refusing to overwrite") != std::string::npos);
  CHECK(slurp(dir / "d.jsonl") == first);
  auto forced = args;
  forced.push_back("--force");
  CHECK(arena_cmd(forced).code == kExitOk);
  CHECK(slurp(dir / "d.jsonl") == first);
  fs::remove_all(dir);
}

TEST_CASE("collect is reproducible from config and seed") {
  const auto dir = arena::testing::temp_dir("cli-repro");
  for (const char* name : {"a", "b"}) {
    REQUIRE(arena_cmd(with_tiny({"collect", "--episodes", "2", "--seed", "17", "--dataset",
                                 (dir / name / "d.jsonl").string(), "--out",
                                 (dir / name).string()}))
                .code == kExitOk);
  }
  CHECK(slurp(dir / "a" / "d.jsonl") == slurp(dir / "b" / "d.jsonl"));
  fs::remove_all(dir);
}

TEST_CASE("pretrain with zero epochs writes the input model unchanged") {
  const auto dir = arena::testing::temp_dir("cli-pretrain0");
  const std::string dataset = (dir / "d.jsonl").string();
  REQUIRE(arena_cmd(with_tiny({"collect", "--episodes", "2", "--dataset", dataset, "--out",
                               dir.string()}))
              .code == kExitOk);
  ModelConfig mc;
  mc.embed_dim = 8;
  mc.trunk = {16, 16};
  const PolicyModel init(mc, EncoderLimits{}, 99);
  save_model(dir / "init.ckpt", init, fingerprint(tiny_game()));
  const Run r = arena_cmd(with_tiny({"pretrain", "--epochs", "0", "--dataset", dataset, "--init",
                                     (dir / "init.ckpt").string(), "--model",
                                     (dir / "out.ckpt").string(), "--out", dir.string()}));
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(dir / "out.ckpt") == slurp(dir / "init.ckpt"));
  fs::remove_all(dir);
}

TEST_CASE("mismatched fingerprints are refused") {
  const auto dir = arena::testing::temp_dir("cli-fingerprint");
  const std::string dataset = (dir / "d.jsonl").string();
  REQUIRE(arena_cmd(with_tiny({"collect", "--episodes", "2", "--dataset", dataset, "--out",
                               dir.string()}))
              .code == kExitOk);
  // Same command line but a different game: the dataset no longer matches.
  Run r = arena_cmd(with_tiny({"pretrain", "--epochs", "1", "--dataset", dataset, "--model",
                               (dir / "m.ckpt").string(), "--out", dir.string(), "--set",
                               "game.n_walls=3"}));
  CHECK(r.code == kExitUsage);
  CHECK(r.err.find("fingerprint") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "m.ckpt"));

  ModelConfig mc;
  mc.embed_dim = 8;
  mc.trunk = {16, 16};
  save_model(dir / "other.ckpt", PolicyModel(mc, EncoderLimits{}, 1), fingerprint(GameConfig{}));
  r = arena_cmd(with_tiny({"eval", "--episodes", "1", "--model", (dir / "other.ckpt").string(),
                           "--out", dir.string()}));
  CHECK(r.code == kExitFailure);
  CHECK(r.err.find("fingerprint") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("eval of a fresh model against Random partitions rates") {
  const auto dir = arena::testing::temp_dir("cli-eval");
  ModelConfig mc;
  mc.embed_dim = 8;
  mc.trunk = {16, 16};
  save_model(dir / "fresh.ckpt", PolicyModel(mc, EncoderLimits{}, 4), fingerprint(tiny_game()));
  const Run r = arena_cmd(with_tiny({"eval", "--episodes", "4", "--opponent", "random", "--model",
                                     (dir / "fresh.ckpt").string(), "--out", dir.string()}));
  REQUIRE(r.code == kExitOk);
  const auto reports =
      parse_reports(slurp(dir / "eval.jsonl"), ExportFormat::Records, "eval.jsonl");
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].opponent == "Random");
  CHECK(reports[0].episodes == 4);
  CHECK(reports[0].win_rate + reports[0].loss_rate + reports[0].timeout_rate ==
        doctest::Approx(100.0));
  CHECK(r.out == slurp(dir / "eval.csv"));

  const Run ex = arena_cmd({"export", "--input", (dir / "eval.jsonl").string(), "--out",
                            (dir / "copy.csv").string()});
  REQUIRE(ex.code == kExitOk);
  CHECK(slurp(dir / "copy.csv") == slurp(dir / "eval.csv"));
  fs::remove_all(dir);
}

TEST_CASE("desk pipeline runs end to end and emits every artifact") {
  const auto dir = arena::testing::temp_dir("cli-pipeline");
  const std::string dataset = (dir / "d.jsonl").string();
  const std::string out = (dir / "run").string();
  REQUIRE(arena_cmd(with_tiny({"collect", "--episodes", "3", "--dataset", dataset, "--out", out}))
              .code == kExitOk);
  REQUIRE(arena_cmd(with_tiny({"pretrain", "--epochs", "2", "--dataset", dataset, "--model",
                               (dir / "bc.ckpt").string(), "--out", out}))
              .code == kExitOk);
  const Run train = arena_cmd(with_tiny(
      {"train", "--episodes", "4", "--model", (dir / "bc.ckpt").string(), "--dataset", dataset,
       "--out", out, "--set", "schedule.phase_length=2", "--set", "dqn.warmup=64", "--set",
       "dqn.batch_size=16", "--set", "offline.batch_size=32", "--set", "train.checkpoint_every=2"}));
  REQUIRE(train.code == kExitOk);
  REQUIRE(arena_cmd(with_tiny({"eval", "--episodes", "2", "--model",
                               (fs::path(out) / "hybrid.ckpt").string(), "--out", out}))
              .code == kExitOk);
  for (const char* f : {"collect.cfg", "pretrain.cfg", "pretrain_log.jsonl", "train.cfg",
                        "train_log.jsonl", "hybrid.ckpt", "checkpoints/episode_2.ckpt",
                        "checkpoints/episode_4.ckpt", "eval.cfg", "eval.csv", "eval.jsonl"}) {
    CHECK_MESSAGE(fs::exists(fs::path(out) / f), f);
  }
  const auto manifest = slurp(fs::path(out) / "train.cfg");
  CHECK(manifest.find("# fingerprint " + fingerprint(tiny_game())) != std::string::npos);
  CHECK(manifest.find("schedule.total_episodes = 4") != std::string::npos);
  fs::remove_all(dir);
}

}  // TEST_SUITE
