#include "arena/cli/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "arena/agents/scripted.hpp"
#include "arena/config/run_config.hpp"
#include "arena/data/dataset.hpp"
#include "arena/errors.hpp"
#include "arena/eval/evaluation.hpp"
#include "arena/format.hpp"
#include "arena/model/gradient_checks.hpp"
#include "arena/server/server.hpp"
#include "arena/train/hybrid.hpp"

namespace arena {

namespace fs = std::filesystem;

namespace {

std::string format_fixed(double v, int digits) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

// A failure that is the caller's fault: bad flags or refused overwrites.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, model, dataset, opponent, init, input, format, head;
  std::optional<int> episodes, epochs, port;
  std::vector<std::string> sets;
  bool force = false;
};

enum class Command { Collect, Pretrain, Train, Eval, Gradcheck, Export, Play };

struct Context {
  Command command;
  const char* name;
  Flags flags;
  RunConfig config;
  std::ostream* out;
  std::ostream* err;
};

RunConfig resolve_config(const Context& ctx, const std::map<std::string, std::string>& env) {
  const Flags& f = ctx.flags;
  RunConfig c = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  apply_env_overrides(c, env);
  for (const std::string& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    c.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (f.seed) {
    c.set(ctx.command == Command::Eval ? "eval.seed" : "seed", std::to_string(*f.seed));
  }
  if (f.out) c.paths.out = *f.out;
  if (f.model) c.paths.model = *f.model;
  if (f.dataset) c.paths.dataset = *f.dataset;
  if (f.epochs) c.set("pretrain.epochs", std::to_string(*f.epochs));
  if (f.port) c.set("play.port", std::to_string(*f.port));
  if (f.episodes) {
    const char* key = ctx.command == Command::Collect ? "collect.episodes"
                      : ctx.command == Command::Train ? "schedule.total_episodes"
                                                      : "eval.episodes";
    c.set(key, std::to_string(*f.episodes));
  }
  if (f.opponent && ctx.command == Command::Collect) c.set("collect.enemy", *f.opponent);
  if (f.head) c.set("play.opponent_head", *f.head);
  c.validate();
  return c;
}

// Refuses to clobber an existing file and creates the parent directory.
void guard_output(const fs::path& path, bool force) {
  if (fs::exists(path) && !force) {
    throw UsageError("refusing to overwrite " + path.string() + " (pass --force)");
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw IoError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path manifest_path(const Context& ctx) {
  return fs::path(ctx.config.paths.out) / (std::string(ctx.name) + ".cfg");
}

// Resolved settings of the run, loadable again with --config.
void write_manifest(const Context& ctx) {
  write_text(manifest_path(ctx), "# arena " + std::string(ctx.name) + "\n# fingerprint " +
                       fingerprint(ctx.config.game) + "\n" + ctx.config.canonical_text());
}

PolicyHead head_of(const RunConfig& c) {
  return c.play.opponent_head == "imitation" ? PolicyHead::Imitation : PolicyHead::Q;
}

DemoDataset load_matching_dataset(const RunConfig& c) {
  DemoDataset ds = load_dataset(c.paths.dataset);
  if (ds.fingerprint != fingerprint(c.game)) {
    throw ConfigError("dataset " + c.paths.dataset + " was recorded with config fingerprint " +
                      ds.fingerprint + ", current config is " + fingerprint(c.game));
  }
  return ds;
}

int cmd_collect(Context& ctx) {
  const RunConfig& c = ctx.config;
  guard_output(c.paths.dataset, ctx.flags.force);
  guard_output(manifest_path(ctx), ctx.flags.force);
  ScriptedPolicy player(parse_scripted_variant(c.collect.player));
  ScriptedPolicy enemy(parse_scripted_variant(c.collect.enemy));
  const DemoDataset ds = record_demos(player, enemy, c.collect.episodes, c.game, c.seed);
  save_dataset(c.paths.dataset, ds);
  write_manifest(ctx);
  *ctx.out << "recorded " << ds.samples.size() << " samples from " << c.collect.episodes
           << " episodes (" << player.name() << " vs " << enemy.name() << ") -> "
           << c.paths.dataset << "\n";
  return kExitOk;
}

int cmd_pretrain(Context& ctx) {
  const RunConfig& c = ctx.config;
  const std::string fp = fingerprint(c.game);
  const fs::path log_path = fs::path(c.paths.out) / "pretrain_log.jsonl";
  guard_output(c.paths.model, ctx.flags.force);
  guard_output(log_path, ctx.flags.force);
  guard_output(manifest_path(ctx), ctx.flags.force);
  const DemoDataset ds = load_matching_dataset(c);
  PolicyModel model = ctx.flags.init ? load_model(*ctx.flags.init, fp)
                                     : PolicyModel(c.model, c.encoder, c.seed);
  const auto [train, validation] = split_dataset(ds, c.pretrain.validation_fraction, c.seed);
  const EncodedDemos etr = encode_demos(train.samples, model.limits());
  const EncodedDemos eva = encode_demos(validation.samples, model.limits());
  *ctx.out << "pretraining on " << etr.size() << " samples, validating on " << eva.size()
           << " (majority baseline " << format_fixed(majority_baseline(eva), 3) << ")\n";
  const PretrainResult res = run_pretraining(
      model, etr, eva, c.pretrain.epochs, c.pretrain.bc, c.optimizer, c.seed,
      [&](const EpochRecord& r) {
        *ctx.out << "epoch " << r.epoch << " train_loss " << format_fixed(r.train_loss, 4)
                 << " val_loss " << format_fixed(r.validation_loss, 4) << " val_acc "
                 << format_fixed(r.validation_accuracy, 3) << "\n";
      });
  save_model(c.paths.model, res.best, fp);
  res.log.write(log_path);
  write_manifest(ctx);
  *ctx.out << "best epoch " << res.best_epoch << " val_loss "
           << format_fixed(res.best_validation_loss, 4) << " -> " << c.paths.model << "\n";
  return kExitOk;
}

int cmd_train(Context& ctx) {
  const RunConfig& c = ctx.config;
  const std::string fp = fingerprint(c.game);
  const fs::path out_dir = c.paths.out;
  const fs::path model_path = out_dir / "hybrid.ckpt";
  const fs::path log_path = out_dir / "train_log.jsonl";
  guard_output(model_path, ctx.flags.force);
  guard_output(log_path, ctx.flags.force);
  guard_output(manifest_path(ctx), ctx.flags.force);
  PolicyModel model = load_model(c.paths.model, fp);
  const HybridConfig hc = c.hybrid();
  EncodedDemos demos;
  const auto plan = plan_schedule(hc.schedule);
  if (std::find(plan.begin(), plan.end(), EpisodeMode::Offline) != plan.end()) {
    demos = encode_demos(load_matching_dataset(c).samples, model.limits());
  }
  ScriptedPolicy opponent(parse_scripted_variant(ctx.flags.opponent.value_or("rule")));
  fs::create_directories(out_dir / "checkpoints");
  TrainingLog partial;
  TrainingLog log;
  try {
    log = run_hybrid_training(model, demos, opponent, hc, [&](const EpisodeRecord& r,
                                                              const PolicyModel& m) {
      partial.add(r);
      if (r.mode == EpisodeMode::Online && (r.episode + 1) % 10 == 0) {
        *ctx.out << "episode " << r.episode << " " << to_string(r.outcome) << " length "
                 << r.length << " reward " << format_fixed(r.reward_sum, 3) << " epsilon "
                 << format_fixed(r.epsilon, 3) << "\n";
      }
      if (c.checkpoint_every > 0 && (r.episode + 1) % c.checkpoint_every == 0) {
        save_model(out_dir / "checkpoints" / ("episode_" + std::to_string(r.episode + 1) + ".ckpt"),
                   m, fp);
      }
    });
  } catch (const TrainingError&) {
    // Keep what was learned before the failure for diagnosis.
    partial.write(log_path);
    save_model(model_path, model, fp);
    write_manifest(ctx);
    throw;
  }
  save_model(model_path, model, fp);
  log.write(log_path);
  write_manifest(ctx);
  long wins = 0;
  const auto online = log.online_episodes();
  for (const auto& r : online) wins += r.won();
  *ctx.out << "trained " << log.episodes().size() << " episodes (" << online.size()
           << " online, " << wins << " won) -> " << model_path.string() << "\n";
  return kExitOk;
}

std::vector<ScriptedVariant> eval_opponents(const Context& ctx) {
  if (ctx.flags.opponent) return {parse_scripted_variant(*ctx.flags.opponent)};
  return {ScriptedVariant::RuleBased, ScriptedVariant::RuleBased2, ScriptedVariant::Random};
}

int cmd_eval(Context& ctx) {
  const RunConfig& c = ctx.config;
  const fs::path out_dir = c.paths.out;
  guard_output(out_dir / "eval.csv", ctx.flags.force);
  guard_output(out_dir / "eval.jsonl", ctx.flags.force);
  guard_output(manifest_path(ctx), ctx.flags.force);
  const PolicyModel model = load_model(c.paths.model, fingerprint(c.game));
  ModelPolicy agent(model, head_of(c), 0.0, fs::path(c.paths.model).filename().string());
  std::vector<EvalReport> reports;
  for (ScriptedVariant v : eval_opponents(ctx)) {
    ScriptedPolicy opponent(v);
    reports.push_back(run_match(agent, opponent, c.eval.episodes, c.game, c.eval.seed, c.rewards));
  }
  write_reports(out_dir / "eval.csv", reports, ExportFormat::Table);
  write_reports(out_dir / "eval.jsonl", reports, ExportFormat::Records);
  write_manifest(ctx);
  *ctx.out << export_reports(reports, ExportFormat::Table);
  return kExitOk;
}

int cmd_gradcheck(Context& ctx) {
  bool ok = true;
  for (const BlockCheck& b : run_gradient_checks(ctx.config.seed)) {
    const bool pass = b.result.passed();
    ok = ok && pass;
    *ctx.out << (pass ? "PASS " : "FAIL ") << b.block << " max_rel_error "
             << format_double(b.result.max_error) << " checked " << b.result.checked << "\n";
  }
  return ok ? kExitOk : kExitFailure;
}

int cmd_export(Context& ctx) {
  if (!ctx.flags.input) throw UsageError("export needs --input <records file>");
  if (!ctx.flags.out) throw UsageError("export needs --out <file>");
  const ExportFormat format = parse_export_format(ctx.flags.format.value_or("csv"));
  std::ifstream in(*ctx.flags.input, std::ios::binary);
  if (!in) throw IoError("cannot open " + *ctx.flags.input);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto reports = parse_reports(buf.str(), ExportFormat::Records, *ctx.flags.input);
  guard_output(*ctx.flags.out, ctx.flags.force);
  write_reports(*ctx.flags.out, reports, format);
  *ctx.out << "exported " << reports.size() << " reports -> " << *ctx.flags.out << "\n";
  return kExitOk;
}

std::atomic<bool> g_stop{false};

int cmd_play(Context& ctx) {
  const RunConfig& c = ctx.config;
  const PolicyModel model = load_model(c.paths.model, fingerprint(c.game));
  ServerOptions opts;
  opts.port = static_cast<unsigned short>(c.play.port);
  opts.session.tick_hz = c.play.tick_hz;
  opts.session.seed = c.seed;
  opts.session.head = head_of(c);
  PlayServer server(model, c.game, opts);
  server.start();
  *ctx.out << "serving " << c.paths.model << " on ws://" << opts.address << ":" << server.port()
           << " at " << c.play.tick_hz << " Hz (Ctrl-C to stop)" << std::endl;
  g_stop = false;
  auto on_signal = [](int) { g_stop = true; };
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  server.wait();
  return kExitOk;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "settings file of key = value lines")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "run seed (eval: evaluation seed)");
  sub->add_option("--set", f.sets, "override one setting, key=value (repeatable)");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::map<std::string, std::string>& env) {
  CLI::App app{"Hybrid imitation and reinforcement learning lab for a 2D arena shooter", "arena"};
  app.require_subcommand(1);
  Flags f;

  auto* collect = app.add_subcommand("collect", "record scripted demonstrations");
  add_common(collect, f);
  collect->add_option("--dataset", f.dataset, "output dataset file");
  collect->add_option("--episodes", f.episodes, "episodes to record");
  collect->add_option("--opponent", f.opponent, "enemy policy: random|rule|rule2");
  collect->add_option("--out", f.out, "directory for the run manifest");
  collect->add_flag("--force", f.force, "overwrite existing outputs");

  auto* pretrain = app.add_subcommand("pretrain", "behavioral cloning on a dataset");
  add_common(pretrain, f);
  pretrain->add_option("--dataset", f.dataset, "input dataset file");
  pretrain->add_option("--model", f.model, "output checkpoint (best validation loss)");
  pretrain->add_option("--init", f.init, "start from this checkpoint instead of fresh weights");
  pretrain->add_option("--epochs", f.epochs, "training epochs");
  pretrain->add_option("--out", f.out, "directory for the log and manifest");
  pretrain->add_flag("--force", f.force, "overwrite existing outputs");

  auto* train = app.add_subcommand("train", "hybrid offline/online training");
  add_common(train, f);
  train->add_option("--model", f.model, "input checkpoint");
  train->add_option("--dataset", f.dataset, "demonstrations for offline episodes");
  train->add_option("--episodes", f.episodes, "total episodes");
  train->add_option("--opponent", f.opponent, "online opponent: random|rule|rule2 (default rule)");
  train->add_option("--out", f.out, "directory for hybrid.ckpt, the log and checkpoints");
  train->add_flag("--force", f.force, "overwrite existing outputs");

  auto* eval = app.add_subcommand("eval", "greedy evaluation against scripted opponents");
  add_common(eval, f);
  eval->add_option("--model", f.model, "checkpoint to evaluate");
  eval->add_option("--episodes", f.episodes, "episodes per opponent");
  eval->add_option("--opponent", f.opponent, "only this opponent: random|rule|rule2");
  eval->add_option("--head", f.head, "q|imitation (default q)");
  eval->add_option("--out", f.out, "directory for eval.csv and eval.jsonl");
  eval->add_flag("--force", f.force, "overwrite existing outputs");

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  add_common(gradcheck, f);

  auto* exporter = app.add_subcommand("export", "convert evaluation records to a table");
  exporter->add_option("--input", f.input, "eval.jsonl records file")->required();
  exporter->add_option("--format", f.format, "csv|jsonl (default csv)");
  exporter->add_option("--out", f.out, "output file")->required();
  exporter->add_flag("--force", f.force, "overwrite an existing output");

  auto* play = app.add_subcommand("play", "serve human-vs-agent matches over websockets");
  add_common(play, f);
  play->add_option("--model", f.model, "agent checkpoint");
  play->add_option("--port", f.port, "listening port");
  play->add_option("--head", f.head, "q|imitation (default q)");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::pair<CLI::App*, Command> table[] = {
      {collect, Command::Collect}, {pretrain, Command::Pretrain}, {train, Command::Train},
      {eval, Command::Eval},       {gradcheck, Command::Gradcheck}, {exporter, Command::Export},
      {play, Command::Play}};
  Context ctx{Command::Collect, "", f, {}, &out, &err};
  for (const auto& [sub, cmd] : table) {
    if (sub->parsed()) {
      ctx.command = cmd;
      ctx.name = sub->get_name().c_str();
    }
  }
  const std::string name = ctx.name;
  ctx.name = name.c_str();
  try {
    if (ctx.command != Command::Export) ctx.config = resolve_config(ctx, env);
    switch (ctx.command) {
      case Command::Collect: return cmd_collect(ctx);
      case Command::Pretrain: return cmd_pretrain(ctx);
      case Command::Train: return cmd_train(ctx);
      case Command::Eval: return cmd_eval(ctx);
      case Command::Gradcheck: return cmd_gradcheck(ctx);
      case Command::Export: return cmd_export(ctx);
      case Command::Play: return cmd_play(ctx);
    }
  } catch (const UsageError& e) {
    err << "arena " << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "arena " << name << ": config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "arena " << name << ": " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace arena
