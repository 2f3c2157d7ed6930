#include "emr/cli/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "emr/align/toy.hpp"
#include "emr/align/trainer.hpp"
#include "emr/eval/harness.hpp"
#include "emr/metrics/metrics.hpp"
#include "emr/mining/miner.hpp"
#include "emr/mining/record.hpp"
#include "emr/reward/micro.hpp"
#include "emr/reward/reward.hpp"
#include "emr/util/error.hpp"
#include "emr/util/fs.hpp"
#include "emr/util/parallel.hpp"
#include "emr/util/process.hpp"

#ifndef EMR_SOURCE_DIR
#define EMR_SOURCE_DIR "."
#endif

namespace emr::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

GlobalConfig GlobalConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  GlobalConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "compiler") {
        c.compiler = value.get<std::string>();
      } else if (key == "git") {
        c.git = value.get<std::string>();
      } else if (key == "workers") {
        c.workers = value.get<std::size_t>();
      } else if (key == "log_level") {
        c.log_level = value.get<std::string>();
      } else if (key == "work_dir") {
        c.work_dir = value.get<std::string>();
      } else if (key == "compile_timeout_s") {
        c.compile_timeout_s = value.get<double>();
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const json::exception&) {
      throw ConfigError("config key '" + key + "' has the wrong type");
    }
  }
  return c;
}

GlobalConfig resolve_config(const std::optional<fs::path>& config_file, const EnvLookup& env,
                            const ConfigOverrides& flags) {
  GlobalConfig c;
  if (config_file) {
    if (!fs::is_regular_file(*config_file)) {
      throw ConfigError("config file not found: " + config_file->string());
    }
    c = GlobalConfig::from_json_text(util::read_file(*config_file));
  }
  if (auto v = env("EMR_COMPILER"); v && !v->empty()) c.compiler = *v;
  if (auto v = env("EMR_GIT"); v && !v->empty()) c.git = *v;
  if (flags.compiler) c.compiler = *flags.compiler;
  if (flags.git) c.git = *flags.git;
  if (flags.workers) c.workers = *flags.workers;
  if (flags.log_level) c.log_level = *flags.log_level;
  if (flags.work_dir) c.work_dir = *flags.work_dir;
  if (c.compile_timeout_s <= 0) throw ConfigError("compile_timeout_s must be positive");
  if (spdlog::level::from_str(c.log_level) == spdlog::level::off && c.log_level != "off") {
    throw ConfigError("unknown log level '" + c.log_level + "'");
  }
  return c;
}

std::string default_compiler_template() {
  if (util::find_executable("javac")) return "javac -proc:none -nowarn -d {dir} {file}";
  fs::path wrapper = fs::path(EMR_SOURCE_DIR) / "tools" / "janinoc";
  if (fs::exists(wrapper)) return wrapper.string() + " {file}";
  return "javac -proc:none -nowarn -d {dir} {file}";
}

namespace {

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

void setup_logging(const std::string& level) {
  static auto logger = spdlog::stderr_logger_mt("emr");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
  spdlog::set_pattern("[%l] %v");
}

std::string read_required(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw DataError(std::string(what) + " not found: " + path);
  return util::read_file(path);
}

ordered_json breakdown_json(const reward::RewardBreakdown& b) {
  ordered_json j;
  j["r_syntax"] = b.r_syntax;
  j["r_compile"] = b.r_compile;
  j["r_detect"] = b.r_detect;
  j["r_total"] = b.r_total;
  j["diagnostics"] = b.diagnostics;
  return j;
}

struct OracleOptions {
  std::string kind = "java";
  std::string weights = "1,1,1";
  std::string class_context_file;
  int micro_slots = 12;
  std::size_t min_statements = 1;
  double min_match = 0.5;
};

void add_oracle_options(CLI::App* cmd, OracleOptions& o, bool with_detect) {
  cmd->add_option("--weights", o.weights, "reward weights w1,w2,w3")->capture_default_str();
  cmd->add_option("--oracle", o.kind, "java: parser + compiler; micro: the toy language")
      ->check(CLI::IsMember({"java", "micro"}))
      ->capture_default_str();
  cmd->add_option("--class-context", o.class_context_file,
                  "file with fields/imports hosted around the snippet");
  cmd->add_option("--micro-slots", o.micro_slots, "field slots of the micro language")
      ->capture_default_str();
  if (with_detect) {
    cmd->add_option("--min-statements", o.min_statements, "detector minimum extracted statements")
        ->capture_default_str();
  }
}

std::unique_ptr<reward::RewardOracle> make_oracle(const OracleOptions& o, const GlobalConfig& g) {
  auto weights = reward::RewardWeights::parse(o.weights);
  detect::DetectConfig dc{o.min_match, o.min_statements};
  if (o.kind == "micro") {
    return std::make_unique<reward::MicroRewardOracle>(
        weights, reward::MicroLanguage::with_slots(o.micro_slots), dc);
  }
  reward::CompileSandbox sb;
  sb.command_template = g.compiler;
  sb.workspace_root = g.work_dir;
  sb.timeout = std::chrono::milliseconds(static_cast<long long>(g.compile_timeout_s * 1000));
  if (!o.class_context_file.empty()) {
    sb.class_context = read_required(o.class_context_file, "class context file");
  }
  reward::validate_compiler(sb);
  return std::make_unique<reward::JavaRewardOracle>(weights, std::move(sb), dc);
}

// ---- mine ----

struct MineOptions {
  std::string repos;
  std::string out;
  std::size_t max_tokens = 512;
  std::string split = "0.7,0.2,0.1";
  std::uint64_t seed = 0;
  std::string half;
  bool json = false;
};

int run_mine(const MineOptions& o, const GlobalConfig& g, std::ostream& out) {
  auto ratios = mining::SplitRatios::parse(o.split);
  auto repos = mining::load_repo_list(o.repos);
  mining::Half half = mining::Half::All;
  if (o.half == "sft") half = mining::Half::Sft;
  if (o.half == "rl") half = mining::Half::Rl;
  repos = mining::select_half(repos, half);

  mining::MiningConfig mc;
  mc.git_binary = g.git;
  mc.workers = g.workers;
  mc.work_root = g.work_dir;
  if (!util::find_executable(mc.git_binary)) {
    throw ConfigError("version-control binary '" + mc.git_binary + "' not found");
  }
  auto mined = mining::mine_repositories(repos, mc);
  auto kept = mining::deduplicate(mining::filter_by_token_length(mined, o.max_tokens));
  spdlog::info("mined {} records, {} after filtering and dedup", mined.size(), kept.size());

  fs::create_directories(o.out);
  mining::write_jsonl(kept, fs::path(o.out) / "dataset.jsonl");
  ordered_json summary;
  summary["repositories"] = repos.size();
  summary["mined"] = mined.size();
  summary["records"] = kept.size();
  if (kept.size() >= 3) {
    auto split = mining::split_dataset(kept, ratios, o.seed);
    mining::write_jsonl(split.train, fs::path(o.out) / "train.jsonl");
    mining::write_jsonl(split.test, fs::path(o.out) / "test.jsonl");
    mining::write_jsonl(split.valid, fs::path(o.out) / "valid.jsonl");
    summary["train"] = split.train.size();
    summary["test"] = split.test.size();
    summary["valid"] = split.valid.size();
  } else {
    spdlog::warn("fewer than 3 records; no train/test/valid split written");
  }
  if (o.json) {
    out << summary.dump() << "\n";
  } else {
    for (const auto& [k, v] : summary.items()) out << k << ": " << v.dump() << "\n";
  }
  return 0;
}

// ---- score ----

struct ScoreOptions {
  std::string before;
  std::string generated;
  bool batch = false;
  bool json = false;
  OracleOptions oracle;
};

int run_score(const ScoreOptions& o, const GlobalConfig& g, std::istream& in, std::ostream& out) {
  auto oracle = make_oracle(o.oracle, g);
  if (o.batch) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ordered_json req;
      try {
        req = ordered_json::parse(line);
        auto b = oracle->score(req.at("before").get<std::string>(),
                               req.at("generated").get<std::string>());
        ordered_json resp;
        resp["id"] = req.contains("id") ? req["id"] : ordered_json();
        auto fields = breakdown_json(b);
        for (auto& [k, v] : fields.items()) resp[k] = v;
        out << resp.dump() << "\n" << std::flush;
      } catch (const json::exception& e) {
        throw DataError("stdin line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    return 0;
  }
  if (o.before.empty() || o.generated.empty()) {
    throw ConfigError("score needs --before and --generated, or --batch");
  }
  auto b = oracle->score(read_required(o.before, "before file"),
                         read_required(o.generated, "generated file"));
  if (o.json) {
    out << breakdown_json(b).dump() << "\n";
  } else {
    out << fmt::format("r_syntax {}\nr_compile {}\nr_detect {}\nr_total {}\n", b.r_syntax,
                       b.r_compile, b.r_detect, b.r_total);
    for (const auto& d : b.diagnostics) out << "  " << d << "\n";
  }
  return 0;
}

// ---- metrics ----

struct MetricsOptions {
  std::string pairs;
  std::string mixture = "0.25,0.25,0.25,0.25";
  bool json = false;
  bool csv = false;
};

int run_metrics(const MetricsOptions& o, const GlobalConfig& g, std::ostream& out) {
  auto mixture = metrics::Mixture::parse(o.mixture);
  std::ifstream in(o.pairs);
  if (!in) throw DataError("cannot open pairs file: " + o.pairs);
  std::vector<metrics::ScoredPair> pairs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      pairs.push_back({j.at("candidate").get<std::string>(), j.at("reference").get<std::string>()});
    } catch (const json::exception& e) {
      throw DataError(o.pairs + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  auto r = metrics::corpus_report(pairs, mixture, g.workers ? g.workers : util::default_workers());
  // Reported on a 0-100 scale.
  std::vector<std::pair<std::string, double>> cols = {
      {"bleu", r.bleu},
      {"rouge_l_precision", r.rouge_l.precision},
      {"rouge_l_recall", r.rouge_l.recall},
      {"rouge_l_f1", r.rouge_l.f1},
      {"codebleu", r.codebleu},
      {"ngram_match", r.ngram_match},
      {"weighted_ngram_match", r.weighted_ngram_match},
      {"ast_match", r.ast_match},
      {"dataflow_match", r.dataflow_match},
  };
  if (o.csv) {
    out << "n_pairs";
    for (const auto& c : cols) out << "," << c.first;
    out << "\n" << r.n_pairs;
    for (const auto& c : cols) out << "," << fmt::format("{}", 100.0 * c.second);
    out << "\n";
  } else if (o.json) {
    ordered_json j;
    j["n_pairs"] = r.n_pairs;
    for (const auto& c : cols) j[c.first] = 100.0 * c.second;
    out << j.dump() << "\n";
  } else {
    out << fmt::format("{:<22}{}\n", "n_pairs", r.n_pairs);
    for (const auto& c : cols) out << fmt::format("{:<22}{:.2f}\n", c.first, 100.0 * c.second);
  }
  return 0;
}

// ---- train ----

struct TrainOptions {
  std::string mode;
  std::string sft_data;
  std::string rl_data;
  std::string preset = "desk";
  std::uint64_t seed = 0;
  std::string out;
  std::string init;
  std::optional<std::size_t> rl_steps;
  std::optional<std::size_t> sft_epochs;
  bool json = false;
  OracleOptions oracle;
};

int run_train(const TrainOptions& o, const GlobalConfig& g, std::ostream& out) {
  auto mode = align::parse_mode(o.mode);
  auto config = align::TrainConfig::preset_named(o.preset);
  config.seed = o.seed;
  config.reward_workers = g.workers ? g.workers : util::default_workers();
  if (o.rl_steps) config.rl_steps = *o.rl_steps;
  if (o.sft_epochs) config.sft_epochs = *o.sft_epochs;

  std::vector<mining::RefactoringRecord> sft, rl;
  bool need_sft = mode != align::TrainMode::Rl;
  bool need_rl = mode != align::TrainMode::Sft;
  if (need_sft) {
    if (o.sft_data.empty()) throw ConfigError("--sft-data is required for mode " + o.mode);
    sft = mining::read_jsonl(o.sft_data);
  }
  if (need_rl) {
    if (o.rl_data.empty()) throw ConfigError("--rl-data is required for mode " + o.mode);
    rl = mining::read_jsonl(o.rl_data);
  }
  auto oracle = make_oracle(o.oracle, g);
  std::optional<align::PolicySnapshot> initial;
  if (!o.init.empty()) initial = align::load_snapshot(o.init);

  auto result = align::train(mode, sft, rl, *oracle, config, initial ? &*initial : nullptr);
  fs::create_directories(o.out);
  align::save_snapshot(result.snapshot, fs::path(o.out) / "policy.json");
  util::write_file(fs::path(o.out) / "train_log.csv", result.log.csv());
  util::write_file(fs::path(o.out) / "sft_log.csv", result.log.sft_csv());

  ordered_json summary;
  summary["mode"] = align::to_string(mode);
  summary["preset"] = config.preset;
  summary["seed"] = config.seed;
  summary["sft_records"] = sft.size();
  summary["rl_records"] = rl.size();
  summary["rl_steps"] = result.log.rl.size();
  if (!result.log.rl.empty()) {
    summary["final_mean_reward"] = result.log.rl.back().mean_reward;
    summary["final_reward_std"] = result.log.rl.back().reward_std;
  }
  if (!result.log.sft.empty()) summary["final_sft_loss"] = result.log.sft.back().loss;
  if (need_rl) {
    auto [mean, sd] = align::evaluate_policy(result.snapshot, rl, *oracle, config, config.seed + 1);
    summary["eval_mean_reward"] = mean;
    summary["eval_reward_std"] = sd;
  }
  summary["snapshot"] = (fs::path(o.out) / "policy.json").string();
  if (o.json) {
    out << summary.dump() << "\n";
  } else {
    for (const auto& [k, v] : summary.items()) out << k << ": " << v.dump() << "\n";
  }
  return 0;
}

// ---- eval ----

struct EvalOptions {
  std::string pairs;
  std::string bindings;
  double timeout_s = 60.0;
  bool json = false;
  bool csv = false;
  OracleOptions oracle;
};

int run_eval(const EvalOptions& o, const GlobalConfig& g, std::ostream& out) {
  auto pairs = eval::read_pairs(o.pairs);
  auto oracle = make_oracle(o.oracle, g);
  std::optional<std::map<std::string, eval::TestCaseBinding>> bindings;
  if (!o.bindings.empty()) bindings = eval::load_bindings(o.bindings);
  eval::EvalConfig ec;
  ec.workers = g.workers;
  ec.test_timeout = std::chrono::milliseconds(static_cast<long long>(o.timeout_s * 1000));
  auto report = eval::evaluate_batch(pairs, *oracle, bindings ? &*bindings : nullptr, ec);
  if (o.csv) {
    out << report.to_csv();
  } else if (o.json) {
    out << report.to_json();
  } else {
    out << fmt::format("samples               {}\n", report.n);
    out << fmt::format("syntactically correct {:.1f}%\n", report.pct_syntactic);
    out << fmt::format("refactoring detected  {:.1f}%\n", report.pct_detected);
    out << fmt::format("compile successfully  {:.1f}%\n", report.pct_compiled);
    out << fmt::format("unit tests passed     {} of {}\n", report.tests_passed, report.tests_total);
  }
  return 0;
}

// ---- toy-corpus ----

struct ToyOptions {
  std::size_t n_sft = 500;
  std::size_t n_rl = 200;
  std::uint64_t seed = 0;
  std::string out;
};

int run_toy(const ToyOptions& o, std::ostream& out) {
  auto [sft, rl] = align::toy_datasets(o.n_sft, o.n_rl, o.seed);
  fs::create_directories(o.out);
  mining::write_jsonl(sft, fs::path(o.out) / "sft.jsonl");
  mining::write_jsonl(rl, fs::path(o.out) / "rl.jsonl");
  ordered_json summary;
  summary["sft"] = sft.size();
  summary["rl"] = rl.size();
  out << summary.dump() << "\n";
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Extract Method refactoring: mining, rewards, metrics, training, evaluation", "emr"};
  app.require_subcommand(0, 1);

  std::optional<std::string> config_file;
  ConfigOverrides flags;
  app.add_option("--config", config_file, "JSON config file");
  app.add_option("--compiler", flags.compiler, "compiler command template ({file}, {dir}, {classpath})");
  app.add_option("--git", flags.git, "version-control binary");
  app.add_option("--workers", flags.workers, "worker threads (0: all cores)");
  app.add_option("--log-level", flags.log_level, "trace|debug|info|warn|error|off");
  app.add_option("--work-dir", flags.work_dir, "root for scratch directories");

  MineOptions mine;
  auto* c_mine = app.add_subcommand("mine", "mine Extract Method records from git histories");
  c_mine->add_option("--repos", mine.repos, "repository list (JSON array or one per line)")->required();
  c_mine->add_option("--out", mine.out, "output directory")->required();
  c_mine->add_option("--max-tokens", mine.max_tokens, "token limit per side")->capture_default_str();
  c_mine->add_option("--split", mine.split, "train,test,valid ratios")->capture_default_str();
  c_mine->add_option("--seed", mine.seed, "split seed")->capture_default_str();
  c_mine->add_option("--half", mine.half, "mine only one half of the repo list")
      ->check(CLI::IsMember({"sft", "rl"}));
  c_mine->add_flag("--json", mine.json, "JSON summary on stdout");

  ScoreOptions score;
  auto* c_score = app.add_subcommand("score", "reward breakdown for one generated refactoring");
  c_score->add_option("--before", score.before, "file with the method before refactoring");
  c_score->add_option("--generated", score.generated, "file with the generated code");
  c_score->add_flag("--batch", score.batch,
                    "read {\"id\",\"before\",\"generated\"} lines on stdin, one breakdown per line");
  c_score->add_flag("--json", score.json, "JSON output");
  add_oracle_options(c_score, score.oracle, true);

  MetricsOptions met;
  auto* c_met = app.add_subcommand("metrics", "BLEU, ROUGE-L and CodeBLEU over candidate/reference pairs");
  c_met->add_option("--pairs", met.pairs, "JSONL with {\"candidate\",\"reference\"}")->required();
  c_met->add_option("--mixture", met.mixture, "CodeBLEU weights a,b,c,d")->capture_default_str();
  auto* met_json = c_met->add_flag("--json", met.json, "JSON output");
  c_met->add_flag("--csv", met.csv, "CSV output")->excludes(met_json);

  TrainOptions tr;
  auto* c_train = app.add_subcommand("train", "SFT and/or PPO training of the policy");
  c_train->add_option("--mode", tr.mode, "sft|rl|sft+rl")
      ->required()
      ->check(CLI::IsMember({"sft", "rl", "sft+rl"}));
  c_train->add_option("--sft-data", tr.sft_data, "JSONL records for SFT");
  c_train->add_option("--rl-data", tr.rl_data, "JSONL records for RL");
  c_train->add_option("--preset", tr.preset, "desk|paper")->capture_default_str();
  c_train->add_option("--seed", tr.seed, "seed")->capture_default_str();
  c_train->add_option("--out", tr.out, "output directory")->required();
  c_train->add_option("--init", tr.init, "start from this policy snapshot");
  c_train->add_option("--rl-steps", tr.rl_steps, "override the preset's RL steps");
  c_train->add_option("--sft-epochs", tr.sft_epochs, "override the preset's SFT epochs");
  c_train->add_flag("--json", tr.json, "JSON summary on stdout");
  add_oracle_options(c_train, tr.oracle, true);

  EvalOptions ev;
  ev.oracle.min_statements = detect::qualitative_detect_config().min_statements;
  auto* c_eval = app.add_subcommand("eval", "qualitative evaluation of generated refactorings");
  c_eval->add_option("--pairs", ev.pairs, "JSONL with {\"before\",\"generated\",\"id\"}")->required();
  c_eval->add_option("--bindings", ev.bindings, "unit-test binding directory");
  c_eval->add_option("--timeout", ev.timeout_s, "per-sample test timeout in seconds")
      ->capture_default_str();
  auto* ev_json = c_eval->add_flag("--json", ev.json, "JSON output");
  c_eval->add_flag("--csv", ev.csv, "CSV output")->excludes(ev_json);
  add_oracle_options(c_eval, ev.oracle, true);

  ToyOptions toy;
  auto* c_toy = app.add_subcommand("toy-corpus", "write disjoint SFT/RL toy datasets");
  c_toy->add_option("--n-sft", toy.n_sft)->capture_default_str();
  c_toy->add_option("--n-rl", toy.n_rl)->capture_default_str();
  c_toy->add_option("--seed", toy.seed)->capture_default_str();
  c_toy->add_option("--out", toy.out, "output directory")->required();

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("emr");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return 2;
  }

  try {
    auto g = resolve_config(config_file, process_env, flags);
    setup_logging(g.log_level);
    if (g.compiler.empty()) g.compiler = default_compiler_template();
    if (c_mine->parsed()) return run_mine(mine, g, out);
    if (c_score->parsed()) return run_score(score, g, in, out);
    if (c_met->parsed()) return run_metrics(met, g, out);
    if (c_train->parsed()) return run_train(tr, g, out);
    if (c_eval->parsed()) return run_eval(ev, g, out);
    if (c_toy->parsed()) return run_toy(toy, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace emr::cli
