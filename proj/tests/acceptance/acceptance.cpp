// Acceptance suite: one PASS/FAIL line per criterion. Exit status 1 if any
// criterion fails.
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "emr/align/policy.hpp"
#include "emr/align/ppo.hpp"
#include "emr/align/toy.hpp"
#include "emr/align/trainer.hpp"
#include "emr/cli/cli.hpp"
#include "emr/detect/detector.hpp"
#include "emr/eval/harness.hpp"
#include "emr/metrics/metrics.hpp"
#include "emr/mining/miner.hpp"
#include "emr/mining/record.hpp"
#include "emr/reward/micro.hpp"
#include "emr/reward/reward.hpp"
#include "emr/syntax/token.hpp"
#include "emr/util/fs.hpp"
#include "emr/util/parallel.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace emr;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

struct Cli {
  int code;
  std::string out;
  std::string err;
};

Cli cli(const std::vector<std::string>& args, const std::string& in = "") {
  std::istringstream is(in);
  std::ostringstream os, es;
  int code = cli::dispatch(args, is, os, es);
  return {code, os.str(), es.str()};
}

// ---------------------------------------------------------------------------

Outcome reward_algebra() {
  Outcome o;
  const int combos[8][3] = {{-1, 0, -1}, {-1, 0, 1}, {-1, 1, -1}, {-1, 1, 1},
                            {1, 0, -1},  {1, 0, 1},  {1, 1, -1},  {1, 1, 1}};
  const reward::RewardWeights weights[3] = {{1, 1, 1}, {2, 1, 1}, {1, 0.5, 3}};
  // Worked out by hand, one row per weight vector.
  const double want[3][8] = {{-2, 0, -1, 1, 0, 2, 1, 3},
                             {-3, -1, -2, 0, 1, 3, 2, 4},
                             {-4, 2, -3.5, 2.5, -2, 4, -1.5, 4.5}};
  double lo = 1e9, hi = -1e9;
  for (int w = 0; w < 3; ++w) {
    for (int k = 0; k < 8; ++k) {
      double got = reward::total_reward(combos[k][0], combos[k][1], combos[k][2], weights[w]);
      o.check(got == want[w][k], fmt::format("w{} combo {} = {} (want {})", w, k, got, want[w][k]));
      if (w == 0) {
        lo = std::min(lo, got);
        hi = std::max(hi, got);
      }
    }
  }
  o.check(lo == -2.0 && hi == 3.0, fmt::format("default bounds [{}, {}]", lo, hi));
  o.note(fmt::format("24 combinations exact, default range [{}, {}]", lo, hi));
  return o;
}

Outcome reward_pipeline() {
  Outcome o;
  if (!testing::compiler_available()) {
    o.check(false, "no Java compiler for template '" + testing::compiler_template() + "'");
    return o;
  }
  reward::CompileSandbox sb;
  sb.command_template = testing::compiler_template();
  reward::JavaRewardOracle oracle({}, sb);
  const auto& fx = testing::reward_fixtures();
  std::vector<reward::RewardBreakdown> got(fx.size());
  util::parallel_for(fx.size(), util::default_workers(),
                     [&](std::size_t i) { got[i] = oracle.score(fx[i].before, fx[i].generated); });
  int matched = 0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    const auto& f = fx[i];
    const auto& b = got[i];
    bool same = b.r_syntax == f.r_syntax && b.r_compile == f.r_compile && b.r_detect == f.r_detect;
    matched += same;
    o.check(same, fmt::format("{} got ({},{},{}) want ({},{},{})", f.name, b.r_syntax, b.r_compile,
                              b.r_detect, f.r_syntax, f.r_compile, f.r_detect));
    o.check(b.r_compile != 1 || b.r_syntax == 1, f.name + " compiled without parsing");
  }
  o.note(fmt::format("{}/{} triples match using '{}'", matched, fx.size(), sb.command_template));
  return o;
}

std::string expected_shop_jsonl(const std::string& before, const std::string& after) {
  // Hand-written from the fixture sources: caller slice before, caller slice
  // after + blank line + extracted slice; line spans counted in Shop.java.
  std::string in =
      "public void checkout(int price, int qty) {\\n    int cost = price * qty;\\n    total += cost;\\n"
      "    items += qty;\\n    System.out.println(\\\"cost \\\" + cost);\\n"
      "    System.out.println(\\\"total \\\" + total);\\n    System.out.println(\\\"items \\\" + items);\\n  }";
  std::string out =
      "public void checkout(int price, int qty) {\\n    int cost = price * qty;\\n    total += cost;\\n"
      "    items += qty;\\n    printSummary(cost);\\n  }\\n\\nprivate void printSummary(int cost) {\\n"
      "    System.out.println(\\\"cost \\\" + cost);\\n    System.out.println(\\\"total \\\" + total);\\n"
      "    System.out.println(\\\"items \\\" + items);\\n  }";
  return "{\"Input\":\"" + in + "\",\"Output\":\"" + out +
         "\",\"Meta\":{\"repo\":\"shop\",\"commit_after\":\"" + after + "\",\"commit_before\":\"" + before +
         "\",\"file_path\":\"src/Shop.java\",\"caller_name\":\"checkout\",\"extracted_name\":\"printSummary\","
         "\"caller_before_lines\":[7,14],\"extracted_lines\":[14,18]}}\n";
}

Outcome miner_end_to_end() {
  Outcome o;
  util::TempDir dir;
  auto [before, after] = testing::make_planted_repo(dir.path() / "shop");
  testing::make_refactoring_free_repo(dir.path() / "counter");
  util::write_file(dir.path() / "planted.txt", (dir.path() / "shop").string() + "\n");
  util::write_file(dir.path() / "clean.txt", (dir.path() / "counter").string() + "\n");

  auto a = cli({"--work-dir", dir.path().string(), "--log-level", "warn", "mine", "--repos",
                (dir.path() / "planted.txt").string(), "--out", (dir.path() / "a").string(), "--seed", "1"});
  o.check(a.code == 0, "mine planted exit " + std::to_string(a.code) + ": " + a.err);
  if (a.code == 0) {
    auto got = util::read_file(dir.path() / "a" / "dataset.jsonl");
    o.check(got == expected_shop_jsonl(before, after), "planted dataset.jsonl differs:\n" + got);
  }
  auto b = cli({"--work-dir", dir.path().string(), "--log-level", "warn", "mine", "--repos",
                (dir.path() / "clean.txt").string(), "--out", (dir.path() / "b").string()});
  o.check(b.code == 0, "mine clean exit " + std::to_string(b.code));
  if (b.code == 0) {
    o.check(util::read_file(dir.path() / "b" / "dataset.jsonl").empty(), "refactoring-free dataset not empty");
  }

  auto recs = testing::synthetic_records(2);
  recs[0].input = testing::method_with_tokens(512);
  recs[1].input = testing::method_with_tokens(513);
  o.check(syntax::count_tokens(recs[0].input) == 512 && syntax::count_tokens(recs[1].input) == 513,
          "boundary samples have 512/513 tokens");
  auto kept = mining::filter_by_token_length(recs, 512);
  o.check(kept.size() == 1 && kept[0] == recs[0], "512 kept, 513 dropped");

  auto split = mining::split_dataset(testing::synthetic_records(1000), {}, 7);
  o.check(split.train.size() == 700 && split.test.size() == 200 && split.valid.size() == 100,
          fmt::format("split sizes ({}, {}, {})", split.train.size(), split.test.size(), split.valid.size()));
  o.note("planted repo byte-exact, clean repo empty, 512/513 boundary, split (700, 200, 100)");
  return o;
}

Outcome detector_properties() {
  Outcome o;
  auto units = testing::java_corpus(50, 2024);
  int clean = 0;
  for (const auto& u : units) clean += detect::detect_extract_method(u, u).empty();
  o.check(clean == 50, fmt::format("detect(X, X) empty on {}/50", clean));

  auto plants = testing::planted_extractions(20, 77);
  int invariant = 0, recovered = 0;
  for (std::size_t i = 0; i < plants.size(); ++i) {
    const auto& p = plants[i];
    auto f = detect::detect_extract_method(p.before, p.after);
    bool ok = f.size() == 1 && f[0].caller_name == p.caller && f[0].extracted_name == p.extracted &&
              f[0].match_score == 1.0;
    recovered += ok;
    auto g = detect::detect_extract_method(testing::mutate_layout(p.before, i),
                                           testing::mutate_layout(p.after, 1000 + i));
    bool same = f.size() == g.size();
    for (std::size_t k = 0; same && k < f.size(); ++k) {
      same = f[k].caller_name == g[k].caller_name && f[k].extracted_name == g[k].extracted_name &&
             f[k].matched_statements == g[k].matched_statements && f[k].match_score == g[k].match_score;
    }
    invariant += same;
  }
  auto shop = detect::detect_extract_method(testing::shop_before(), testing::shop_after());
  bool shop_ok = shop.size() == 1 && shop[0].match_score == 1.0;
  o.check(invariant == 20, fmt::format("layout invariance {}/20", invariant));
  o.check(recovered == 20 && shop_ok, fmt::format("planted recovered {}/20, shop {}", recovered, shop_ok));
  o.note(fmt::format("self {}/50, invariant {}/20, planted {}/20 at score 1.0", clean, invariant, recovered));
  return o;
}

Outcome metrics_checks() {
  Outcome o;
  std::string code = testing::reward_fixtures()[9].generated;
  auto t = metrics::tokenize(code);
  o.check(metrics::bleu(t, t) == 1.0, "bleu identity");
  o.check(metrics::rouge_l(t, t).f1 == 1.0, "rouge-l identity");
  o.check(metrics::ast_match(code, code) == 1.0, "ast identity");
  o.check(metrics::codebleu(code, code).codebleu == 1.0, "codebleu identity");

  std::mt19937_64 rng(99);
  int agree = 0;
  for (int k = 0; k < 500; ++k) {
    metrics::TokenSeq a(rng() % 13), b(rng() % 13);
    for (auto& s : a) s = std::string(1, static_cast<char>('a' + rng() % 4));
    for (auto& s : b) s = std::string(1, static_cast<char>('a' + rng() % 4));
    // Quadratic table, written out independently.
    std::vector<std::vector<std::size_t>> L(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = a.size(); i-- > 0;) {
      for (std::size_t j = b.size(); j-- > 0;) {
        L[i][j] = a[i] == b[j] ? L[i + 1][j + 1] + 1 : std::max(L[i + 1][j], L[i][j + 1]);
      }
    }
    agree += metrics::lcs_length(a, b) == L[0][0];
  }
  o.check(agree == 500, fmt::format("lcs agreement {}/500", agree));

  // p = (3/4, 2/3, 1/2, 1e-9), brevity penalty 1: geometric mean by hand.
  double hand = 0.0039763536438352535;
  double got = metrics::bleu({"a", "b", "c", "d"}, {"a", "b", "c", "e"});
  o.check(std::abs(got - hand) <= 1e-9, fmt::format("bleu example {} vs {}", got, hand));

  auto parts = metrics::codebleu("int f() {\n  return 2;\n}", code, metrics::Mixture{1, 0, 0, 0});
  o.check(parts.codebleu == parts.ngram_match, "mixture (1,0,0,0) equals n-gram component");
  o.note(fmt::format("identities 1.0, lcs 500/500, bleu example {:.12f}", got));
  return o;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

Outcome trainer_numerics() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> wide(0.0, 20.0);
  double worst_norm = 0.0;
  for (int k = 0; k < 200; ++k) {
    std::vector<double> z(2 + rng() % 60);
    for (auto& v : z) v = wide(rng);
    auto p = align::softmax(z);
    worst_norm = std::max(worst_norm, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  }
  o.check(worst_norm <= 1e-9, fmt::format("softmax normalization off by {}", worst_norm));
  o.check(align::kl_divergence({0.3, 0.7}, {0.3, 0.7}) == 0.0, "KL(p||p) = 0");
  double kl = align::kl_divergence({0.5, 0.5}, {0.25, 0.75});
  o.check(std::abs(kl - 0.1438) <= 1e-4, fmt::format("KL example {}", kl));

  auto recs = align::generate_toy_corpus(6, 11);
  auto s = align::PolicySnapshot::zeros(align::build_vocabulary(recs, {}), {3, 64});
  std::normal_distribution<double> n(0.0, 0.3);
  for (auto& w : s.W) w = n(rng);
  for (auto& u : s.u) u = n(rng);
  s.b = n(rng);
  auto enc = [&](const std::string& c) { return s.vocab.encode(syntax::token_texts(c)); };

  std::vector<align::SftExample> sft;
  std::vector<align::Episode> eps;
  align::SamplingConfig sc;
  sc.max_tokens = 12;
  for (const auto& r : recs) {
    auto y = enc(r.output);
    y.push_back(s.vocab.eos());
    sft.push_back({enc(r.input), y});
    align::Episode e;
    e.x = enc(r.input);
    e.y = align::sample_sequence(s, e.x, sc, rng);
    e.r_total = static_cast<double>(rng() % 6) - 2.0;
    e.advantage = n(rng) * 3;
    eps.push_back(std::move(e));
  }
  auto old = s;
  auto batch = align::prepare_ppo_batch(old, eps);
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    double lp = align::policy_logprob(s, eps[i].x, batch[i].y).total;
    worst_ratio = std::max(worst_ratio, std::abs(std::exp(lp - batch[i].old_logprob) - 1.0));
  }
  o.check(worst_ratio <= 1e-12, fmt::format("ratio at theta_old off by {}", worst_ratio));
  for (auto& w : s.W) w += n(rng) * 0.5;

  double worst = 0.0;
  auto fd = [&](std::vector<double>& param, const std::vector<double>& g, auto f) {
    const double h = 1e-5;
    int done = 0;
    for (int tries = 0; tries < 400 && done < 10; ++tries) {
      std::size_t i = rng() % param.size();
      if (g[i] == 0.0 && tries < 300) continue;
      double keep = param[i];
      param[i] = keep + h;
      double up = f();
      param[i] = keep - h;
      double down = f();
      param[i] = keep;
      worst = std::max(worst, rel_err(g[i], (up - down) / (2 * h)));
      ++done;
    }
  };
  align::Gradient g1, g2, g3;
  align::sft_loss(s, sft, &g1);
  fd(s.W, g1.W, [&] { return align::sft_loss(s, sft, nullptr); });
  align::ppo_objective(s, batch, 0.7, std::nullopt, &g2);
  fd(s.W, g2.W, [&] { return align::ppo_objective(s, batch, 0.7, std::nullopt, nullptr).objective; });
  align::value_loss(s, eps, &g3);
  fd(s.u, g3.u, [&] { return align::value_loss(s, eps, nullptr); });
  o.check(worst <= 1e-4, fmt::format("worst finite-difference relative error {}", worst));
  o.note(fmt::format("softmax err {:.1e}, KL {:.6f}, max grad rel err {:.1e}, ratio err {:.1e}", worst_norm,
                     kl, worst, worst_ratio));
  return o;
}

// RQ3 runs are shared by the ordering and the diagnostics criteria.
struct SeedRuns {
  double sft = 0, rl = 0, sftrl = 0;
  std::vector<align::TrainLogRow> log_sftrl, log_rl;
};

std::vector<SeedRuns>& rq3_runs() {
  static std::vector<SeedRuns> runs;
  static std::once_flag once;
  std::call_once(once, [] {
    runs.resize(5);
    util::parallel_for(5, util::default_workers(), [&](std::size_t i) {
      std::uint64_t seed = i + 1;
      auto [sft, rl] = align::toy_datasets(500, 200, seed);
      reward::MicroRewardOracle oracle({}, align::toy_language());
      auto cfg = align::TrainConfig::desk();
      cfg.seed = seed;
      cfg.reward_workers = 1;
      auto eval = [&](const align::PolicySnapshot& p) {
        return align::evaluate_policy(p, rl, oracle, cfg, 1000 + seed).first;
      };
      auto a = align::train(align::TrainMode::Sft, sft, {}, oracle, cfg);
      auto b = align::train(align::TrainMode::Rl, {}, rl, oracle, cfg);
      auto c = align::train(align::TrainMode::SftRl, sft, rl, oracle, cfg);
      runs[i].sft = eval(a.snapshot);
      runs[i].rl = eval(b.snapshot);
      runs[i].sftrl = eval(c.snapshot);
      runs[i].log_rl = b.log.rl;
      runs[i].log_sftrl = c.log.rl;
    });
  });
  return runs;
}

Outcome rq3_ordering() {
  Outcome o;
  auto& runs = rq3_runs();
  int ordered = 0;
  double mean = 0.0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    bool ok = r.sftrl >= r.sft && r.sftrl > r.rl;
    ordered += ok;
    mean += r.sftrl / runs.size();
    o.note(fmt::format("seed {}: sft {:.3f}  rl {:.3f}  sft+rl {:.3f}{}", i + 1, r.sft, r.rl, r.sftrl,
                       ok ? "" : "  (order violated)"));
  }
  o.check(ordered >= 4, fmt::format("ordering holds in {}/5 seeds", ordered));
  o.check(mean >= 2.0, fmt::format("sft+rl mean final reward {:.3f} < 2.0", mean));
  o.note(fmt::format("ordering {}/5, sft+rl mean {:.3f}", ordered, mean));
  return o;
}

std::pair<double, double> std_windows(const std::vector<align::TrainLogRow>& log) {
  std::size_t w = std::max<std::size_t>(1, log.size() / 10);
  double first = 0, last = 0;
  for (std::size_t i = 0; i < w; ++i) {
    first += log[i].reward_std / w;
    last += log[log.size() - w + i].reward_std / w;
  }
  return {first, last};
}

Outcome diagnostics_shape() {
  Outcome o;
  auto& runs = rq3_runs();
  double drop_sftrl = 0, drop_rl = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    auto [a0, a1] = std_windows(runs[i].log_sftrl);
    auto [b0, b1] = std_windows(runs[i].log_rl);
    drop_sftrl += (a0 - a1) / runs.size();
    drop_rl += (b0 - b1) / runs.size();
    o.note(fmt::format("seed {}: reward std sft+rl {:.3f} -> {:.3f}, rl {:.3f} -> {:.3f}", i + 1, a0, a1, b0, b1));
  }
  o.check(drop_sftrl > 0, fmt::format("sft+rl std did not fall (mean drop {:.3f})", drop_sftrl));
  o.check(drop_rl < drop_sftrl, fmt::format("rl-only drop {:.3f} not below sft+rl drop {:.3f}", drop_rl, drop_sftrl));
  o.note(fmt::format("mean std drop first->last 10%: sft+rl {:.3f}, rl-only {:.3f}", drop_sftrl, drop_rl));
  return o;
}

Outcome determinism() {
  Outcome o;
  util::TempDir dir;
  auto d = dir.path().string();
  testing::make_planted_repo(dir.path() / "shop");
  util::write_file(dir.path() / "repos.txt", (dir.path() / "shop").string() + "\n");
  for (const char* run : {"m1", "m2"}) {
    auto r = cli({"--work-dir", d, "--log-level", "warn", "mine", "--repos", d + "/repos.txt", "--out",
                  d + "/" + run, "--seed", "3"});
    o.check(r.code == 0, "mine exit " + std::to_string(r.code));
  }
  o.check(util::read_file(dir.path() / "m1" / "dataset.jsonl") == util::read_file(dir.path() / "m2" / "dataset.jsonl"),
          "mine outputs differ");

  cli({"toy-corpus", "--n-sft", "60", "--n-rl", "20", "--seed", "4", "--out", d + "/toy"});
  std::string stdout_first;
  for (const char* run : {"t1", "t2"}) {
    auto r = cli({"--log-level", "warn", "train", "--mode", "sft+rl", "--sft-data", d + "/toy/sft.jsonl",
                  "--rl-data", d + "/toy/rl.jsonl", "--oracle", "micro", "--rl-steps", "20", "--seed", "9",
                  "--out", d + "/" + run, "--json"});
    o.check(r.code == 0, "train exit " + std::to_string(r.code) + " " + r.err);
  }
  for (const char* f : {"policy.json", "train_log.csv", "sft_log.csv"}) {
    o.check(util::read_file(dir.path() / "t1" / f) == util::read_file(dir.path() / "t2" / f),
            std::string("train output differs: ") + f);
  }

  // Pairs with real compiler diagnostics when a compiler is available.
  std::string pairs;
  const auto& fx = testing::reward_fixtures();
  for (std::size_t i = 0; i < fx.size(); ++i) {
    auto esc = [](const std::string& s) {
      std::string out;
      for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') { out += "\\n"; continue; }
        out += c;
      }
      return out;
    };
    pairs += fmt::format("{{\"id\":\"s{:02}\",\"before\":\"{}\",\"generated\":\"{}\"}}\n", i, esc(fx[i].before),
                         esc(fx[i].generated));
  }
  util::write_file(dir.path() / "pairs.jsonl", pairs);
  std::vector<std::string> args = {"--log-level", "warn", "eval", "--pairs", d + "/pairs.jsonl", "--json"};
  if (!testing::compiler_available()) args.insert(args.begin(), {"--compiler", "true {file}"});
  else args.insert(args.begin(), {"--compiler", testing::compiler_template()});
  auto e1 = cli(args);
  auto e2 = cli(args);
  o.check(e1.code == 0 && e2.code == 0, "eval exit codes " + std::to_string(e1.code) + "/" + std::to_string(e2.code));
  o.check(!e1.out.empty() && e1.out == e2.out, "eval outputs differ");
  o.note("mine, train and eval reruns byte-identical");
  return o;
}

Outcome eval_arithmetic() {
  Outcome o;
  class Table : public reward::RewardOracle {
   public:
    reward::RewardBreakdown score(std::string_view, std::string_view g) const override {
      static const std::map<std::string, std::array<int, 3>> t = {
          {"a", {1, 1, 1}}, {"b", {1, 1, -1}}, {"c", {1, 0, 1}}, {"d", {-1, 0, -1}}};
      auto c = t.at(std::string(g));
      reward::RewardBreakdown b;
      b.r_syntax = c[0];
      b.r_compile = c[1];
      b.r_detect = c[2];
      reward::finalize(b, w_);
      return b;
    }
    const reward::RewardWeights& weights() const override { return w_; }

   private:
    reward::RewardWeights w_;
  } table;
  // 3 parse, 2 compile, 2 detected of 4: (75.0, 50.0, 50.0).
  auto r = eval::evaluate_batch({{"1", "", "a"}, {"2", "", "b"}, {"3", "", "c"}, {"4", "", "d"}}, table);
  o.check(r.pct_syntactic == 75.0 && r.pct_detected == 50.0 && r.pct_compiled == 50.0,
          fmt::format("4-sample report ({}, {}, {})", r.pct_syntactic, r.pct_detected, r.pct_compiled));
  o.check(r.tests_total == 0 && r.tests_passed == 0, "no bindings gives zero tests");

  util::TempDir dir;
  testing::make_planted_repo(dir.path() / "shop");
  mining::MiningConfig mc;
  mc.work_root = dir.path();
  auto recs = mining::mine_repository({(dir.path() / "shop").string(), "shop", std::nullopt}, mc);
  o.check(!recs.empty(), "miner produced no records");
  if (!recs.empty()) {
    reward::CompileSandbox sb;
    sb.command_template = testing::compiler_available() ? testing::compiler_template() : "true {file}";
    sb.class_context = "int total;\nint items;\n";
    reward::JavaRewardOracle oracle({}, sb, detect::qualitative_detect_config());
    std::vector<std::string> truth;
    for (const auto& rec : recs) truth.push_back(rec.output);
    auto g = eval::evaluate_batch(eval::pairs_from_records(recs, truth), oracle);
    o.check(g.pct_detected == 100.0, fmt::format("ground truth pct_detected {}", g.pct_detected));
    o.check(g.pct_syntactic == 100.0, fmt::format("ground truth pct_syntactic {}", g.pct_syntactic));
    o.check(g.pct_compiled <= g.pct_syntactic, "pct_compiled > pct_syntactic");
    o.note(fmt::format("4-sample (75.0, 50.0, 50.0); mined ground truth detected {} / syntactic {} / compiled {}",
                       g.pct_detected, g.pct_syntactic, g.pct_compiled));
  }
  return o;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"reward algebra", 1, reward_algebra},
      {"reward pipeline on 12 Java fixtures", 120, reward_pipeline},
      {"miner end-to-end", 60, miner_end_to_end},
      {"detector properties", 30, detector_properties},
      {"metrics", 30, metrics_checks},
      {"trainer numerics", 60, trainer_numerics},
      {"directional RQ3 ordering (toy, 5 seeds)", 900, rq3_ordering},
      {"training diagnostics shape", 900, diagnostics_shape},
      {"determinism of mine/train/eval", 120, determinism},
      {"eval-harness arithmetic", 60, eval_arithmetic},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.check(false, fmt::format("took {:.1f}s, budget {}s", secs, c.budget_s));
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << fmt::format("{:.1f}s", secs) << ")\n";
    for (const auto& n : o.notes) std::cout << "      " << n << "\n";
    std::cout << std::flush;
  }
  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures)) << "\n";
  return failures == 0 ? 0 : 1;
}
