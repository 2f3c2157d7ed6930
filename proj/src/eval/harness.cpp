#include "emr/eval/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "emr/util/error.hpp"
#include "emr/util/fs.hpp"
#include "emr/util/parallel.hpp"
#include "emr/util/process.hpp"

namespace emr::eval {

namespace fs = std::filesystem;

std::map<std::string, TestCaseBinding> load_bindings(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("bindings directory not found: " + dir.string());
  std::map<std::string, TestCaseBinding> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_directory()) continue;
    TestCaseBinding b;
    b.id = entry.path().filename().string();
    auto cmd = entry.path() / "cmd";
    if (!fs::is_regular_file(cmd)) throw DataError("binding '" + b.id + "' has no cmd file");
    std::istringstream in(util::read_file(cmd));
    std::getline(in, b.command_template);
    if (b.command_template.find_first_not_of(" \t\r") == std::string::npos) {
      throw DataError("binding '" + b.id + "' has an empty command");
    }
    if (fs::is_directory(entry.path() / "context")) b.context_dir = entry.path() / "context";
    if (fs::is_directory(entry.path() / "tests")) b.tests_dir = entry.path() / "tests";
    out.emplace(b.id, std::move(b));
  }
  return out;
}

namespace {

void copy_into(const fs::path& from, const fs::path& to, const std::string& id) {
  if (from.empty()) return;
  if (!fs::is_directory(from)) {
    throw DataError("binding '" + id + "': support directory missing: " + from.string());
  }
  fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

std::string replace_all(std::string s, std::string_view key, const std::string& value) {
  std::size_t pos = 0;
  while ((pos = s.find(key, pos)) != std::string::npos) {
    s.replace(pos, key.size(), value);
    pos += value.size();
  }
  return s;
}

}  // namespace

TestRun run_unit_tests(const TestCaseBinding& binding, const std::string& generated,
                       std::chrono::milliseconds timeout) {
  if (binding.command_template.empty()) {
    throw DataError("binding '" + binding.id + "' has an empty command");
  }
  util::TempDir ws("emr-eval");
  copy_into(binding.context_dir, ws.path(), binding.id);
  copy_into(binding.tests_dir, ws.path(), binding.id);
  std::string context;
  if (!binding.context_dir.empty() && fs::is_regular_file(binding.context_dir / "class_context")) {
    context = util::read_file(binding.context_dir / "class_context");
  }
  util::write_file(ws.path() / "generated.txt", generated);
  util::write_file(ws.path() / (std::string(reward::kHostClass) + ".java"),
                   reward::host_compilation_unit(generated, context));

  util::ProcessOptions opts;
  opts.cwd = ws.path();
  opts.timeout = timeout;
  auto command = replace_all(binding.command_template, "{workspace}", ws.path().string());
  auto res = util::run_process({"/bin/sh", "-c", command}, opts);

  TestRun run;
  run.total = 1;
  run.passed = res.ok() ? 1 : 0;
  run.log = res.out + res.err;
  if (res.timed_out) run.log += "timeout\n";
  if (res.spawn_failed) run.log += "cannot start /bin/sh\n";
  return run;
}

double percent(int count, int n) {
  if (n <= 0) return 0.0;
  return std::round(1000.0 * count / n) / 10.0;
}

QualitativeReport summarize(std::vector<SampleRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const SampleRow& a, const SampleRow& b) { return a.id < b.id; });
  QualitativeReport r;
  r.n = static_cast<int>(rows.size());
  int syn = 0, det = 0, comp = 0;
  for (const auto& row : rows) {
    syn += row.reward.r_syntax == 1;
    det += row.reward.r_detect == 1;
    comp += row.reward.r_compile == 1;
    r.tests_passed += row.tests_passed;
    r.tests_total += row.tests_total;
  }
  r.pct_syntactic = percent(syn, r.n);
  r.pct_detected = percent(det, r.n);
  r.pct_compiled = percent(comp, r.n);
  r.rows = std::move(rows);
  return r;
}

QualitativeReport evaluate_batch(const std::vector<EvalPair>& pairs,
                                 const reward::RewardOracle& oracle,
                                 const std::map<std::string, TestCaseBinding>* bindings,
                                 const EvalConfig& config) {
  if (pairs.empty()) throw DataError("evaluate_batch: no pairs");
  std::vector<SampleRow> rows(pairs.size());
  std::size_t workers = config.workers ? config.workers : util::default_workers();
  util::parallel_for(pairs.size(), workers, [&](std::size_t i) {
    const auto& p = pairs[i];
    SampleRow& row = rows[i];
    row.id = p.id;
    row.reward = oracle.score(p.before, p.generated);
    if (bindings) {
      auto it = bindings->find(p.id);
      if (it != bindings->end()) {
        auto run = run_unit_tests(it->second, p.generated, config.test_timeout);
        row.tests_passed = run.passed;
        row.tests_total = run.total;
      }
    }
  });
  return summarize(std::move(rows));
}

std::vector<EvalPair> pairs_from_records(const std::vector<mining::RefactoringRecord>& records,
                                         const std::vector<std::string>& generated) {
  if (records.size() != generated.size()) {
    throw DataError("pairs_from_records: records and outputs differ in length");
  }
  std::size_t width = std::to_string(records.size()).size();
  std::vector<EvalPair> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back({fmt::format("{:0{}}", i, width), records[i].input, generated[i]});
  }
  return out;
}

std::vector<EvalPair> read_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open pairs file: " + path.string());
  std::vector<EvalPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      EvalPair p;
      p.before = j.at("before").get<std::string>();
      p.generated = j.at("generated").get<std::string>();
      const auto& id = j.at("id");
      p.id = id.is_string() ? id.get<std::string>() : id.dump();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ": line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string QualitativeReport::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["pct_syntactic"] = pct_syntactic;
  j["pct_detected"] = pct_detected;
  j["pct_compiled"] = pct_compiled;
  j["tests_passed"] = tests_passed;
  j["tests_total"] = tests_total;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["id"] = r.id;
    row["r_syntax"] = r.reward.r_syntax;
    row["r_compile"] = r.reward.r_compile;
    row["r_detect"] = r.reward.r_detect;
    row["r_total"] = r.reward.r_total;
    row["tests_passed"] = r.tests_passed;
    row["tests_total"] = r.tests_total;
    j["rows"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string QualitativeReport::to_csv() const {
  std::string out = "id,r_syntax,r_compile,r_detect,r_total,tests_passed,tests_total\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.id, r.reward.r_syntax, r.reward.r_compile,
                       r.reward.r_detect, r.reward.r_total, r.tests_passed, r.tests_total);
  }
  out += fmt::format("# n={},pct_syntactic={},pct_detected={},pct_compiled={},tests={}/{}\n", n,
                     pct_syntactic, pct_detected, pct_compiled, tests_passed, tests_total);
  return out;
}

}  // namespace emr::eval
