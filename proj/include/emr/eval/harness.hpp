#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "emr/mining/record.hpp"
#include "emr/reward/reward.hpp"

namespace emr::eval {

/// One sample to evaluate: the method before refactoring and a model output.
struct EvalPair {
  std::string id;
  std::string before;
  std::string generated;
};

/// Unit-test binding for one sample. The command template runs through
/// /bin/sh with `{workspace}` replaced by the materialized workspace, which
/// holds the context files, the test sources, `generated.txt` (the raw
/// output) and `__Gen.java` (the output hosted in the shell class, with
/// `context/class_context` if present).
struct TestCaseBinding {
  std::string id;
  std::string command_template;
  std::filesystem::path context_dir;  // may be empty
  std::filesystem::path tests_dir;    // may be empty
};

/// Reads `<dir>/<id>/{cmd,context/,tests/}`. Throws DataError when a binding
/// has no cmd file or an empty command.
std::map<std::string, TestCaseBinding> load_bindings(const std::filesystem::path& dir);

struct TestRun {
  int passed = 0;
  int total = 0;
  std::string log;
};

/// Runs one binding against `generated` in a fresh workspace. Exit status 0
/// within the timeout counts as (1, 1); anything else is (0, 1). Throws
/// DataError when a declared support directory is missing.
TestRun run_unit_tests(const TestCaseBinding& binding, const std::string& generated,
                       std::chrono::milliseconds timeout = std::chrono::seconds(60));

struct SampleRow {
  std::string id;
  reward::RewardBreakdown reward;
  int tests_passed = 0;
  int tests_total = 0;
};

struct QualitativeReport {
  int n = 0;
  double pct_syntactic = 0.0;
  double pct_detected = 0.0;
  double pct_compiled = 0.0;
  int tests_passed = 0;
  int tests_total = 0;
  std::vector<SampleRow> rows;  // sorted by id

  std::string to_json() const;
  std::string to_csv() const;
};

/// 100*count/n rounded to one decimal.
double percent(int count, int n);

/// Builds the report from already-scored rows (sorts them by id).
QualitativeReport summarize(std::vector<SampleRow> rows);

struct EvalConfig {
  std::size_t workers = 0;  // 0: hardware concurrency
  std::chrono::milliseconds test_timeout{std::chrono::seconds(60)};
};

/// Scores every pair with the oracle and runs bound unit tests. Oracle
/// configuration errors propagate; failing test commands count as failed
/// tests. Throws DataError on an empty batch.
QualitativeReport evaluate_batch(const std::vector<EvalPair>& pairs,
                                 const reward::RewardOracle& oracle,
                                 const std::map<std::string, TestCaseBinding>* bindings = nullptr,
                                 const EvalConfig& config = {});

/// Pairs from records: ids are the zero-padded record indices.
std::vector<EvalPair> pairs_from_records(const std::vector<mining::RefactoringRecord>& records,
                                         const std::vector<std::string>& generated);

/// Reads JSONL lines {"before","generated","id"}.
std::vector<EvalPair> read_pairs(const std::filesystem::path& path);

}  // namespace emr::eval
