#include "emr/mining/record.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emr/util/error.hpp"

namespace emr::mining {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json span_json(const syntax::LineSpan& s) { return ordered_json::array({s.start_line, s.end_line}); }

syntax::LineSpan span_from(const ordered_json& j) {
  if (!j.is_array() || j.size() != 2) throw DataError("line range must be [start, end]");
  syntax::LineSpan s{j[0].get<int>(), j[1].get<int>()};
  if (s.start_line < 1 || s.end_line < s.start_line) throw DataError("invalid line range");
  return s;
}

}  // namespace

std::string to_json_line(const RefactoringRecord& r) {
  ordered_json meta;
  meta["repo"] = r.meta.repo;
  meta["commit_after"] = r.meta.commit_after;
  meta["commit_before"] = r.meta.commit_before;
  meta["file_path"] = r.meta.file_path;
  meta["caller_name"] = r.meta.caller_name;
  meta["extracted_name"] = r.meta.extracted_name;
  meta["caller_before_lines"] = span_json(r.meta.caller_before_lines);
  meta["extracted_lines"] = span_json(r.meta.extracted_lines);
  ordered_json j;
  j["Input"] = r.input;
  j["Output"] = r.output;
  j["Meta"] = std::move(meta);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::size_t write_jsonl(const std::vector<RefactoringRecord>& records,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) out << to_json_line(r) << '\n';
  out.flush();
  if (!out) throw DataError("write failed: " + path.string());
  return records.size();
}

std::vector<RefactoringRecord> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<RefactoringRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = ordered_json::parse(line);
      RefactoringRecord r;
      r.input = j.at("Input").get<std::string>();
      r.output = j.at("Output").get<std::string>();
      if (j.contains("Meta")) {
        const auto& m = j.at("Meta");
        r.meta.repo = m.value("repo", "");
        r.meta.commit_after = m.value("commit_after", "");
        r.meta.commit_before = m.value("commit_before", "");
        r.meta.file_path = m.value("file_path", "");
        r.meta.caller_name = m.value("caller_name", "");
        r.meta.extracted_name = m.value("extracted_name", "");
        if (m.contains("caller_before_lines")) r.meta.caller_before_lines = span_from(m["caller_before_lines"]);
        if (m.contains("extracted_lines")) r.meta.extracted_lines = span_from(m["extracted_lines"]);
      }
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ": malformed record on line " + std::to_string(lineno) +
                      ": " + e.what());
    }
  }
  return out;
}

std::vector<RefactoringRecord> filter_by_token_length(const std::vector<RefactoringRecord>& records,
                                                      std::size_t max_tokens) {
  if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  std::vector<RefactoringRecord> out;
  for (const auto& r : records) {
    if (syntax::count_tokens(r.input) <= max_tokens && syntax::count_tokens(r.output) <= max_tokens) {
      out.push_back(r);
    }
  }
  return out;
}

std::vector<RefactoringRecord> deduplicate(const std::vector<RefactoringRecord>& records) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<RefactoringRecord> out;
  for (const auto& r : records) {
    if (seen.emplace(r.input, r.output).second) out.push_back(r);
  }
  return out;
}

SplitRatios SplitRatios::parse(const std::string& csv) {
  std::vector<double> v;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("invalid split ratio '" + item + "'");
    }
  }
  if (v.size() != 3) throw ConfigError("split needs three ratios, got '" + csv + "'");
  if (std::abs(v[0] + v[1] + v[2] - 1.0) > 1e-9 || v[0] < 0 || v[1] < 0 || v[2] < 0) {
    throw ConfigError("split ratios must be non-negative and sum to 1: '" + csv + "'");
  }
  return {v[0], v[1], v[2]};
}

DatasetSplit split_dataset(const std::vector<RefactoringRecord>& records, const SplitRatios& ratios,
                           std::uint64_t seed) {
  const double sum = ratios.train + ratios.test + ratios.valid;
  if (std::abs(sum - 1.0) > 1e-9 || ratios.train < 0 || ratios.test < 0 || ratios.valid < 0) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  const std::size_t n = records.size();
  if (n < 3) throw DataError("cannot split fewer than 3 records (got " + std::to_string(n) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  auto n_train = std::min<std::size_t>(n, std::lround(ratios.train * static_cast<double>(n)));
  auto n_test = std::min<std::size_t>(n - n_train, std::lround(ratios.test * static_cast<double>(n)));

  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[order[i]];
    if (i < n_train) {
      split.train.push_back(r);
    } else if (i < n_train + n_test) {
      split.test.push_back(r);
    } else {
      split.valid.push_back(r);
    }
  }
  return split;
}

}  // namespace emr::mining
