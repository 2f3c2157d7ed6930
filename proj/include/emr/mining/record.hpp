#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "emr/syntax/tree.hpp"

namespace emr::mining {

struct RecordMeta {
  std::string repo;
  std::string commit_after;
  std::string commit_before;
  std::string file_path;
  std::string caller_name;
  std::string extracted_name;
  syntax::LineSpan caller_before_lines;
  syntax::LineSpan extracted_lines;
  friend bool operator==(const RecordMeta&, const RecordMeta&) = default;
};

struct RefactoringRecord {
  std::string input;
  std::string output;
  RecordMeta meta;
  friend bool operator==(const RefactoringRecord&, const RefactoringRecord&) = default;
};

struct DatasetSplit {
  std::vector<RefactoringRecord> train;
  std::vector<RefactoringRecord> test;
  std::vector<RefactoringRecord> valid;
  std::uint64_t seed = 0;
};

/// One JSON object per line with keys Input, Output, Meta. Returns the count.
std::size_t write_jsonl(const std::vector<RefactoringRecord>& records,
                        const std::filesystem::path& path);
/// Throws DataError naming the 1-based line of the first malformed record.
std::vector<RefactoringRecord> read_jsonl(const std::filesystem::path& path);

std::string to_json_line(const RefactoringRecord& record);

/// Keeps records whose input and output both have at most `max_tokens`
/// lexical tokens (comments excluded). Order is preserved.
std::vector<RefactoringRecord> filter_by_token_length(const std::vector<RefactoringRecord>& records,
                                                      std::size_t max_tokens = 512);

/// Drops later records whose (input, output) pair already occurred.
std::vector<RefactoringRecord> deduplicate(const std::vector<RefactoringRecord>& records);

struct SplitRatios {
  double train = 0.7;
  double test = 0.2;
  double valid = 0.1;
  /// Parses "0.7,0.2,0.1"; throws ConfigError.
  static SplitRatios parse(const std::string& csv);
};

/// Seeded shuffle, then contiguous partition with |train| = round(r1*N),
/// |test| = round(r2*N) and the rest in valid. Requires N >= 3.
DatasetSplit split_dataset(const std::vector<RefactoringRecord>& records, const SplitRatios& ratios,
                           std::uint64_t seed);

}  // namespace emr::mining
