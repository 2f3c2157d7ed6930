#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emr/mining/record.hpp"

namespace emr::testing {

/// Compiler command template for tests: $EMR_COMPILER, else the CLI default.
std::string compiler_template();
bool compiler_available();

/// Java runtime + Janino jars used by the unit-test bindings, or empty.
std::string janino_runner();

struct RewardFixture {
  std::string name;
  std::string category;  // broken-syntax, semantic-error, valid-no-extraction, valid-extraction
  std::string before;
  std::string generated;
  int r_syntax;
  int r_compile;
  int r_detect;
};

/// Twelve hand-labelled samples, three per category.
const std::vector<RewardFixture>& reward_fixtures();

/// Seeded compilation units: one class with fields and a few methods.
std::vector<std::string> java_corpus(std::size_t n, std::uint64_t seed);

/// Rewrites layout and comments without touching tokens.
std::string mutate_layout(const std::string& unit, std::uint64_t seed);

struct PlantedExtraction {
  std::string before;
  std::string after;
  std::string caller;
  std::string extracted;
};

/// Before/after units where one contiguous statement block was moved into a
/// new method verbatim.
std::vector<PlantedExtraction> planted_extractions(std::size_t n, std::uint64_t seed);

/// Lines of `source` with exactly `tokens` lexical tokens in a method.
std::string method_with_tokens(std::size_t tokens);

/// Runs git with pinned identity and dates; throws on failure.
std::string git(const std::filesystem::path& repo, const std::vector<std::string>& args,
                int day = 0);

/// Repository with three commits: initial, an Extract Method commit on
/// src/Shop.java and an unrelated edit. Returns the extract commit's
/// (parent, commit) hashes.
std::pair<std::string, std::string> make_planted_repo(const std::filesystem::path& dir);

/// Repository whose history only edits method bodies in place.
void make_refactoring_free_repo(const std::filesystem::path& dir);

/// Exact Shop.java sources of the planted repository.
std::string shop_before();
std::string shop_after();

std::vector<mining::RefactoringRecord> synthetic_records(std::size_t n);

}  // namespace emr::testing
