#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "emr/mining/record.hpp"
#include "emr/reward/micro.hpp"

namespace emr::align {

/// Shape of the synthetic micro-corpus. A sample picks `n` distinct variable
/// slots in ascending order; a contiguous run of them is marked (q-variables)
/// and becomes the body of `h`, the others stay in `m` as p-variables.
struct ToyConfig {
  int slots = 12;
  int min_statements = 3;
  int max_statements = 6;
};

/// `size` records, distinct while the configuration space allows it.
std::vector<mining::RefactoringRecord> generate_toy_corpus(std::size_t size, std::uint64_t seed,
                                                           const ToyConfig& config = {});

/// Disjoint SFT and RL sets drawn from one corpus.
std::pair<std::vector<mining::RefactoringRecord>, std::vector<mining::RefactoringRecord>>
toy_datasets(std::size_t n_sft, std::size_t n_rl, std::uint64_t seed, const ToyConfig& config = {});

reward::MicroLanguage toy_language(const ToyConfig& config = {});

}  // namespace emr::align
