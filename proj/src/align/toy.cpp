#include "emr/align/toy.hpp"

#include <algorithm>
#include <random>
#include <tuple>
#include <set>

#include "emr/util/error.hpp"

namespace emr::align {

reward::MicroLanguage toy_language(const ToyConfig& config) {
  return reward::MicroLanguage::with_slots(config.slots);
}

namespace {

struct Sample {
  std::vector<int> vars;  // ascending slot ids
  int block_start = 0;
  int block_len = 1;
  auto key() const { return std::make_tuple(vars, block_start, block_len); }
};

std::string stmt(char prefix, int slot) { return std::string(1, prefix) + std::to_string(slot) + " ++ ;"; }

mining::RefactoringRecord render(const Sample& s, std::size_t index, std::uint64_t seed) {
  std::string input = "void m ( ) {";
  std::string caller = "void m ( ) {";
  std::string extracted = "void h ( ) {";
  for (int i = 0; i < static_cast<int>(s.vars.size()); ++i) {
    const bool marked = i >= s.block_start && i < s.block_start + s.block_len;
    input += " " + stmt(marked ? 'q' : 'p', s.vars[i]);
    if (marked) {
      extracted += " " + stmt('q', s.vars[i]);
      if (i == s.block_start) caller += " h ( ) ;";
    } else {
      caller += " " + stmt('p', s.vars[i]);
    }
  }
  input += " }";
  caller += " }";
  extracted += " }";

  mining::RefactoringRecord r;
  r.input = input;
  r.output = caller + "\n\n" + extracted;
  const std::string tag = "toy-" + std::to_string(seed) + "-" + std::to_string(index);
  r.meta.repo = "toy";
  r.meta.commit_before = tag + "-before";
  r.meta.commit_after = tag + "-after";
  r.meta.file_path = "Toy.java";
  r.meta.caller_name = "m";
  r.meta.extracted_name = "h";
  r.meta.caller_before_lines = {1, 1};
  r.meta.extracted_lines = {3, 3};
  return r;
}

}  // namespace

std::vector<mining::RefactoringRecord> generate_toy_corpus(std::size_t size, std::uint64_t seed,
                                                           const ToyConfig& config) {
  if (size < 1) throw ConfigError("toy corpus size must be >= 1");
  if (config.min_statements < 2 || config.max_statements < config.min_statements ||
      config.slots < config.max_statements) {
    throw ConfigError("invalid toy corpus configuration");
  }
  std::mt19937_64 rng(seed);
  auto below = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };

  std::set<decltype(Sample{}.key())> seen;
  std::vector<mining::RefactoringRecord> out;
  std::size_t attempts = 0;
  while (out.size() < size) {
    Sample s;
    const int n = config.min_statements + below(config.max_statements - config.min_statements + 1);
    std::vector<int> pool(config.slots);
    for (int i = 0; i < config.slots; ++i) pool[i] = i;
    for (int i = 0; i < n; ++i) std::swap(pool[i], pool[i + below(config.slots - i)]);
    s.vars.assign(pool.begin(), pool.begin() + n);
    std::sort(s.vars.begin(), s.vars.end());
    s.block_len = 1 + below(n - 1);               // the caller keeps at least one statement
    s.block_start = below(n - s.block_len + 1);
    // Duplicates are only admitted once fresh samples get hard to find.
    if (!seen.insert(s.key()).second && ++attempts < 100 * size) continue;
    out.push_back(render(s, out.size(), seed));
  }
  return out;
}

std::pair<std::vector<mining::RefactoringRecord>, std::vector<mining::RefactoringRecord>>
toy_datasets(std::size_t n_sft, std::size_t n_rl, std::uint64_t seed, const ToyConfig& config) {
  auto all = generate_toy_corpus(n_sft + n_rl, seed, config);
  std::vector<mining::RefactoringRecord> sft(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_sft));
  std::vector<mining::RefactoringRecord> rl(all.begin() + static_cast<std::ptrdiff_t>(n_sft), all.end());
  return {std::move(sft), std::move(rl)};
}

}  // namespace emr::align
