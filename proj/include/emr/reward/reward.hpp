#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "emr/detect/detector.hpp"

namespace emr::reward {

struct RewardWeights {
  double syntax = 1.0;
  double compile = 1.0;
  double detect = 1.0;

  /// Parses "w1,w2,w3". Throws ConfigError on malformed or negative values.
  static RewardWeights parse(const std::string& csv);
};

struct RewardBreakdown {
  int r_syntax = -1;   // {-1, +1}
  int r_compile = 0;   // {0, +1}
  int r_detect = -1;   // {-1, +1}
  double r_total = 0.0;
  std::vector<std::string> diagnostics;

  friend bool operator==(const RewardBreakdown&, const RewardBreakdown&) = default;
};

/// w1*r_syntax + w2*r_compile + w3*r_detect.
double total_reward(int r_syntax, int r_compile, int r_detect, const RewardWeights& w);

/// +1 when the class-hosted code parses with no error nodes and no missing
/// placeholders, -1 otherwise.
int syntax_reward(std::string_view code);

/// Diagnostic lines for the syntax errors of class-hosted code ("line N: ...").
std::vector<std::string> syntax_diagnostics(std::string_view code);

/// How compile_reward hosts and compiles a snippet. `command_template` is
/// split into argv (no shell) and run inside a private workspace; `{file}` is
/// replaced by the source file name, `{dir}` by "." and `{classpath}` by the
/// joined classpath.
struct CompileSandbox {
  std::string command_template = "javac -proc:none -nowarn -d {dir} {file}";
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
  std::vector<std::filesystem::path> classpath;
  std::filesystem::path workspace_root = std::filesystem::temp_directory_path();
  bool keep_artifacts = false;
  /// Optional class context: `import`/`package` lines go above the shell class,
  /// everything else (fields, helper types) inside it.
  std::string class_context;
};

struct CompileOutcome {
  int reward = 0;  // {0, +1}
  std::vector<std::string> diagnostics;
};

/// Name of the synthetic host class and its file.
inline constexpr std::string_view kHostClass = "__Gen";

/// Source file contents compile_reward writes for `code`.
std::string host_compilation_unit(std::string_view code, std::string_view class_context);

/// +1 iff the compiler command exits 0 within the timeout. A compiler that
/// cannot be started is a ConfigError, never a zero reward.
CompileOutcome compile_reward(std::string_view code, const CompileSandbox& sandbox);

/// Throws ConfigError when the template's program cannot be resolved.
void validate_compiler(const CompileSandbox& sandbox);

/// +1 iff an Extract Method refactoring is detected in `generated`.
int detect_reward(std::string_view before_method, std::string_view generated,
                  const detect::DetectConfig& config = {});

/// Scores one generated refactoring. Components are evaluated in the order
/// syntax, compile, detect; compilation is skipped (scored 0) when syntax
/// fails. Throws ConfigError if a sample compiles without parsing.
RewardBreakdown score(std::string_view before_method, std::string_view generated,
                      const RewardWeights& weights, const CompileSandbox& sandbox,
                      const detect::DetectConfig& detect_config = {});

/// Finalizes a breakdown: computes r_total and enforces the
/// compile-implies-parse consistency rule.
void finalize(RewardBreakdown& b, const RewardWeights& weights);

/// Scoring interface shared by training and evaluation.
class RewardOracle {
 public:
  virtual ~RewardOracle() = default;
  virtual RewardBreakdown score(std::string_view before, std::string_view generated) const = 0;
  virtual const RewardWeights& weights() const = 0;
};

class JavaRewardOracle final : public RewardOracle {
 public:
  JavaRewardOracle(RewardWeights weights, CompileSandbox sandbox,
                   detect::DetectConfig detect_config = {});
  RewardBreakdown score(std::string_view before, std::string_view generated) const override;
  const RewardWeights& weights() const override { return weights_; }
  const CompileSandbox& sandbox() const { return sandbox_; }

 private:
  RewardWeights weights_;
  CompileSandbox sandbox_;
  detect::DetectConfig detect_config_;
};

}  // namespace emr::reward
