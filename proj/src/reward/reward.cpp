#include "emr/reward/reward.hpp"

#include <sstream>

#include "emr/util/error.hpp"
#include "emr/util/fs.hpp"
#include "emr/util/parallel.hpp"
#include "emr/util/process.hpp"

namespace emr::reward {

RewardWeights RewardWeights::parse(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("invalid reward weight '" + item + "'");
    }
  }
  if (values.size() != 3) throw ConfigError("reward weights need three values, got '" + csv + "'");
  for (double v : values) {
    if (!(v >= 0.0)) throw ConfigError("reward weights must be non-negative: '" + csv + "'");
  }
  return {values[0], values[1], values[2]};
}

double total_reward(int r_syntax, int r_compile, int r_detect, const RewardWeights& w) {
  return w.syntax * r_syntax + w.compile * r_compile + w.detect * r_detect;
}

int syntax_reward(std::string_view code) {
  auto tree = syntax::parse_class_members(code);
  return tree.error_count() == 0 && tree.missing_count() == 0 ? +1 : -1;
}

std::vector<std::string> syntax_diagnostics(std::string_view code) {
  auto tree = syntax::parse_class_members(code);
  std::vector<std::string> out;
  // The shell adds one line above the snippet.
  tree.walk(tree.root(), [&](syntax::NodeId id) {
    const auto& n = tree.node(id);
    if (!n.is_error) return true;
    int line = std::max(1, tree.line_of(n.start) - 1);
    if (n.is_missing) {
      out.push_back("line " + std::to_string(line) + ": missing '" + std::string(n.kind) + "'");
    } else {
      auto text = tree.text(id).substr(0, 40);
      out.push_back("line " + std::to_string(line) + ": unexpected '" + std::string(text) + "'");
    }
    return false;
  });
  return out;
}

std::string host_compilation_unit(std::string_view code, std::string_view class_context) {
  std::string header;
  std::string members;
  std::istringstream in{std::string(class_context)};
  std::string line;
  while (std::getline(in, line)) {
    auto first = line.find_first_not_of(" \t");
    std::string_view trimmed =
        first == std::string::npos ? std::string_view{} : std::string_view(line).substr(first);
    if (trimmed.starts_with("import ") || trimmed.starts_with("package ")) {
      header += line + "\n";
    } else {
      members += line + "\n";
    }
  }
  std::string out = header;
  out += "class ";
  out += kHostClass;
  out += " {\n";
  out += members;
  out += code;
  out += "\n}\n";
  return out;
}

namespace {

util::Semaphore& compiler_slots() {
  static util::Semaphore slots(util::default_workers());
  return slots;
}

std::vector<std::string> expand_template(const CompileSandbox& sandbox,
                                         const std::filesystem::path& dir,
                                         const std::filesystem::path& file) {
  std::string cp;
  for (const auto& p : sandbox.classpath) {
    if (!cp.empty()) cp += ':';
    cp += p.string();
  }
  if (cp.empty()) cp = ".";
  auto argv = util::split_command(sandbox.command_template);
  for (auto& arg : argv) {
    auto replace_all = [&](std::string_view key, const std::string& value) {
      std::size_t pos = 0;
      while ((pos = arg.find(key, pos)) != std::string::npos) {
        arg.replace(pos, key.size(), value);
        pos += value.size();
      }
    };
    replace_all("{file}", file.string());
    replace_all("{dir}", dir.string());
    replace_all("{classpath}", cp);
  }
  return argv;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

}  // namespace

void validate_compiler(const CompileSandbox& sandbox) {
  auto argv = util::split_command(sandbox.command_template);
  if (argv.empty()) throw ConfigError("compiler command template is empty");
  if (sandbox.command_template.find("{file}") == std::string::npos) {
    throw ConfigError("compiler command template lacks {file}: '" + sandbox.command_template + "'");
  }
  if (!util::find_executable(argv.front())) {
    throw ConfigError("compiler '" + argv.front() + "' not found (command template '" +
                      sandbox.command_template + "')");
  }
}

CompileOutcome compile_reward(std::string_view code, const CompileSandbox& sandbox) {
  validate_compiler(sandbox);
  util::TempDir workspace("emr-compile", sandbox.workspace_root);
  if (sandbox.keep_artifacts) workspace.keep();
  auto file = workspace.path() / (std::string(kHostClass) + ".java");
  util::write_file(file, host_compilation_unit(code, sandbox.class_context));

  util::ProcessOptions opts;
  opts.cwd = workspace.path();
  opts.timeout = sandbox.timeout;
  util::ProcessResult res;
  {
    util::SemaphoreGuard slot(compiler_slots());
    // Relative paths keep diagnostics free of the random workspace name.
    res = util::run_process(expand_template(sandbox, ".", file.filename()), opts);
  }
  if (res.spawn_failed) {
    throw ConfigError("cannot run compiler (command template '" + sandbox.command_template +
                      "'): " + res.err);
  }
  CompileOutcome outcome;
  if (res.timed_out) {
    outcome.diagnostics.push_back("timeout");
    return outcome;
  }
  outcome.reward = res.exit_code == 0 ? 1 : 0;
  if (outcome.reward == 0) {
    outcome.diagnostics = split_lines(res.err);
    auto more = split_lines(res.out);
    outcome.diagnostics.insert(outcome.diagnostics.end(), more.begin(), more.end());
    if (outcome.diagnostics.empty()) {
      outcome.diagnostics.push_back("compiler exited with status " + std::to_string(res.exit_code));
    }
  }
  return outcome;
}

int detect_reward(std::string_view before_method, std::string_view generated,
                  const detect::DetectConfig& config) {
  return detect::detect_in_generated(before_method, generated, config).empty() ? -1 : +1;
}

void finalize(RewardBreakdown& b, const RewardWeights& weights) {
  if (b.r_compile == 1 && b.r_syntax != 1) {
    throw ConfigError(
        "inconsistent reward: code compiled but failed to parse; the compiler command does not "
        "match the parser's language");
  }
  b.r_total = total_reward(b.r_syntax, b.r_compile, b.r_detect, weights);
}

RewardBreakdown score(std::string_view before_method, std::string_view generated,
                      const RewardWeights& weights, const CompileSandbox& sandbox,
                      const detect::DetectConfig& detect_config) {
  RewardBreakdown b;
  b.r_syntax = syntax_reward(generated);
  if (b.r_syntax == 1) {
    auto compiled = compile_reward(generated, sandbox);
    b.r_compile = compiled.reward;
    b.diagnostics = std::move(compiled.diagnostics);
  } else {
    b.diagnostics = syntax_diagnostics(generated);
    b.r_compile = 0;
    b.diagnostics.push_back("skipped: parse failure");
  }
  b.r_detect = detect_reward(before_method, generated, detect_config);
  finalize(b, weights);
  return b;
}

JavaRewardOracle::JavaRewardOracle(RewardWeights weights, CompileSandbox sandbox,
                                   detect::DetectConfig detect_config)
    : weights_(weights), sandbox_(std::move(sandbox)), detect_config_(detect_config) {}

RewardBreakdown JavaRewardOracle::score(std::string_view before,
                                        std::string_view generated) const {
  return reward::score(before, generated, weights_, sandbox_, detect_config_);
}

}  // namespace emr::reward
