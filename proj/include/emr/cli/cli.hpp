#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace emr::cli {

/// Settings shared by every subcommand. Resolution order, highest first:
/// command-line flags, environment (EMR_COMPILER, EMR_GIT), the JSON config
/// file, built-in defaults.
struct GlobalConfig {
  std::string compiler;  // command template; empty: pick a default at startup
  std::string git = "git";
  std::size_t workers = 0;  // 0: hardware concurrency
  std::string log_level = "info";
  std::filesystem::path work_dir = std::filesystem::temp_directory_path();
  double compile_timeout_s = 30.0;

  /// Throws ConfigError on unknown keys or mistyped values.
  static GlobalConfig from_json_text(const std::string& text);
};

struct ConfigOverrides {
  std::optional<std::string> compiler;
  std::optional<std::string> git;
  std::optional<std::size_t> workers;
  std::optional<std::string> log_level;
  std::optional<std::filesystem::path> work_dir;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

GlobalConfig resolve_config(const std::optional<std::filesystem::path>& config_file,
                            const EnvLookup& env, const ConfigOverrides& flags);

/// javac when it is on PATH, otherwise the bundled Janino wrapper.
std::string default_compiler_template();

/// Runs the command line. Returns 0 on success, 1 on data errors, 2 on
/// configuration or usage errors.
int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err);

}  // namespace emr::cli
