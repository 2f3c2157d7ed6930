#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace emr::util {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed or not started
  bool timed_out = false;
  bool spawn_failed = false;  // exec failed (binary not found / not executable)
  std::string out;
  std::string err;

  bool ok() const { return !timed_out && !spawn_failed && exit_code == 0; }
};

struct ProcessOptions {
  std::optional<std::filesystem::path> cwd;
  std::chrono::milliseconds timeout{std::chrono::seconds(30)};
  std::vector<std::pair<std::string, std::string>> env;  // added to the inherited environment
  std::string stdin_data;
};

/// Runs argv[0] (PATH lookup) with the given arguments and captures both
/// streams. The child gets its own process group; on timeout the whole group
/// is killed.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

/// Resolves a program name against PATH the way execvp would. Names that
/// contain a slash are checked directly.
std::optional<std::filesystem::path> find_executable(const std::string& name);

/// Splits a command template into argv on unquoted whitespace. Single and
/// double quotes group words; no other shell syntax is interpreted.
std::vector<std::string> split_command(const std::string& command);

}  // namespace emr::util
