#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emr/detect/detector.hpp"
#include "emr/mining/record.hpp"

namespace emr::mining {

struct RepoSpec {
  std::string url_or_path;
  std::string name;
  std::optional<std::string> default_branch_override;
  friend bool operator==(const RepoSpec&, const RepoSpec&) = default;
};

/// Reads a repository list: either a JSON array (strings or objects with
/// "url"/"name"/"branch") or one entry per line. Blank lines and lines starting
/// with '#' are ignored; duplicates by url_or_path are dropped. Names default to
/// the last path component, made unique with a numeric suffix.
std::vector<RepoSpec> load_repo_list(const std::filesystem::path& path);

enum class Half { All, Sft, Rl };

/// First ceil(n/2) repositories for SFT, the rest for RL; file order.
std::vector<RepoSpec> select_half(const std::vector<RepoSpec>& repos, Half half);

struct MiningConfig {
  std::string git_binary = "git";
  std::chrono::milliseconds git_timeout{std::chrono::minutes(10)};
  detect::DetectConfig detect;
  std::size_t workers = 0;  // 0 = logical CPU count
  std::filesystem::path work_root = std::filesystem::temp_directory_path();
};

/// Input/output strings for one detected extraction: the exact before-caller
/// slice, and the after-caller slice, two newlines, the extracted method slice.
std::pair<std::string, std::string> extract_method_pair(std::string_view before_unit,
                                                        std::string_view after_unit,
                                                        const detect::ExtractMethodFinding& finding);

/// Records for one file pair. Of the findings sharing an extracted method, the
/// one with the highest match_score is kept (earliest caller on ties).
std::vector<RefactoringRecord> records_for_file_pair(std::string_view before_unit,
                                                     std::string_view after_unit,
                                                     const detect::DetectConfig& config);

/// Walks the first-parent history of the selected branch oldest to newest.
/// Throws DataError when the repository cannot be cloned or the branch cannot
/// be resolved; pairs whose files cannot be read are skipped with a warning.
std::vector<RefactoringRecord> mine_repository(const RepoSpec& repo, const MiningConfig& config);

/// Mines all repositories on a bounded worker pool. Failed repositories are
/// logged and skipped. Results are concatenated in repository order.
std::vector<RefactoringRecord> mine_repositories(const std::vector<RepoSpec>& repos,
                                                 const MiningConfig& config);

}  // namespace emr::mining
