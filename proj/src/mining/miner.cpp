#include "emr/mining/miner.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "emr/util/error.hpp"
#include "emr/util/fs.hpp"
#include "emr/util/parallel.hpp"
#include "emr/util/process.hpp"

namespace emr::mining {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string default_name(const std::string& url) {
  std::string s = url;
  while (!s.empty() && (s.back() == '/' || s.back() == '\\')) s.pop_back();
  auto slash = s.find_last_of("/:\\");
  std::string name = slash == std::string::npos ? s : s.substr(slash + 1);
  if (name.ends_with(".git")) name.resize(name.size() - 4);
  return name.empty() ? "repo" : name;
}

}  // namespace

std::vector<RepoSpec> load_repo_list(const std::filesystem::path& path) {
  std::string text;
  try {
    text = util::read_file(path);
  } catch (const DataError&) {
    throw DataError("cannot read repository list " + path.string());
  }
  std::vector<RepoSpec> raw;
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw DataError("malformed repository list " + path.string() + ": " + e.what());
    }
    for (const auto& e : j) {
      RepoSpec r;
      if (e.is_string()) {
        r.url_or_path = trim(e.get<std::string>());
      } else if (e.is_object()) {
        r.url_or_path = trim(e.value("url", e.value("path", "")));
        r.name = e.value("name", "");
        if (e.contains("branch")) r.default_branch_override = e["branch"].get<std::string>();
      }
      if (!r.url_or_path.empty()) raw.push_back(std::move(r));
    }
  } else {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      raw.push_back({t, "", std::nullopt});
    }
  }

  std::vector<RepoSpec> out;
  std::set<std::string> seen_urls;
  std::set<std::string> seen_names;
  for (auto& r : raw) {
    if (!seen_urls.insert(r.url_or_path).second) continue;
    std::string base = r.name.empty() ? default_name(r.url_or_path) : r.name;
    std::string name = base;
    for (int k = 2; seen_names.contains(name); ++k) name = base + "-" + std::to_string(k);
    seen_names.insert(name);
    r.name = name;
    out.push_back(std::move(r));
  }
  if (out.empty()) throw DataError("repository list " + path.string() + " has zero valid entries");
  return out;
}

std::vector<RepoSpec> select_half(const std::vector<RepoSpec>& repos, Half half) {
  if (half == Half::All) return repos;
  const std::size_t cut = (repos.size() + 1) / 2;
  if (half == Half::Sft) return {repos.begin(), repos.begin() + static_cast<std::ptrdiff_t>(cut)};
  return {repos.begin() + static_cast<std::ptrdiff_t>(cut), repos.end()};
}

namespace {

std::string slice(std::string_view unit, const detect::MethodDecl& m) {
  return std::string(unit.substr(m.start_byte, m.end_byte - m.start_byte));
}

std::string output_of(std::string_view after_unit, const detect::MethodDecl& caller_after,
                      const detect::MethodDecl& extracted) {
  return slice(after_unit, caller_after) + "\n\n" + slice(after_unit, extracted);
}

}  // namespace

std::pair<std::string, std::string> extract_method_pair(std::string_view before_unit,
                                                        std::string_view after_unit,
                                                        const detect::ExtractMethodFinding& finding) {
  auto before = detect::index_methods(syntax::parse_source(before_unit));
  auto after = detect::index_methods(syntax::parse_source(after_unit));
  const detect::MethodDecl* extracted = nullptr;
  for (const auto& m : after) {
    if (m.name == finding.extracted_name) {
      extracted = &m;
      break;
    }
  }
  if (extracted == nullptr) {
    throw DataError("extracted method '" + finding.extracted_name + "' not found in after unit");
  }
  const detect::MethodDecl* caller_after = nullptr;
  for (const auto& m : after) {
    if (m.name == finding.caller_name && m.invokes(finding.extracted_name)) {
      caller_after = &m;
      break;
    }
  }
  if (caller_after == nullptr) {
    throw DataError("caller '" + finding.caller_name + "' not found in after unit");
  }
  const detect::MethodDecl* caller_before = nullptr;
  for (const auto& m : before) {
    if (m.name == finding.caller_name && m.arity() == caller_after->arity()) {
      caller_before = &m;
      break;
    }
  }
  if (caller_before == nullptr) {
    throw DataError("caller '" + finding.caller_name + "' not found in before unit");
  }
  return {slice(before_unit, *caller_before), output_of(after_unit, *caller_after, *extracted)};
}

std::vector<RefactoringRecord> records_for_file_pair(std::string_view before_unit,
                                                     std::string_view after_unit,
                                                     const detect::DetectConfig& config) {
  auto before = syntax::parse_source(before_unit);
  auto after = syntax::parse_source(after_unit);
  auto found = detect::detect_extractions(before, after, config);

  // Best caller per extracted method.
  std::map<std::string, const detect::DetectedExtraction*> best;
  for (const auto& d : found) {
    auto& slot = best[d.finding.extracted_name];
    if (slot == nullptr || d.finding.match_score > slot->finding.match_score ||
        (d.finding.match_score == slot->finding.match_score &&
         d.caller_before.start_byte < slot->caller_before.start_byte)) {
      slot = &d;
    }
  }
  std::vector<RefactoringRecord> out;
  for (const auto& d : found) {
    if (best[d.finding.extracted_name] != &d) continue;
    RefactoringRecord r;
    r.input = slice(before_unit, d.caller_before);
    r.output = output_of(after_unit, d.caller_after, d.extracted);
    r.meta.caller_name = d.finding.caller_name;
    r.meta.extracted_name = d.finding.extracted_name;
    r.meta.caller_before_lines = d.caller_before.source_span;
    r.meta.extracted_lines = d.extracted.source_span;
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

class Git {
 public:
  Git(const MiningConfig& config, std::filesystem::path dir)
      : config_(config), dir_(std::move(dir)) {}

  util::ProcessResult run(std::vector<std::string> args, bool in_repo = true) const {
    std::vector<std::string> argv{config_.git_binary, "-c", "core.quotepath=off"};
    argv.insert(argv.end(), args.begin(), args.end());
    util::ProcessOptions opts;
    if (in_repo) opts.cwd = dir_;
    opts.timeout = config_.git_timeout;
    opts.env = {{"GIT_TERMINAL_PROMPT", "0"}, {"LC_ALL", "C"}};
    auto res = util::run_process(argv, opts);
    if (res.spawn_failed) {
      throw ConfigError("cannot run version-control binary '" + config_.git_binary + "'");
    }
    return res;
  }

  std::string checked(std::vector<std::string> args, const std::string& what) const {
    auto res = run(std::move(args));
    if (!res.ok()) throw DataError(what + ": " + trim(res.err));
    return res.out;
  }

 private:
  const MiningConfig& config_;
  std::filesystem::path dir_;
};

struct Commit {
  long long time = 0;
  std::string hash;
  std::string parent;
};

struct Keyed {
  std::size_t commit_index;
  RefactoringRecord record;
};

}  // namespace

std::vector<RefactoringRecord> mine_repository(const RepoSpec& repo, const MiningConfig& config) {
  util::TempDir work("emr-mine", config.work_root);
  const auto clone_dir = work.path() / "repo";
  Git git(config, clone_dir);

  auto cloned = git.run({"clone", "--quiet", "--no-checkout", repo.url_or_path, clone_dir.string()},
                        /*in_repo=*/false);
  if (!cloned.ok()) {
    throw DataError("clone of '" + repo.url_or_path + "' failed: " +
                    (cloned.timed_out ? std::string("timeout") : trim(cloned.err)));
  }

  std::string branch = "HEAD";
  if (repo.default_branch_override) {
    branch = *repo.default_branch_override;
    if (!git.run({"rev-parse", "--verify", "--quiet", branch + "^{commit}"}).ok()) {
      branch = "origin/" + *repo.default_branch_override;
    }
  }
  auto tip = git.run({"rev-parse", "--verify", "--quiet", branch + "^{commit}"});
  if (!tip.ok()) {
    throw DataError("cannot resolve branch '" + branch + "' in " + repo.url_or_path);
  }

  std::vector<Commit> commits;
  {
    auto text = git.checked({"log", "--first-parent", "--reverse", "--format=%ct %H %P", branch},
                            "rev-list of " + repo.url_or_path);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      Commit c;
      ls >> c.time >> c.hash >> c.parent;  // parent stays empty for the root commit
      if (!c.hash.empty()) commits.push_back(std::move(c));
    }
  }

  std::vector<Keyed> found;
  for (std::size_t ci = 0; ci < commits.size(); ++ci) {
    const auto& c = commits[ci];
    if (c.parent.empty()) continue;
    auto diff = git.run({"diff", "--name-status", "--no-renames", "-z", c.parent, c.hash});
    if (!diff.ok()) {
      spdlog::warn("{}: skipping {}: diff failed: {}", repo.name, c.hash, trim(diff.err));
      continue;
    }
    // -z output: STATUS \0 PATH \0 ...
    std::vector<std::string> fields;
    std::string_view rest = diff.out;
    while (!rest.empty()) {
      auto z = rest.find('\0');
      fields.emplace_back(rest.substr(0, z));
      if (z == std::string_view::npos) break;
      rest.remove_prefix(z + 1);
    }
    std::vector<std::string> paths;
    for (std::size_t i = 0; i + 1 < fields.size(); i += 2) {
      if (fields[i] == "M" && fields[i + 1].ends_with(".java")) paths.push_back(fields[i + 1]);
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& path : paths) {
      auto before = git.run({"show", c.parent + ":" + path});
      auto after = git.run({"show", c.hash + ":" + path});
      if (!before.ok() || !after.ok()) {
        spdlog::warn("{}: skipping {} {}: cannot read file versions", repo.name, c.hash, path);
        continue;
      }
      for (auto& r : records_for_file_pair(before.out, after.out, config.detect)) {
        r.meta.repo = repo.name;
        r.meta.commit_after = c.hash;
        r.meta.commit_before = c.parent;
        r.meta.file_path = path;
        found.push_back({ci, std::move(r)});
      }
    }
  }

  // Commit time, then history position, file path, caller name.
  std::stable_sort(found.begin(), found.end(), [&](const Keyed& a, const Keyed& b) {
    return std::forward_as_tuple(commits[a.commit_index].time, a.commit_index,
                                 a.record.meta.file_path, a.record.meta.caller_name) <
           std::forward_as_tuple(commits[b.commit_index].time, b.commit_index,
                                 b.record.meta.file_path, b.record.meta.caller_name);
  });
  std::vector<RefactoringRecord> out;
  out.reserve(found.size());
  for (auto& k : found) out.push_back(std::move(k.record));
  spdlog::info("{}: {} commits, {} records", repo.name, commits.size(), out.size());
  return out;
}

std::vector<RefactoringRecord> mine_repositories(const std::vector<RepoSpec>& repos,
                                                 const MiningConfig& config) {
  std::vector<std::vector<RefactoringRecord>> per_repo(repos.size());
  const std::size_t workers = config.workers == 0 ? util::default_workers() : config.workers;
  util::parallel_for(repos.size(), workers, [&](std::size_t i) {
    try {
      per_repo[i] = mine_repository(repos[i], config);
    } catch (const DataError& e) {
      spdlog::error("skipping repository {}: {}", repos[i].name, e.what());
    }
  });
  std::vector<RefactoringRecord> out;
  for (auto& v : per_repo) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace emr::mining
