#include "fixtures.hpp"

#include <cstdlib>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "emr/cli/cli.hpp"
#include "emr/syntax/token.hpp"
#include "emr/util/fs.hpp"
#include "emr/util/process.hpp"

namespace emr::testing {

namespace fs = std::filesystem;

std::string compiler_template() {
  if (const char* env = std::getenv("EMR_COMPILER"); env && *env) return env;
  return cli::default_compiler_template();
}

bool compiler_available() {
  auto argv = util::split_command(compiler_template());
  return !argv.empty() && util::find_executable(argv.front()).has_value();
}

std::string janino_runner() {
  fs::path wrapper = fs::path(EMR_SOURCE_DIR) / "tools" / "janinoc";
  const char* home = std::getenv("JANINO_HOME");
  fs::path jars = home ? fs::path(home) : fs::path("/opt/javatool");
  if (fs::exists(wrapper) && fs::exists(jars / "janino-3.1.9.jar")) return wrapper.string();
  return {};
}

// ---- reward fixtures ----

namespace {

const char* kSumBefore = R"(int sum(int[] xs) {
  int s = 0;
  for (int i = 0; i < xs.length; i++) {
    s += xs[i];
  }
  return s;
})";

const char* kReportBefore = R"(String report(String name, int qty) {
  StringBuilder sb = new StringBuilder();
  sb.append("item: ");
  sb.append(name);
  sb.append(", qty: ");
  sb.append(qty);
  return sb.toString();
})";

const char* kScaleBefore = R"(double scale(double x, double f) {
  double y = x * f;
  if (y > 100.0) {
    y = 100.0;
  }
  if (y < 0.0) {
    y = 0.0;
  }
  return y;
})";

}  // namespace

const std::vector<RewardFixture>& reward_fixtures() {
  static const std::vector<RewardFixture> all = {
      {"missing-semicolon", "broken-syntax", kSumBefore, R"(int sum(int[] xs) {
  int s = add(xs)
  return s;
}

int add(int[] xs) {
  int s = 0;
  for (int i = 0; i < xs.length; i++) {
    s += xs[i];
  }
  return s;
})",
       -1, 0, -1},
      {"unclosed-method", "broken-syntax", kReportBefore, R"(String report(String name, int qty) {
  StringBuilder sb = new StringBuilder();
  appendItem(sb, name, qty);
  return sb.toString();
}

void appendItem(StringBuilder sb, String name, int qty) {
  sb.append("item: ");
  sb.append(name);
  sb.append(", qty: ");
  sb.append(qty);
)",
       -1, 0, -1},
      {"dangling-operator", "broken-syntax", kScaleBefore, R"(double scale(double x, double f) {
  double y = x * ;
  return clamp(y);
}

double clamp(double y) {
  if (y > 100.0) {
    y = 100.0;
  }
  return y;
})",
       -1, 0, -1},
      {"wrong-return-type", "semantic-error", kSumBefore, R"(int sum(int[] xs) {
  int s = add(xs);
  return s;
}

String add(int[] xs) {
  int s = 0;
  for (int i = 0; i < xs.length; i++) {
    s += xs[i];
  }
  return s;
})",
       1, 0, 1},
      {"undefined-variable", "semantic-error", kReportBefore, R"(String report(String name, int qty) {
  StringBuilder sb = new StringBuilder();
  appendItem(sb, name, qty);
  return sb.toString();
}

void appendItem(StringBuilder sb, String name, int qty) {
  sb.append("item: ");
  sb.append(nam);
  sb.append(", qty: ");
  sb.append(qty);
})",
       1, 0, 1},
      {"undefined-method", "semantic-error", kScaleBefore, R"(double scale(double x, double f) {
  return clampTo(x * f, 0.0, 100.0);
})",
       1, 0, -1},
      {"unchanged", "valid-no-extraction", kSumBefore, kSumBefore, 1, 1, -1},
      {"renamed-local", "valid-no-extraction", kReportBefore, R"(String report(String name, int qty) {
  StringBuilder out = new StringBuilder();
  out.append("item: ");
  out.append(name);
  out.append(", qty: ");
  out.append(qty);
  return out.toString();
})",
       1, 1, -1},
      {"uncalled-helper", "valid-no-extraction", kScaleBefore, std::string(kScaleBefore) + R"(

double unused() {
  return 42.0;
})",
       1, 1, -1},
      {"extract-loop", "valid-extraction", kSumBefore, R"(int sum(int[] xs) {
  int s = add(xs);
  return s;
}

int add(int[] xs) {
  int s = 0;
  for (int i = 0; i < xs.length; i++) {
    s += xs[i];
  }
  return s;
})",
       1, 1, 1},
      {"extract-appends", "valid-extraction", kReportBefore, R"(String report(String name, int qty) {
  StringBuilder sb = new StringBuilder();
  appendItem(sb, name, qty);
  return sb.toString();
}

void appendItem(StringBuilder sb, String name, int qty) {
  sb.append("item: ");
  sb.append(name);
  sb.append(", qty: ");
  sb.append(qty);
})",
       1, 1, 1},
      {"extract-clamp", "valid-extraction", kScaleBefore, R"(double scale(double x, double f) {
  double y = x * f;
  return clamp(y);
}

double clamp(double y) {
  if (y > 100.0) {
    y = 100.0;
  }
  if (y < 0.0) {
    y = 0.0;
  }
  return y;
})",
       1, 1, 1},
  };
  return all;
}

// ---- generated Java ----

namespace {

std::string field_statement(std::mt19937_64& rng) {
  int k = static_cast<int>(rng() % 9) + 1;
  switch (rng() % 6) {
    case 0: return fmt::format("count += {};", k);
    case 1: return fmt::format("total = total * {} + count;", k);
    case 2: return fmt::format("label = label + \"s{}\";", k);
    case 3: return fmt::format("if (count > {}) {{ total -= {}; }}", k, k);
    case 4: return fmt::format("for (int i = 0; i < {}; i++) {{ count++; }}", k);
    default: return fmt::format("log(\"msg{}\");", k);
  }
}

const char* kClassHead = R"(class Unit{} {{
  int count;
  int total;
  String label = "";

  void log(String m) {{
    label = m;
  }}
)";

std::string method_text(const std::string& header, const std::vector<std::string>& body) {
  std::string out = "\n  " + header + " {\n";
  for (const auto& s : body) out += "    " + s + "\n";
  out += "  }\n";
  return out;
}

}  // namespace

std::vector<std::string> java_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (std::size_t u = 0; u < n; ++u) {
    std::string unit = fmt::format(fmt::runtime(kClassHead), u);
    int methods = 2 + static_cast<int>(rng() % 3);
    for (int m = 0; m < methods; ++m) {
      std::vector<std::string> body;
      int len = 2 + static_cast<int>(rng() % 5);
      for (int s = 0; s < len; ++s) body.push_back(field_statement(rng));
      if (m % 2 == 1) {
        body.insert(body.begin(), "int local = a * 2;");
        body.push_back("return local + total;");
        unit += method_text(fmt::format("int calc{}(int a)", m), body);
      } else {
        if (m > 0) body.push_back(fmt::format("calc{}({});", m - 1, m));
        unit += method_text(fmt::format("void step{}()", m), body);
      }
    }
    unit += "}\n";
    out.push_back(std::move(unit));
  }
  return out;
}

std::string mutate_layout(const std::string& unit, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  static const std::vector<std::string> gaps = {" ", "  ", "\n", "\n    ", "\t", " \n\n  "};
  std::string out;
  for (const auto& tok : syntax::lex_significant(unit)) {
    if (!out.empty()) {
      auto r = rng() % 10;
      if (r == 0) {
        out += " /* note */ ";
      } else if (r == 1) {
        out += " // trailing remark\n";
      } else {
        out += gaps[rng() % gaps.size()];
      }
    }
    out += tok.text;
  }
  return out + "\n";
}

std::vector<PlantedExtraction> planted_extractions(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PlantedExtraction> out;
  for (std::size_t u = 0; u < n; ++u) {
    std::vector<std::string> body;
    int len = 4 + static_cast<int>(rng() % 4);
    for (int s = 0; s < len; ++s) body.push_back(field_statement(rng));
    int block = 2 + static_cast<int>(rng() % (len - 2));
    int start = static_cast<int>(rng() % (len - block + 1));
    std::string caller = fmt::format("run{}", u);
    std::string extracted = fmt::format("part{}", u);

    std::vector<std::string> caller_after(body.begin(), body.begin() + start);
    caller_after.push_back(extracted + "();");
    caller_after.insert(caller_after.end(), body.begin() + start + block, body.end());
    std::vector<std::string> moved(body.begin() + start, body.begin() + start + block);

    std::string head = fmt::format(fmt::runtime(kClassHead), u);
    std::string tail = method_text("int size()", {"return count;"}) + "}\n";
    PlantedExtraction p;
    p.before = head + method_text("void " + caller + "()", body) + tail;
    p.after = head + method_text("void " + caller + "()", caller_after) +
              method_text("private void " + extracted + "()", moved) + tail;
    p.caller = caller;
    p.extracted = extracted;
    out.push_back(std::move(p));
  }
  return out;
}

std::string method_with_tokens(std::size_t tokens) {
  if (tokens < 6) throw std::invalid_argument("method_with_tokens: at least 6");
  // void m ( ) { ... } is 6 tokens, a++; is 3 and a lone ; is 1.
  std::size_t rest = tokens - 6;
  std::string out = "void m() {";
  for (std::size_t i = 0; i < rest / 3; ++i) out += "\n  a++;";
  for (std::size_t i = 0; i < rest % 3; ++i) out += "\n  ;";
  return out + "\n}";
}

// ---- git fixtures ----

std::string git(const fs::path& repo, const std::vector<std::string>& args, int day) {
  std::vector<std::string> argv = {"git", "-c", "user.name=Fixture", "-c",
                                   "user.email=fixture@example.com", "-c", "commit.gpgsign=false",
                                   "-c", "init.defaultBranch=main"};
  argv.insert(argv.end(), args.begin(), args.end());
  util::ProcessOptions opts;
  opts.cwd = repo;
  auto date = fmt::format("2021-03-{:02} 12:00:00 +0000", day + 1);
  opts.env = {{"GIT_AUTHOR_DATE", date},   {"GIT_COMMITTER_DATE", date},
              {"GIT_AUTHOR_NAME", "Fixture"}, {"GIT_COMMITTER_NAME", "Fixture"},
              {"GIT_AUTHOR_EMAIL", "fixture@example.com"},
              {"GIT_COMMITTER_EMAIL", "fixture@example.com"},
              {"GIT_CONFIG_NOSYSTEM", "1"},   {"HOME", repo.string()}};
  auto res = util::run_process(argv, opts);
  if (!res.ok()) throw std::runtime_error("git failed: " + res.err);
  auto s = res.out;
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string shop_before() {
  return R"(package shop;

public class Shop {
  private int total;
  private int items;

  public void checkout(int price, int qty) {
    int cost = price * qty;
    total += cost;
    items += qty;
    System.out.println("cost " + cost);
    System.out.println("total " + total);
    System.out.println("items " + items);
  }

  public int getTotal() {
    return total;
  }
}
)";
}

std::string shop_after() {
  return R"(package shop;

public class Shop {
  private int total;
  private int items;

  public void checkout(int price, int qty) {
    int cost = price * qty;
    total += cost;
    items += qty;
    printSummary(cost);
  }

  private void printSummary(int cost) {
    System.out.println("cost " + cost);
    System.out.println("total " + total);
    System.out.println("items " + items);
  }

  public int getTotal() {
    return total;
  }
}
)";
}

std::pair<std::string, std::string> make_planted_repo(const fs::path& dir) {
  fs::create_directories(dir / "src");
  git(dir, {"init", "-q"});
  util::write_file(dir / "src" / "Shop.java", shop_before());
  util::write_file(dir / "README.txt", "shop\n");
  git(dir, {"add", "-A"}, 0);
  git(dir, {"commit", "-q", "-m", "initial"}, 0);
  auto parent = git(dir, {"rev-parse", "HEAD"});
  util::write_file(dir / "src" / "Shop.java", shop_after());
  git(dir, {"add", "-A"}, 1);
  git(dir, {"commit", "-q", "-m", "extract summary printing"}, 1);
  auto commit = git(dir, {"rev-parse", "HEAD"});
  util::write_file(dir / "README.txt", "shop\nnow with summaries\n");
  git(dir, {"add", "-A"}, 2);
  git(dir, {"commit", "-q", "-m", "docs"}, 2);
  return {parent, commit};
}

void make_refactoring_free_repo(const fs::path& dir) {
  fs::create_directories(dir);
  git(dir, {"init", "-q"});
  std::string v1 = R"(class Counter {
  int n;

  void bump() {
    n += 1;
  }
}
)";
  std::string v2 = R"(class Counter {
  int n;

  void bump() {
    n += 2;
    System.out.println(n);
  }
}
)";
  std::string v3 = R"(class Counter {
  int n;

  void bump() {
    n += 2;
  }

  int get() {
    return n;
  }
}
)";
  int day = 0;
  for (const auto* v : {&v1, &v2, &v3}) {
    util::write_file(dir / "Counter.java", *v);
    git(dir, {"add", "-A"}, day);
    git(dir, {"commit", "-q", "-m", fmt::format("edit {}", day)}, day);
    ++day;
  }
}

std::vector<mining::RefactoringRecord> synthetic_records(std::size_t n) {
  std::vector<mining::RefactoringRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    mining::RefactoringRecord r;
    r.input = fmt::format("void m{}() {{\n  a++;\n  b++;\n}}", i);
    r.output = fmt::format("void m{0}() {{\n  h{0}();\n}}\n\nvoid h{0}() {{\n  a++;\n  b++;\n}}", i);
    r.meta.repo = "synthetic";
    r.meta.commit_after = fmt::format("{:040}", i + 1);
    r.meta.commit_before = fmt::format("{:040}", i);
    r.meta.file_path = "A.java";
    r.meta.caller_name = fmt::format("m{}", i);
    r.meta.extracted_name = fmt::format("h{}", i);
    r.meta.caller_before_lines = {1, 4};
    r.meta.extracted_lines = {5, 8};
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace emr::testing
