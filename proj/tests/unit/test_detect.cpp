#include <random>

#include <gtest/gtest.h>

#include "emr/detect/detector.hpp"
#include "fixtures.hpp"

using namespace emr::detect;

namespace {

std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  // All subsequences of a (a is short) checked against b greedily.
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t j = 0, len = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) ok = false; else { ++j; ++len; }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

}  // namespace

TEST(Lcs, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> a(rng() % 9), b(rng() % 12);
    for (auto& s : a) s = std::string(1, static_cast<char>('a' + rng() % 3));
    for (auto& s : b) s = std::string(1, static_cast<char>('a' + rng() % 3));
    auto r = longest_common_subsequence(a, b);
    EXPECT_EQ(r.length, brute_lcs(a, b));
    ASSERT_EQ(r.matched_b.size(), r.length);
    EXPECT_TRUE(std::is_sorted(r.matched_b.begin(), r.matched_b.end()));
  }
}

TEST(Detector, IdenticalVersionsHaveNoFindings) {
  for (const auto& unit : emr::testing::java_corpus(10, 1)) {
    EXPECT_TRUE(detect_extract_method(unit, unit).empty());
  }
}

TEST(Detector, FindsPlantedExtraction) {
  auto f = detect_extract_method(emr::testing::shop_before(), emr::testing::shop_after());
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].caller_name, "checkout");
  EXPECT_EQ(f[0].extracted_name, "printSummary");
  EXPECT_EQ(f[0].matched_statements, 3u);
  EXPECT_EQ(f[0].extracted_statements, 3u);
  EXPECT_DOUBLE_EQ(f[0].match_score, 1.0);
  ASSERT_FALSE(f[0].caller_spans.empty());
  EXPECT_EQ(f[0].caller_spans.front().start_line, 11);
  EXPECT_EQ(f[0].caller_spans.back().end_line, 13);
}

TEST(Detector, GeneratedPlantsRecovered) {
  for (const auto& p : emr::testing::planted_extractions(10, 2)) {
    auto f = detect_extract_method(p.before, p.after);
    ASSERT_EQ(f.size(), 1u) << p.after;
    EXPECT_EQ(f[0].caller_name, p.caller);
    EXPECT_EQ(f[0].extracted_name, p.extracted);
    EXPECT_DOUBLE_EQ(f[0].match_score, 1.0);
  }
}

TEST(Detector, LayoutAndCommentsDoNotMatter) {
  auto plants = emr::testing::planted_extractions(5, 9);
  for (std::size_t i = 0; i < plants.size(); ++i) {
    auto a = detect_extract_method(plants[i].before, plants[i].after);
    auto b = detect_extract_method(emr::testing::mutate_layout(plants[i].before, i),
                                   emr::testing::mutate_layout(plants[i].after, i + 100));
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].caller_name, b[k].caller_name);
      EXPECT_EQ(a[k].extracted_name, b[k].extracted_name);
      EXPECT_EQ(a[k].matched_statements, b[k].matched_statements);
      EXPECT_DOUBLE_EQ(a[k].match_score, b[k].match_score);
    }
  }
}

TEST(Detector, ExistingMethodIsNotAnExtraction) {
  // getTotal exists before, so calling it is not an extraction.
  std::string before = "class A { int t; void f() { t++; } int getTotal() { return t; } }";
  std::string after = "class A { int t; void f() { t++; getTotal(); } int getTotal() { return t; } }";
  EXPECT_TRUE(detect_extract_method(before, after).empty());
}

TEST(Detector, CallerMustInvokeNewMethod) {
  std::string before = "class A { int t; void f() { t++; t--; } }";
  std::string after = "class A { int t; void f() { t++; t--; } void g() { t++; t--; } }";
  EXPECT_TRUE(detect_extract_method(before, after).empty());
}

TEST(Detector, MatchFractionThreshold) {
  std::string before = "class A { int t; void f() { t++; t--; } }";
  // Three of four extracted statements are new: 1/4 < 0.5.
  std::string after =
      "class A { int t; void f() { g(); } void g() { t++; t += 7; t -= 9; t *= 3; } }";
  EXPECT_TRUE(detect_extract_method(before, after).empty());
  // Two of four: exactly 0.5 passes.
  std::string after2 =
      "class A { int t; void f() { g(); } void g() { t++; t--; t -= 9; t *= 3; } }";
  auto f = detect_extract_method(before, after2);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_DOUBLE_EQ(f[0].match_score, 0.5);
}

TEST(Detector, MinStatements) {
  std::string before = "class A { int t; void f() { t++; t--; } }";
  std::string after = "class A { int t; void f() { g(); } void g() { t++; t--; } }";
  EXPECT_EQ(detect_extract_method(before, after).size(), 1u);
  EXPECT_TRUE(detect_extract_method(before, after, qualitative_detect_config()).empty());
}

TEST(Detector, GeneratedOutputOnBareMethods) {
  std::string before = "void f() {\n  t++;\n  t--;\n}";
  std::string gen = "void f() {\n  g();\n}\n\nvoid g() {\n  t++;\n  t--;\n}";
  auto f = detect_in_generated(before, gen);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].extracted_name, "g");
  EXPECT_TRUE(detect_in_generated(before, "void f() {\n  g();\n}\n\nvoid g() {\n  t++;\n").empty());
}

TEST(Detector, IndexMethodsSeesNestedTypes) {
  auto tree = emr::syntax::parse_source(
      "class A { void f() { new Runnable() { public void run() { x(); } }; } class B { B() {} } }");
  auto ms = index_methods(tree);
  ASSERT_EQ(ms.size(), 3u);
  EXPECT_EQ(ms[0].name, "f");
  EXPECT_EQ(ms[1].name, "run");
  EXPECT_TRUE(ms[2].is_constructor);
}
