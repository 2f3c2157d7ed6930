#include <gtest/gtest.h>

#include "emr/align/toy.hpp"
#include "emr/reward/micro.hpp"
#include "emr/reward/reward.hpp"
#include "emr/util/error.hpp"
#include "fixtures.hpp"

using namespace emr;
using namespace emr::reward;

namespace {

// Component triples in the order used by the tables below.
const int kCombos[8][3] = {{-1, 0, -1}, {-1, 0, 1}, {-1, 1, -1}, {-1, 1, 1},
                           {1, 0, -1},  {1, 0, 1},  {1, 1, -1},  {1, 1, 1}};

CompileSandbox sandbox_with(const std::string& tmpl) {
  CompileSandbox sb;
  sb.command_template = tmpl;
  return sb;
}

}  // namespace

TEST(RewardAlgebra, TablesByHand) {
  const RewardWeights weights[3] = {{1, 1, 1}, {2, 1, 1}, {1, 0.5, 3}};
  const double want[3][8] = {{-2, 0, -1, 1, 0, 2, 1, 3},
                             {-3, -1, -2, 0, 1, 3, 2, 4},
                             {-4, 2, -3.5, 2.5, -2, 4, -1.5, 4.5}};
  for (int w = 0; w < 3; ++w) {
    for (int k = 0; k < 8; ++k) {
      EXPECT_EQ(total_reward(kCombos[k][0], kCombos[k][1], kCombos[k][2], weights[w]), want[w][k]);
    }
  }
}

TEST(RewardAlgebra, DefaultBounds) {
  double lo = 1e9, hi = -1e9;
  for (const auto& c : kCombos) {
    double t = total_reward(c[0], c[1], c[2], {});
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  EXPECT_EQ(lo, -2.0);
  EXPECT_EQ(hi, 3.0);
}

TEST(RewardWeights, Parse) {
  auto w = RewardWeights::parse("2,1,0.5");
  EXPECT_EQ(w.syntax, 2.0);
  EXPECT_EQ(w.detect, 0.5);
  EXPECT_THROW(RewardWeights::parse("1,1"), ConfigError);
  EXPECT_THROW(RewardWeights::parse("1,x,1"), ConfigError);
  EXPECT_THROW(RewardWeights::parse("1,-1,1"), ConfigError);
}

TEST(Finalize, CompileWithoutParseIsConfigError) {
  RewardBreakdown b;
  b.r_syntax = -1;
  b.r_compile = 1;
  EXPECT_THROW(finalize(b, {}), ConfigError);
}

TEST(Syntax, RewardAndDiagnostics) {
  EXPECT_EQ(syntax_reward("void f() { int x = 1; }"), 1);
  EXPECT_EQ(syntax_reward("void f() { int x = 1 }"), -1);
  auto d = syntax_diagnostics("void f() {\n  int x = 1\n}");
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].substr(0, 7), "line 2:");
}

TEST(HostUnit, ImportsGoAbove) {
  auto unit = host_compilation_unit("void f() {}", "import java.util.List;\nint n;\n");
  EXPECT_EQ(unit, "import java.util.List;\nclass __Gen {\nint n;\nvoid f() {}\n}\n");
}

TEST(Compile, StubCompilers) {
  EXPECT_EQ(compile_reward("void f() {}", sandbox_with("true {file}")).reward, 1);
  auto bad = compile_reward("void f() {}", sandbox_with("false {file}"));
  EXPECT_EQ(bad.reward, 0);
  EXPECT_FALSE(bad.diagnostics.empty());
  // The file really is there under the relative name.
  EXPECT_EQ(compile_reward("void f() {}", sandbox_with("test -s {file}")).reward, 1);
}

TEST(Compile, Timeout) {
  auto sb = sandbox_with("sh -c 'sleep 5' {file}");
  sb.timeout = std::chrono::milliseconds(200);
  auto out = compile_reward("void f() {}", sb);
  EXPECT_EQ(out.reward, 0);
  ASSERT_EQ(out.diagnostics.size(), 1u);
  EXPECT_EQ(out.diagnostics[0], "timeout");
}

TEST(Compile, MissingCompilerNamesTemplate) {
  try {
    compile_reward("void f() {}", sandbox_with("no-such-javac -d {dir} {file}"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("no-such-javac -d {dir} {file}"), std::string::npos);
  }
  EXPECT_THROW(validate_compiler(sandbox_with("true")), ConfigError);
  EXPECT_THROW(validate_compiler(sandbox_with("")), ConfigError);
}

TEST(Score, ParseFailureSkipsCompiler) {
  // A compiler that would succeed is never asked.
  auto b = score("void f() {}", "void f( {", {}, sandbox_with("true {file}"));
  EXPECT_EQ(b.r_syntax, -1);
  EXPECT_EQ(b.r_compile, 0);
  EXPECT_EQ(b.diagnostics.back(), "skipped: parse failure");
  EXPECT_EQ(b.r_total, -2.0);
}

TEST(Score, JavaFixtures) {
  if (!emr::testing::compiler_available()) GTEST_SKIP() << "no Java compiler";
  JavaRewardOracle oracle({}, sandbox_with(emr::testing::compiler_template()));
  for (const auto& f : emr::testing::reward_fixtures()) {
    auto b = oracle.score(f.before, f.generated);
    EXPECT_EQ(b.r_syntax, f.r_syntax) << f.name;
    EXPECT_EQ(b.r_compile, f.r_compile) << f.name;
    EXPECT_EQ(b.r_detect, f.r_detect) << f.name;
    if (b.r_compile == 1) EXPECT_EQ(b.r_syntax, 1) << f.name;
  }
}

TEST(Micro, WellFormedRules) {
  auto lang = MicroLanguage::with_slots(3);
  std::string diag;
  EXPECT_TRUE(micro_well_formed("void m ( ) { p0 ++ ; h ( ) ; }\n\nvoid h ( ) { q1 -- ; return ; }", lang, &diag)) << diag;
  EXPECT_FALSE(micro_well_formed("void m ( ) { z ++ ; }", lang));            // undeclared field
  EXPECT_FALSE(micro_well_formed("void m ( ) { g ( ) ; }", lang));           // unknown method
  EXPECT_FALSE(micro_well_formed("void m ( ) { } void m ( ) { }", lang));    // duplicate
  EXPECT_FALSE(micro_well_formed("void p0 ( ) { }", lang));                  // clashes with field
  EXPECT_FALSE(micro_well_formed("int m ( ) { }", lang));                    // not void
  EXPECT_FALSE(micro_well_formed("void m ( int a ) { }", lang));             // parameters
  EXPECT_FALSE(micro_well_formed("void m ( ) { return ; p0 ++ ; }", lang));  // return not last
}

TEST(Micro, ToyGroundTruthScoresMax) {
  auto corpus = emr::align::generate_toy_corpus(50, 3);
  MicroRewardOracle oracle({}, emr::align::toy_language());
  for (const auto& r : corpus) {
    auto b = oracle.score(r.input, r.output);
    EXPECT_EQ(b.r_total, 3.0) << r.output;
  }
  auto unchanged = oracle.score(corpus[0].input, corpus[0].input);
  EXPECT_EQ(unchanged.r_detect, -1);
  EXPECT_EQ(unchanged.r_total, 1.0);
  EXPECT_EQ(oracle.score(corpus[0].input, "void m ( ) {").r_total, -2.0);
}
