#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gpsr/errors.hpp"
#include "gpsr/evaluation.hpp"
#include "gpsr/plan_parser.hpp"

namespace gpsr {
namespace {

using testing::benchmark_world;
using testing::plan_of;

const char* kJennifer =
    "[[move to, sink], [look for person, Jennifer], [follow, Jennifer], [speak, Please follow me!], "
    "[move to, initial location]]";

TEST(Score, Identity) {
  auto s = score_decomposition(plan_of(kJennifer), plan_of(kJennifer), benchmark_world());
  EXPECT_TRUE(s.correct);
  EXPECT_DOUBLE_EQ(s.step_accuracy(), 1.0);
}

TEST(Score, MissingFinalStep) {
  Plan shorter = plan_of(kJennifer);
  shorter.steps.pop_back();
  auto s = score_decomposition(shorter, plan_of(kJennifer), benchmark_world());
  EXPECT_FALSE(s.correct);
  EXPECT_DOUBLE_EQ(s.step_accuracy(), 4.0 / 5.0);
}

TEST(Score, EmptyCandidate) {
  auto s = score_decomposition(Plan{}, plan_of("[[move to, a], [move to, b], [move to, c]]"), benchmark_world());
  EXPECT_FALSE(s.correct);
  EXPECT_DOUBLE_EQ(s.step_accuracy(), 0.0);
}

TEST(Score, SynonymsCount) {
  auto s = score_decomposition(plan_of("[[move to, Sofa], [look for obj, coke]]"),
                               plan_of("[[move to, couch], [look for obj, cola]]"), benchmark_world());
  EXPECT_TRUE(s.correct);
}

TEST(Score, PositionalNotAligned) {
  // Inserting one step shifts every later position.
  auto s = score_decomposition(plan_of("[[speak, hi], [move to, a], [move to, b]]"),
                               plan_of("[[move to, a], [move to, b]]"), benchmark_world());
  EXPECT_DOUBLE_EQ(s.step_accuracy(), 0.0);
}

Suite small_suite() {
  Suite s;
  s.seed = 5;
  s.counts = {{CommandCategory::TypeA, 4}, {CommandCategory::TypeB, 4}, {CommandCategory::TypeC, 4}};
  s.commands = generate_suite(s.seed, s.counts, benchmark_world(), *testing::default_templates());
  return s;
}

BackendHandle mock(const std::string& name, const Suite& suite) {
  return std::make_shared<MockBackend>("mock:" + name, *builtin_script(name),
                                       make_gold_oracle(testing::shared_world(), testing::default_bank(),
                                                        testing::default_templates(), suite.commands));
}

EvalConfig eval_config() {
  EvalConfig c;
  c.planning.bank = testing::default_bank();
  return c;
}

TEST(EvaluateSuite, GoldHallucinateGarbage) {
  Suite s = small_suite();
  std::vector<BackendHandle> b{mock("gold", s), mock("hallucinate-once", s), mock("garbage", s)};
  EvalResult r = evaluate_suite(s, b, benchmark_world(), eval_config());
  ASSERT_EQ(r.report.rows.size(), 3u);
  EXPECT_EQ(r.report.rows[0].decomposed, 12);
  EXPECT_EQ(r.report.rows[0].executable, 12);
  EXPECT_EQ(r.report.rows[1].decomposed, 12);
  EXPECT_EQ(r.report.rows[1].attempts, 24);
  EXPECT_EQ(r.report.rows[2].decomposed, 0);
  EXPECT_EQ(r.report.rows[2].unparseable, 12);
  EXPECT_EQ(r.report.rows[2].attempts, 60);
  EXPECT_TRUE(r.report.ordering_holds());
}

TEST(EvaluateSuite, ParallelMatchesSerial) {
  Suite s = small_suite();
  std::vector<BackendHandle> b{mock("gold", s), mock("format-once", s), mock("empty-once", s)};
  auto par = evaluate_suite(s, b, benchmark_world(), eval_config());
  auto ser = evaluate_suite_serial(s, b, benchmark_world(), eval_config());
  EXPECT_EQ(par.report.to_json().dump(), ser.report.to_json().dump());
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(par.transcript(i).to_json(), ser.transcript(i).to_json());
}

TEST(EvaluateSuite, BackendErrorsStayInTheirCell) {
  Suite s = small_suite();
  MockScript one_shot{{{std::string("[[find, x]]"), std::nullopt}}, false};
  auto broken = std::make_shared<MockBackend>("mock:broken", one_shot);
  std::vector<BackendHandle> b{mock("gold", s), broken};
  EvalResult r = evaluate_suite(s, b, benchmark_world(), eval_config());
  EXPECT_EQ(r.report.rows[0].decomposed, 12);
  EXPECT_EQ(r.report.rows[1].backend_errors, 12);
  EXPECT_TRUE(r.records[12].backend_error.has_value());
}

TEST(EvaluateSuite, WrongPlansAreScoredNotExecuted) {
  Suite s = small_suite();
  MockScript wrong{{{std::string("[[move to, kitchen]]"), std::nullopt}}, true};
  std::vector<BackendHandle> b{std::make_shared<MockBackend>("mock:wrong", wrong)};
  EvalResult r = evaluate_suite(s, b, benchmark_world(), eval_config());
  EXPECT_EQ(r.report.rows[0].executable, 0);
  EXPECT_TRUE(r.report.ordering_holds());
  for (const auto& rec : r.records) {
    EXPECT_FALSE(rec.executable);
    EXPECT_TRUE(rec.runs_to_success);  // moving to the kitchen always works
  }
}

TEST(EvaluateSuite, EmptySuiteRejected) {
  Suite s;
  EXPECT_THROW(evaluate_suite(s, {mock("gold", s)}, benchmark_world(), eval_config()), InvalidInput);
}

TEST(EvaluateSuite, ReplayReproducesReport) {
  Suite s = small_suite();
  std::vector<BackendHandle> live{mock("gold", s), mock("hallucinate-once", s)};
  EvalResult first = evaluate_suite(s, live, benchmark_world(), eval_config());
  std::vector<BackendHandle> replay;
  for (std::size_t i = 0; i < live.size(); ++i) replay.push_back(std::make_shared<ReplayBackend>(first.transcript(i)));
  EvalResult second = evaluate_suite(s, replay, benchmark_world(), eval_config());
  EXPECT_EQ(first.report.to_json().dump(2), second.report.to_json().dump(2));
  EXPECT_EQ(first.report.to_table(), second.report.to_table());
}

TEST(EvalReport, TableShape) {
  Suite s = small_suite();
  EvalResult r = evaluate_suite(s, {mock("gold", s)}, benchmark_world(), eval_config());
  std::string table = r.report.to_table();
  EXPECT_NE(table.find("Type A"), std::string::npos);
  EXPECT_NE(table.find("Type B"), std::string::npos);
  EXPECT_NE(table.find("Type C"), std::string::npos);
  EXPECT_NE(table.find("mock:gold"), std::string::npos);
  auto j = r.report.to_json();
  EXPECT_EQ(j["suite"]["seed"], 5);
  EXPECT_EQ(j["suite"]["world_digest"], benchmark_world().digest());
  EXPECT_EQ(j["backends"][0]["categories"]["B"]["exact_match_rate"], 1.0);
}

}  // namespace
}  // namespace gpsr
