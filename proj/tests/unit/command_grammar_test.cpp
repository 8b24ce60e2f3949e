#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "gpsr/command_grammar.hpp"
#include "gpsr/errors.hpp"
#include "gpsr/executor.hpp"
#include "gpsr/plan_parser.hpp"

namespace gpsr {
namespace {

using nlohmann::json;
using testing::benchmark_world;
using testing::default_templates;

TEST(TemplateBank, AtLeastFivePerCategory) {
  std::map<CommandCategory, int> n;
  for (const auto& t : default_templates()->templates()) ++n[t.category];
  for (CommandCategory c : kAllCategories) EXPECT_GE(n[c], 5) << to_string(c);
}

TEST(TemplateBank, MatchesJenniferCommand) {
  auto c = default_templates()->match("Meet Jennifer at the sink, follow her, and take her back", benchmark_world());
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(render(c->gold_plan),
            "[[move to, sink], [look for person, Jennifer], [follow, Jennifer], [speak, Please follow me!], "
            "[move to, initial location]]");
}

TEST(TemplateBank, MatchesTask3Command) {
  auto c = default_templates()->match(
      "Could you navigate to the bedroom, locate a person pointing to the left, and answer a question?",
      benchmark_world());
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(render(c->gold_plan), "[[move to, bedroom], [look for person, point to the left], [answer, question]]");
  EXPECT_EQ(c->category, CommandCategory::TypeC);
}

TEST(TemplateBank, UnknownTextDoesNotMatch) {
  EXPECT_FALSE(default_templates()->match("Dance with the robot", benchmark_world()).has_value());
}

TEST(TemplateBank, RejectsPlanSlotMissingFromText) {
  json doc = json::parse(R"({"schema": 1, "templates": [{"id": "X", "category": "A",
      "slots": [{"name": "a", "type": "location"}, {"name": "b", "type": "location"}],
      "surface": "Go to the {a}", "plan": [["move to", "{b}"]]}]})");
  EXPECT_THROW(TemplateBank::from_json(doc), SchemaError);
}

TEST(TemplateBank, RejectsImpureCategory) {
  json doc = json::parse(R"({"schema": 1, "templates": [{"id": "X", "category": "B",
      "slots": [{"name": "a", "type": "location"}], "surface": "Go to the {a}", "plan": [["move to", "{a}"]]}]})");
  EXPECT_THROW(TemplateBank::from_json(doc), SchemaError);
}

TEST(Generate, DeterministicForSeed) {
  Command a = generate(42, CommandCategory::TypeB, benchmark_world(), *default_templates());
  Command b = generate(42, CommandCategory::TypeB, benchmark_world(), *default_templates());
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.gold_plan, b.gold_plan);
  EXPECT_EQ(a.category, CommandCategory::TypeB);
}

TEST(Generate, EmptyBank) {
  TemplateBank empty = TemplateBank::from_json(json::parse(R"({"schema": 1, "templates": []})"));
  EXPECT_THROW(generate(1, CommandCategory::TypeA, benchmark_world(), empty), EmptyBank);
}

TEST(GenerateSuite, Counts) {
  auto cmds = generate_suite(7, {{CommandCategory::TypeA, 2}, {CommandCategory::TypeB, 1}, {CommandCategory::TypeC, 1}},
                             benchmark_world(), *default_templates());
  ASSERT_EQ(cmds.size(), 4u);
  EXPECT_EQ(cmds[0].category, CommandCategory::TypeA);
  EXPECT_EQ(cmds[1].category, CommandCategory::TypeA);
  EXPECT_EQ(cmds[2].category, CommandCategory::TypeB);
  EXPECT_EQ(cmds[3].category, CommandCategory::TypeC);
  EXPECT_TRUE(generate_suite(7, {}, benchmark_world(), *default_templates()).empty());
  EXPECT_THROW(generate_suite(7, {{CommandCategory::TypeA, -1}}, benchmark_world(), *default_templates()),
               InvalidInput);
}

class FullSuite : public ::testing::Test {
 protected:
  static std::vector<Command> suite() {
    return generate_suite(2024, {{CommandCategory::TypeA, 34}, {CommandCategory::TypeB, 33}, {CommandCategory::TypeC, 33}},
                          benchmark_world(), *default_templates());
  }
};

TEST_F(FullSuite, GoldPlansAreValidAndPure) {
  for (const auto& c : suite()) {
    EXPECT_TRUE(validate_static(c.gold_plan, benchmark_world()).valid()) << c.text;
    auto has = [&](PrimitiveKind k) {
      return std::any_of(c.gold_plan.steps.begin(), c.gold_plan.steps.end(), [&](const ActionStep& s) { return s.kind == k; });
    };
    switch (c.category) {
      case CommandCategory::TypeA:
        EXPECT_FALSE(has(PrimitiveKind::grasp) || has(PrimitiveKind::pass_to) || has(PrimitiveKind::answer));
        break;
      case CommandCategory::TypeB: EXPECT_TRUE(has(PrimitiveKind::look_for_obj)); break;
      case CommandCategory::TypeC: EXPECT_TRUE(has(PrimitiveKind::speak) || has(PrimitiveKind::answer)); break;
    }
  }
}

TEST_F(FullSuite, EntityMentionsResolve) {
  for (const auto& c : suite()) {
    for (const auto& s : c.gold_plan.steps) {
      if (s.kind == PrimitiveKind::move_to || s.kind == PrimitiveKind::look_for_obj || s.kind == PrimitiveKind::grasp) {
        EXPECT_NE(benchmark_world().resolve(s.argument).kind, EntityKind::unresolved) << c.text;
      }
    }
  }
}

TEST_F(FullSuite, SuiteJsonRoundTrip) {
  Suite s;
  s.seed = 2024;
  s.counts = {{CommandCategory::TypeA, 34}, {CommandCategory::TypeB, 33}, {CommandCategory::TypeC, 33}};
  s.commands = suite();
  Suite back = Suite::from_json(s.to_json());
  EXPECT_EQ(back.to_json(), s.to_json());
}

// Every binding of every template, not only a sampled suite.
TEST(GoldSoundness, EveryTemplateBindingRunsToSuccess) {
  const WorldModel& w = benchmark_world();
  std::size_t checked = 0;
  for (std::uint64_t seed = 0; seed < 600; ++seed) {
    for (CommandCategory cat : kAllCategories) {
      Command c = generate(seed, cat, w, *default_templates());
      RunOptions opts;
      opts.answerer = testing::fixed_answerer("Fine, thanks.");
      ExecutionTrace t = run(compile(c.gold_plan, w), w, initial_state(w), c.script, opts);
      ASSERT_TRUE(t.verdict.success) << c.text << " -> " << render(c.gold_plan) << ": " << t.verdict.detail;
      auto back = default_templates()->match(c.text, w);
      ASSERT_TRUE(back.has_value()) << c.text;
      EXPECT_EQ(back->gold_plan, c.gold_plan) << c.text;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 1800u);
}

}  // namespace
}  // namespace gpsr
