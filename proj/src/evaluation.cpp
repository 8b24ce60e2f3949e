#include "gpsr/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "gpsr/errors.hpp"
#include "gpsr/plan_parser.hpp"
#include "gpsr/text.hpp"
#include "gpsr/world_model.hpp"

namespace gpsr {

using nlohmann::json;

double DecompositionScore::step_accuracy() const {
  return denominator == 0 ? 1.0 : static_cast<double>(matched) / static_cast<double>(denominator);
}

DecompositionScore score_decomposition(const Plan& candidate, const Plan& gold, const WorldModel& world) {
  DecompositionScore s;
  s.denominator = std::max(candidate.size(), gold.size());
  std::size_t common = std::min(candidate.size(), gold.size());
  for (std::size_t i = 0; i < common; ++i) {
    const auto& c = candidate.steps[i];
    const auto& g = gold.steps[i];
    if (c.kind == g.kind && argument_key(world, c.argument) == argument_key(world, g.argument)) ++s.matched;
  }
  s.correct = s.matched == s.denominator;
  return s;
}

EvalRecord evaluate_cell(const Command& command, const BackendHandle& backend, const WorldModel& world,
                         const EvalConfig& config) {
  EvalRecord rec;
  rec.command = command;
  rec.backend_id = backend->id();
  rec.episode.command = command.text;
  rec.score.denominator = command.gold_plan.size();

  PlanningConfig pc = config.planning;
  pc.backend = backend;
  try {
    PlanningResult planning = plan(command.text, world, pc);
    rec.planned = planning.planned();
    rec.attempts = planning.attempts;
    if (planning.plan) rec.score = score_decomposition(*planning.plan, command.gold_plan, world);
    rec.episode.planning = planning;

    if (config.execute && planning.plan) {
      StateMachine machine;
      bool compiled = true;
      try {
        machine = compile(*planning.plan, world);
      } catch (const InvalidPlan&) {
        compiled = false;
      }
      if (compiled) {
        RunOptions opts;
        opts.answerer = [&](std::string_view q) {
          AnswerResult a = answer_question(q, pc);
          rec.episode.answers.push_back(a);
          return a;
        };
        ExecutionTrace trace = run(machine, world, initial_state(world), command.script, opts);
        rec.runs_to_success = trace.verdict.success;
        rec.episode.execution = std::move(trace);
      }
    }
  } catch (const std::exception& e) {
    rec.backend_error = e.what();
    rec.runs_to_success = false;
  }
  rec.executable = rec.score.correct && rec.planned && rec.runs_to_success && !rec.backend_error;
  return rec;
}

namespace {

EvalReport aggregate(const Suite& suite, const std::vector<BackendHandle>& backends, const WorldModel& world,
                     const std::vector<EvalRecord>& records) {
  EvalReport report;
  report.seed = suite.seed;
  for (const auto& c : suite.commands) ++report.counts[c.category];
  report.world_digest = world.digest();
  const std::size_t n = suite.commands.size();
  for (std::size_t b = 0; b < backends.size(); ++b) {
    BackendRow row;
    row.backend_id = backends[b]->id();
    for (std::size_t i = 0; i < n; ++i) {
      const EvalRecord& r = records[b * n + i];
      CategoryStats& cs = row.categories[r.command.category];
      ++cs.commands;
      ++row.commands;
      if (r.backend_error) {
        ++row.backend_errors;
        continue;
      }
      row.attempts += r.attempts;
      if (!r.planned) ++row.unparseable;
      if (r.planned && r.score.correct) {
        ++cs.exact;
        ++row.decomposed;
      }
      if (r.planned) cs.step_accuracy_sum += r.score.step_accuracy();
      if (r.executable) ++row.executable;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<EvalRecord> allocate(const Suite& suite, const std::vector<BackendHandle>& backends) {
  if (suite.commands.empty()) throw InvalidInput("evaluation suite is empty");
  if (backends.empty()) throw InvalidInput("no backend to evaluate");
  return std::vector<EvalRecord>(suite.commands.size() * backends.size());
}

double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

}  // namespace

EvalResult evaluate_suite(const Suite& suite, const std::vector<BackendHandle>& backends, const WorldModel& world,
                          const EvalConfig& config) {
  auto records = allocate(suite, backends);
  const long n = static_cast<long>(suite.commands.size());
  const long cells = static_cast<long>(records.size());
#pragma omp parallel for schedule(dynamic)
  for (long cell = 0; cell < cells; ++cell) {
    records[cell] = evaluate_cell(suite.commands[cell % n], backends[cell / n], world, config);
  }
  EvalReport report = aggregate(suite, backends, world, records);
  return {std::move(report), std::move(records)};
}

EvalResult evaluate_suite_serial(const Suite& suite, const std::vector<BackendHandle>& backends,
                                 const WorldModel& world, const EvalConfig& config) {
  auto records = allocate(suite, backends);
  const std::size_t n = suite.commands.size();
  for (std::size_t cell = 0; cell < records.size(); ++cell) {
    records[cell] = evaluate_cell(suite.commands[cell % n], backends[cell / n], world, config);
  }
  EvalReport report = aggregate(suite, backends, world, records);
  return {std::move(report), std::move(records)};
}

Transcript EvalResult::transcript(std::size_t backend_index) const {
  const std::size_t n = records.size() / std::max<std::size_t>(report.rows.size(), 1);
  Transcript t;
  t.backend_id = report.rows.at(backend_index).backend_id;
  for (std::size_t i = 0; i < n; ++i) {
    t.merge(record_transcript(records[backend_index * n + i].episode, t.backend_id));
  }
  return t;
}

bool EvalReport::ordering_holds() const {
  return std::all_of(rows.begin(), rows.end(), [](const BackendRow& r) { return r.decomposed >= r.executable; });
}

json EvalReport::to_json() const {
  json cnt = json::object();
  for (const auto& [c, k] : counts) cnt[std::string(to_string(c))] = k;
  json rows_j = json::array();
  for (const auto& r : rows) {
    json cats = json::object();
    for (const auto& [c, s] : r.categories) {
      cats[std::string(to_string(c))] = {
          {"commands", s.commands},
          {"exact", s.exact},
          {"exact_match_rate", ratio(s.exact, s.commands)},
          {"mean_step_accuracy", s.commands == 0 ? 0.0 : s.step_accuracy_sum / s.commands},
      };
    }
    long scored = r.commands - r.backend_errors;
    rows_j.push_back({
        {"backend", r.backend_id},
        {"categories", cats},
        {"commands", r.commands},
        {"decomposed", r.decomposed},
        {"executable", r.executable},
        {"unparseable", r.unparseable},
        {"backend_errors", r.backend_errors},
        {"decomposition_rate", ratio(r.decomposed, r.commands)},
        {"executability_rate", ratio(r.executable, r.commands)},
        {"mean_attempts", ratio(r.attempts, scored)},
    });
  }
  return {{"schema", 1},
          {"suite", {{"seed", seed}, {"counts", cnt}, {"world_digest", world_digest}}},
          {"backends", rows_j},
          {"ordering_holds", ordering_holds()}};
}

std::string EvalReport::to_table() const {
  std::string out;
  std::size_t width = 8;
  for (const auto& r : rows) width = std::max(width, r.backend_id.size());
  out += fmt::format("{:<{}} |", "backend", width);
  for (CommandCategory c : kAllCategories) out += fmt::format(" Type {} (exact / step) |", to_string(c));
  out += " decomposed | executable | mean attempts\n";
  out += std::string(out.size() - 1, '-') + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{:<{}} |", r.backend_id, width);
    for (CommandCategory c : kAllCategories) {
      auto it = r.categories.find(c);
      if (it == r.categories.end() || it->second.commands == 0) {
        out += fmt::format(" {:>22} |", "n/a");
        continue;
      }
      const CategoryStats& s = it->second;
      out += fmt::format(" {:>9.1f}% / {:>7.1f}% |", 100.0 * ratio(s.exact, s.commands),
                         100.0 * s.step_accuracy_sum / s.commands);
    }
    out += fmt::format(" {:>9.1f}% | {:>9.1f}% | {:>13.2f}\n", 100.0 * ratio(r.decomposed, r.commands),
                       100.0 * ratio(r.executable, r.commands), ratio(r.attempts, r.commands - r.backend_errors));
  }
  int total = 0;
  for (const auto& [_, k] : counts) total += k;
  out += fmt::format("suite seed {} | {} commands", seed, total);
  for (const auto& [c, k] : counts) out += fmt::format(" | {}: {}", to_string(c), k);
  out += fmt::format(" | world {}\n", world_digest.substr(0, 12));
  return out;
}

GoldOracle make_gold_oracle(std::shared_ptr<const WorldModel> world, std::shared_ptr<const PromptBank> bank,
                            std::shared_ptr<const TemplateBank> templates, std::vector<Command> known) {
  auto table = std::make_shared<std::map<std::string, std::string>>();
  for (const auto& c : known) table->emplace(text::normalize(c.text), render(c.gold_plan));
  if (bank) {
    for (const auto& ex : bank->examples()) table->emplace(text::normalize(ex.command_text), render(ex.gold_plan));
  }
  return [world, templates, table](std::string_view command) -> std::optional<std::string> {
    auto it = table->find(text::normalize(command));
    if (it != table->end()) return it->second;
    if (templates && world) {
      if (auto c = templates->match(command, *world)) return render(c->gold_plan);
    }
    return std::nullopt;
  };
}

}  // namespace gpsr
