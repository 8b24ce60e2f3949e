#include "gpsr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <memory>

#include "gpsr/command_grammar.hpp"
#include "gpsr/episode.hpp"
#include "gpsr/errors.hpp"
#include "gpsr/evaluation.hpp"
#include "gpsr/executor.hpp"
#include "gpsr/llm_client.hpp"
#include "gpsr/plan_parser.hpp"
#include "gpsr/planning_loop.hpp"
#include "gpsr/prompt_builder.hpp"
#include "gpsr/text.hpp"
#include "gpsr/world_model.hpp"

#ifndef GPSR_DEFAULT_DATA_DIR
#define GPSR_DEFAULT_DATA_DIR "data"
#endif

namespace gpsr::cli {

namespace fs = std::filesystem;

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
}

fs::path GlobalConfig::output_path(const fs::path& requested) const {
  fs::path base = fs::weakly_canonical(fs::absolute(out_dir));
  fs::path p = fs::weakly_canonical(requested.is_absolute() ? requested : base / requested);
  auto [b, _] = std::mismatch(base.begin(), base.end(), p.begin(), p.end());
  if (b != base.end() || p == base) {
    throw UsageError("output path " + p.string() + " is outside the output directory " + base.string());
  }
  fs::create_directories(p.parent_path());
  return p;
}

namespace {

struct Flags {
  std::string data_dir, world, prompt_bank, templates, backends, out_dir;
  int verbosity = 0;
};

GlobalConfig resolve(const Flags& f, const EnvLookup& env) {
  auto pick = [&](const std::string& flag, const char* var) -> std::optional<std::string> {
    if (!flag.empty()) return flag;
    return env(var);
  };
  GlobalConfig c;
  c.data_dir = pick(f.data_dir, "GPSR_DATA_DIR").value_or(GPSR_DEFAULT_DATA_DIR);
  c.world = pick(f.world, "GPSR_WORLD").value_or((c.data_dir / "benchmark_world.json").string());
  c.prompt_bank = pick(f.prompt_bank, "GPSR_PROMPT_BANK").value_or((c.data_dir / "prompt_bank.json").string());
  c.templates = pick(f.templates, "GPSR_TEMPLATES").value_or((c.data_dir / "templates.json").string());
  if (auto b = pick(f.backends, "GPSR_BACKENDS")) {
    c.backends = *b;
  } else if (fs::exists(c.data_dir / "backends.json")) {
    c.backends = c.data_dir / "backends.json";
  }
  c.out_dir = pick(f.out_dir, "GPSR_OUT_DIR").value_or(".");
  c.verbosity = f.verbosity;
  return c;
}

std::string transcript_file_name(std::string_view backend_id) {
  std::string s(backend_id);
  for (char& ch : s) {
    bool keep = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    if (!keep) ch = '_';
  }
  return s + ".json";
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream o(p, std::ios::binary);
  if (!o) throw IoError("cannot write " + p.string());
  o << content;
}

// Files are loaded on first use so every subcommand fails on a missing input
// before it reaches a backend.
class Session {
 public:
  Session(GlobalConfig cfg, std::ostream& out, std::ostream& err) : cfg(std::move(cfg)), out(out), err(err) {}

  GlobalConfig cfg;
  std::ostream& out;
  std::ostream& err;

  std::shared_ptr<const WorldModel> world() {
    if (!world_) world_ = std::make_shared<const WorldModel>(WorldModel::load(cfg.world));
    return world_;
  }
  std::shared_ptr<const PromptBank> bank() {
    if (!bank_) bank_ = std::make_shared<const PromptBank>(PromptBank::load(cfg.prompt_bank));
    return bank_;
  }
  std::shared_ptr<const TemplateBank> templates() {
    if (!templates_) templates_ = std::make_shared<const TemplateBank>(TemplateBank::load(cfg.templates));
    return templates_;
  }
  // Template bank only when present; the gold oracle can do without it.
  std::shared_ptr<const TemplateBank> optional_templates() {
    if (!templates_ && !fs::exists(cfg.templates)) return nullptr;
    return templates();
  }

  BackendHandle backend(const std::string& spec, const std::vector<Command>& known = {}) {
    BackendContext ctx;
    ctx.data_dir = cfg.data_dir;
    ctx.backend_config = cfg.backends;
    ctx.gold = make_gold_oracle(world(), bank(), optional_templates(), known);
    return make_backend(spec, ctx);
  }

  PlanningConfig planning(BackendHandle backend) {
    PlanningConfig pc;
    pc.backend = std::move(backend);
    pc.bank = bank();
    return pc;
  }

 private:
  std::shared_ptr<const WorldModel> world_;
  std::shared_ptr<const PromptBank> bank_;
  std::shared_ptr<const TemplateBank> templates_;
};

std::string describe(const Attempt& a) {
  if (a.succeeded()) return "accepted";
  if (const auto* p = std::get_if<ParseOutcome>(&a.classification)) {
    return std::string(to_string(p->failure().kind)) + ": " + p->failure().detail;
  }
  const auto& r = std::get<ValidationReport>(a.classification);
  return std::string(to_string(r.verdict)) + ": " + r.detail;
}

void print_attempt_log(std::ostream& out, const PlanningResult& r) {
  for (std::size_t i = 0; i < r.attempt_log.size(); ++i) {
    const Attempt& a = r.attempt_log[i];
    out << "attempt " << i + 1 << ": " << describe(a) << "\n";
    out << "  response: " << a.exchange.response.content << "\n";
    if (a.corrective_suffix) out << "  correction: " << *a.corrective_suffix << "\n";
  }
}

void print_trace(std::ostream& out, const ExecutionTrace& t) {
  for (const auto& e : t.entries) {
    out << e.state << " " << to_string(e.outcome);
    for (const auto& o : e.observations) out << " | " << o;
    for (const auto& u : e.utterances) out << " | says: " << u;
    out << "\n";
  }
  if (t.verdict.success) {
    out << "RESULT success\n";
    return;
  }
  out << "RESULT failure";
  if (t.verdict.failed_step) out << " at step " << *t.verdict.failed_step;
  if (t.verdict.reason) out << ": " << to_string(*t.verdict.reason);
  if (!t.verdict.detail.empty()) out << " (" << t.verdict.detail << ")";
  out << "\n";
}

void save_transcript(Session& s, const std::string& path, const EpisodeTrace& ep, const BackendHandle& b) {
  if (path.empty()) return;
  record_transcript(ep, b->id()).save(s.cfg.output_path(path));
}

BackendHandle replay_or(Session& s, const std::string& replay, const std::string& spec,
                        const std::vector<Command>& known = {}) {
  if (!replay.empty()) return std::make_shared<ReplayBackend>(Transcript::load(replay));
  return s.backend(spec, known);
}

// --- subcommands -------------------------------------------------------------

struct GenerateArgs {
  std::uint64_t seed = 0;
  std::string type;
  int count = 1;
  std::string split = "34/33/33";
  std::string out;
};

int cmd_generate(Session& s, const GenerateArgs& a) {
  Suite suite;
  suite.seed = a.seed;
  if (!a.type.empty()) {
    auto c = parse_category(a.type);
    if (!c) throw UsageError("--type must be A, B or C");
    if (a.count < 0) throw UsageError("--count must be non-negative");
    suite.counts[*c] = a.count;
  } else {
    auto parts = text::words(text::replace_all(a.split, "/", " "));
    if (parts.size() != 3) throw UsageError("--split must look like 34/33/33");
    for (std::size_t i = 0; i < 3; ++i) {
      int n = 0;
      try {
        n = std::stoi(parts[i]);
      } catch (const std::exception&) {
        throw UsageError("--split must look like 34/33/33");
      }
      if (n < 0) throw UsageError("--split counts must be non-negative");
      suite.counts[kAllCategories[i]] = n;
    }
  }
  suite.commands = generate_suite(a.seed, suite.counts, *s.world(), *s.templates());
  std::string doc = suite.to_json().dump(2) + "\n";
  if (a.out.empty()) {
    s.out << doc;
  } else {
    write_file(s.cfg.output_path(a.out), doc);
    s.out << "wrote " << suite.commands.size() << " commands\n";
  }
  return kOk;
}

int cmd_prompt(Session& s, const std::string& command) {
  s.out << build_prompt(command, *s.world(), *s.bank(), PromptConfig{}).render() << "\n";
  return kOk;
}

struct PlanArgs {
  std::string command;
  std::string backend = "mock:gold";
  std::string record;
  std::string replay;
};

int cmd_plan(Session& s, const PlanArgs& a, BackendHandle backend = nullptr) {
  auto world = s.world();
  if (!backend) backend = replay_or(s, a.replay, a.backend);
  EpisodeTrace ep;
  ep.command = a.command;
  ep.planning = plan(a.command, *world, s.planning(backend));
  save_transcript(s, a.record, ep, backend);
  const PlanningResult& r = *ep.planning;
  if (!r.planned()) {
    s.out << "UNPARSEABLE after " << r.attempts << " attempts\n";
    print_attempt_log(s.out, r);
    return kUnparseable;
  }
  s.out << render(*r.plan) << "\n";
  if (s.cfg.verbosity > 0) print_attempt_log(s.out, r);
  return kOk;
}

int cmd_parse(Session& s, const std::string& in, const std::string& text_arg) {
  std::string raw = in.empty() ? text_arg : read_file(in);
  ParseOutcome o = parse(raw);
  if (!o.parsed()) {
    s.out << "FAILED " << to_string(o.failure().kind) << ": " << o.failure().detail << "\n";
    return kUnparseable;
  }
  s.out << "PARSED\n" << render(o.plan()) << "\n";
  return kOk;
}

struct RunArgs {
  std::string plan_file;
  std::string command;
  std::string script;
  std::string backend = "mock:gold";
  std::string record;
  std::string replay;
  std::string trace_out;
};

int cmd_run(Session& s, const RunArgs& a) {
  auto world = s.world();
  InteractionScript io = a.script.empty() ? InteractionScript{} : InteractionScript::load(a.script);
  std::optional<Plan> candidate;
  if (!a.plan_file.empty()) {
    ParseOutcome o = parse(read_file(a.plan_file));
    if (!o.parsed()) {
      s.out << "FAILED " << to_string(o.failure().kind) << ": " << o.failure().detail << "\n";
      return kUnparseable;
    }
    candidate = o.plan();
  }
  BackendHandle backend = replay_or(s, a.replay, a.backend);
  PlanningConfig pc = s.planning(backend);
  EpisodeTrace ep;
  ep.command = a.command;
  if (!candidate) {
    ep.planning = plan(a.command, *world, pc);
    if (!ep.planning->planned()) {
      save_transcript(s, a.record, ep, backend);
      s.out << "UNPARSEABLE after " << ep.planning->attempts << " attempts\n";
      print_attempt_log(s.out, *ep.planning);
      return kUnparseable;
    }
    candidate = ep.planning->plan;
  }
  s.out << "PLAN " << render(*candidate) << "\n";
  StateMachine machine;
  try {
    machine = compile(*candidate, *world);
  } catch (const InvalidPlan&) {
    ValidationReport v = validate_static(*candidate, *world);
    s.out << "RESULT failure";
    if (v.offending_index) s.out << " at step " << *v.offending_index;
    s.out << ": " << to_string(v.verdict) << " (" << v.detail << ")\n";
    save_transcript(s, a.record, ep, backend);
    return kExecutionFailed;
  }
  RunOptions opts;
  opts.answerer = [&](std::string_view q) {
    AnswerResult r = answer_question(q, pc);
    ep.answers.push_back(r);
    return r;
  };
  ep.execution = run(machine, *world, initial_state(*world), io, opts);
  save_transcript(s, a.record, ep, backend);
  print_trace(s.out, *ep.execution);
  if (!a.trace_out.empty()) write_file(s.cfg.output_path(a.trace_out), ep.to_json().dump(2) + "\n");
  return ep.execution->verdict.success ? kOk : kExecutionFailed;
}

struct EvalArgs {
  std::string suite;
  std::vector<std::string> backends{"mock:gold"};
  std::string replay_dir;
  std::string record_dir;
  std::string report = "eval_report.json";
  bool check = false;
  bool serial = false;
  double min_decomposition = 0.0;
  double min_executability = 0.0;
};

bool is_gold_mock(std::string_view id) { return id == "mock:gold"; }

int run_eval(Session& s, const EvalArgs& a, const Suite& suite, const std::vector<BackendHandle>& backends) {
  auto world = s.world();
  EvalConfig ec;
  ec.planning = s.planning(backends.front());
  EvalResult result = a.serial ? evaluate_suite_serial(suite, backends, *world, ec)
                               : evaluate_suite(suite, backends, *world, ec);
  if (!a.record_dir.empty()) {
    for (std::size_t b = 0; b < backends.size(); ++b) {
      fs::path p = s.cfg.output_path(fs::path(a.record_dir) / transcript_file_name(backends[b]->id()));
      result.transcript(b).save(p);
    }
  }
  if (!a.report.empty()) write_file(s.cfg.output_path(a.report), result.report.to_json().dump(2) + "\n");
  s.out << result.report.to_table();

  if (!a.check) return kOk;
  std::vector<std::string> failures;
  if (!result.report.ordering_holds()) failures.push_back("decomposition rate is below executability rate");
  for (const auto& row : result.report.rows) {
    double dec = static_cast<double>(row.decomposed) / row.commands;
    double exe = static_cast<double>(row.executable) / row.commands;
    double need_dec = is_gold_mock(row.backend_id) ? 1.0 : a.min_decomposition;
    double need_exe = is_gold_mock(row.backend_id) ? 1.0 : a.min_executability;
    if (row.backend_errors > 0) failures.push_back(row.backend_id + ": backend errors");
    if (dec < need_dec) failures.push_back(row.backend_id + ": decomposition rate below threshold");
    if (exe < need_exe) failures.push_back(row.backend_id + ": executability rate below threshold");
  }
  for (const auto& f : failures) s.err << "check failed: " << f << "\n";
  return failures.empty() ? kOk : kCheckFailed;
}

int cmd_eval(Session& s, const EvalArgs& a) {
  Suite suite = Suite::load(a.suite);
  s.world();
  std::vector<BackendHandle> backends;
  for (const auto& spec : a.backends) {
    if (!a.replay_dir.empty()) {
      backends.push_back(std::make_shared<ReplayBackend>(
          Transcript::load(fs::path(a.replay_dir) / transcript_file_name(spec))));
    } else {
      backends.push_back(s.backend(spec, suite.commands));
    }
  }
  return run_eval(s, a, suite, backends);
}

struct ReplayArgs {
  std::string transcript;
  std::string command;
  std::string suite;
  std::string report;
};

int cmd_replay(Session& s, const ReplayArgs& a) {
  if (a.command.empty() == a.suite.empty()) throw UsageError("replay needs exactly one of --command or --suite");
  auto backend = std::make_shared<ReplayBackend>(Transcript::load(a.transcript));
  if (!a.command.empty()) {
    PlanArgs p;
    p.command = a.command;
    return cmd_plan(s, p, backend);
  }
  EvalArgs e;
  e.suite = a.suite;
  e.report = a.report;
  e.serial = true;
  return run_eval(s, e, Suite::load(a.suite), {backend});
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  CLI::App app{"Plans and executes household service-robot commands with a language model.", "gpsr"};
  app.require_subcommand(1, 1);
  Flags flags;
  app.add_option("--data-dir", flags.data_dir, "Directory with the default world, banks and mock scripts");
  app.add_option("--world", flags.world, "World description file");
  app.add_option("--prompt-bank", flags.prompt_bank, "Prompt bank file");
  app.add_option("--templates", flags.templates, "Command template bank file");
  app.add_option("--backend-config", flags.backends, "Backend config file");
  app.add_option("--out-dir", flags.out_dir, "Directory every output file must stay in");
  app.add_flag("-v,--verbose", flags.verbosity, "Print attempt logs of successful plans");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate commands with gold plans from the template bank");
  g->add_option("--seed", gen.seed, "Random seed")->required();
  g->add_option("--type", gen.type, "Category A, B or C (omit for a mixed suite)");
  g->add_option("--count", gen.count, "Number of commands of --type");
  g->add_option("--split", gen.split, "A/B/C counts of a mixed suite")->capture_default_str();
  g->add_option("--out", gen.out, "Suite file (stdout when omitted)");

  std::string prompt_command;
  auto* pr = app.add_subcommand("prompt", "Print the planning prompt for a command");
  pr->add_option("--command", prompt_command, "Command text")->required();

  PlanArgs pl;
  auto* p = app.add_subcommand("plan", "Plan a command with a backend");
  p->add_option("--command", pl.command, "Command text")->required();
  p->add_option("--backend", pl.backend, "mock:<script>, replay:<file>, or a configured backend")
      ->capture_default_str();
  p->add_option("--record", pl.record, "Write the exchanges to this transcript");
  p->add_option("--replay", pl.replay, "Answer from this transcript instead of --backend");

  std::string parse_in, parse_text;
  auto* pa = app.add_subcommand("parse", "Parse a response text into a plan");
  auto* pa_in = pa->add_option("--in", parse_in, "File holding the response");
  auto* pa_text = pa->add_option("--text", parse_text, "Response text");
  pa_in->excludes(pa_text);
  pa->require_option(1);

  RunArgs ra;
  auto* r = app.add_subcommand("run", "Execute a plan (or a planned command) in the world");
  auto* r_plan = r->add_option("--plan", ra.plan_file, "File holding a plan");
  auto* r_cmd = r->add_option("--command", ra.command, "Command to plan first");
  r_plan->excludes(r_cmd);
  r->add_option("--script", ra.script, "Interaction script (questions, gestures)");
  r->add_option("--backend", ra.backend, "Backend for planning and answering")->capture_default_str();
  r->add_option("--record", ra.record, "Write the exchanges to this transcript");
  r->add_option("--replay", ra.replay, "Answer from this transcript instead of --backend");
  r->add_option("--trace-out", ra.trace_out, "Write the episode trace as JSON");

  EvalArgs ea;
  auto* e = app.add_subcommand("eval", "Evaluate backends over a command suite");
  e->add_option("--suite", ea.suite, "Suite file")->required();
  e->add_option("--backends", ea.backends, "Comma-separated backends")->delimiter(',')->capture_default_str();
  e->add_option("--replay", ea.replay_dir, "Directory of recorded transcripts, one per backend");
  e->add_option("--record", ea.record_dir, "Directory to record transcripts into");
  e->add_option("--report", ea.report, "Machine-readable report file")->capture_default_str();
  e->add_flag("--check", ea.check, "Exit nonzero when an acceptance threshold fails");
  e->add_flag("--serial", ea.serial, "Evaluate cells on one thread");
  e->add_option("--min-decomposition", ea.min_decomposition, "Decomposition rate required by --check");
  e->add_option("--min-executability", ea.min_executability, "Executability rate required by --check");

  ReplayArgs rp;
  auto* re = app.add_subcommand("replay", "Plan a command or evaluate a suite from one transcript");
  re->add_option("--transcript", rp.transcript, "Recorded transcript")->required()->check(CLI::ExistingFile);
  re->add_option("--command", rp.command, "Command text");
  re->add_option("--suite", rp.suite, "Suite file");
  re->add_option("--report", rp.report, "Machine-readable report file");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& ex) {
    err << "usage error: " << ex.what() << "\n";
    auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kUsage;
  }

  Session s(resolve(flags, env), out, err);
  CLI::App* sub = app.get_subcommands().front();
  try {
    if (sub == g) return cmd_generate(s, gen);
    if (sub == pr) return cmd_prompt(s, prompt_command);
    if (sub == p) return cmd_plan(s, pl);
    if (sub == pa) return cmd_parse(s, parse_in, parse_text);
    if (sub == r) {
      if (ra.plan_file.empty() && ra.command.empty()) throw UsageError("run needs --plan or --command");
      return cmd_run(s, ra);
    }
    if (sub == e) return cmd_eval(s, ea);
    return cmd_replay(s, rp);
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << "\n" << sub->help();
    return kUsage;
  } catch (const BackendUnavailable& ex) {
    err << "backend unavailable: " << ex.what() << "\n";
    return kBackendUnavailable;
  } catch (const BackendError& ex) {
    err << "backend unavailable: " << ex.what() << "\n";
    return kBackendUnavailable;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kError;
  }
}

}  // namespace gpsr::cli
