#include "mirage/cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "mirage/actor/actor.hpp"
#include "mirage/baselines/baselines.hpp"
#include "mirage/cli/config.hpp"
#include "mirage/core/instance.hpp"
#include "mirage/core/io.hpp"
#include "mirage/core/parallel.hpp"
#include "mirage/core/stats.hpp"
#include "mirage/core/text.hpp"
#include "mirage/cues/cues.hpp"
#include "mirage/forge/forge.hpp"
#include "mirage/metrics/metrics.hpp"
#include "mirage/planner/planner.hpp"
#include "mirage/retrieval/corpus.hpp"

namespace mirage::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

const std::vector<std::string> kSystems = {"no_retrieval", "naive_rag", "diva",
                                           "clarion", "clarion_no_clar", "clarion_no_clar_no_detect"};

fs::path require_path(const std::string& flag_value, const std::optional<fs::path>& from_config, const char* flag) {
  if (!flag_value.empty()) return flag_value;
  if (from_config) return *from_config;
  throw UsageError(std::string(flag) + " is required (flag or config path)");
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

std::unique_ptr<PromptLibrary> prompts_for(const RunConfig& cfg) {
  return std::make_unique<PromptLibrary>(cfg.prompts_dir ? *cfg.prompts_dir : PromptLibrary::bundled_dir());
}

std::shared_ptr<const retrieval::Corpus> corpus_for(const fs::path& passages, const RunConfig& cfg,
                                                    const retrieval::Embedder& embedder) {
  return std::make_shared<const retrieval::Corpus>(retrieval::load_corpus(passages, embedder, cfg.vectors));
}

void emit(const nlohmann::json& record, const std::string& out_path, std::ostream& out) {
  const auto text = record.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_file_atomic(out_path, text);
  }
}

provider::LlmClient required_model(ModelFactory& factory, const std::optional<ModelSpec>& spec, const char* name) {
  if (!spec) throw UsageError(std::string("config lacks models.") + name);
  return factory.make(*spec);
}

std::vector<double> read_scores(const fs::path& path) {
  const auto text = read_text_file(path);
  std::vector<double> out;
  auto take = [&](const nlohmann::json& v, const std::string& where) {
    if (v.is_number()) {
      out.push_back(v.get<double>());
    } else if (v.is_object()) {
      for (const char* key : {"score", "overall", "value"}) {
        if (v.contains(key) && v[key].is_number()) {
          out.push_back(v[key].get<double>());
          return;
        }
      }
      throw SchemaError(where, "record has no numeric score/overall/value");
    } else {
      throw SchemaError(where, "expected a number");
    }
  };
  try {
    const auto whole = nlohmann::json::parse(text);
    if (whole.is_array()) {
      for (std::size_t i = 0; i < whole.size(); ++i) take(whole[i], path.string() + "[" + std::to_string(i) + "]");
      return out;
    }
  } catch (const nlohmann::json::parse_error&) {
  }
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (mirage::trim(line).empty()) continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    try {
      take(nlohmann::json::parse(line), where);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(where, e.what());
    }
  }
  return out;
}

struct Options {
  std::string config, questions, corpus, out, dataset, ledger, system, transcripts, pred, gold, a, b, query, scorer;
  bool judge = false;
  std::size_t k = 0;
};

int cmd_forge(const Options& o, std::ostream&) {
  const auto cfg = config_or_default(o.config);
  const auto questions_path = require_path(o.questions, cfg.questions, "--questions");
  const auto corpus_path = require_path(o.corpus, cfg.corpus, "--corpus");
  const auto out_path = require_path(o.out, cfg.out, "--out");
  if (cfg.detectors.empty()) throw UsageError("config lacks models.detectors");
  if (cfg.judges.empty()) throw UsageError("config lacks models.judges");

  const auto prompts = prompts_for(cfg);
  const auto embedder = make_embedder(cfg);
  const retrieval::CorpusRetriever retriever(corpus_for(corpus_path, cfg, *embedder), embedder);
  const auto questions = load_questions(questions_path);

  ModelFactory factory(cfg.workers);
  forge::ForgeConfig fc;
  for (const auto& d : cfg.detectors) fc.detectors.push_back(factory.make(d));
  fc.generator = required_model(factory, cfg.generator, "generator");
  for (const auto& j : cfg.judges) fc.judges.push_back(factory.make(j));
  fc.top_k = cfg.top_k;
  fc.workers = cfg.workers;

  const auto result = forge::run_pipeline(questions, retriever, fc, *prompts);
  save_dataset(out_path, result.instances);
  const fs::path ledger_path = o.ledger.empty() ? fs::path(out_path.string() + ".ledger.json") : fs::path(o.ledger);
  write_file_atomic(ledger_path, forge::to_json(result.ledger).dump(2) + "\n");
  spdlog::info("forge: {} question(s) -> {} instance(s); ledger at {}", questions.size(), result.instances.size(),
               ledger_path.string());
  return kExitOk;
}

int cmd_run(const Options& o, std::ostream&) {
  const auto cfg = config_or_default(o.config);
  const auto out_path = require_path(o.out, cfg.out, "--out");

  std::vector<Question> questions;
  if (!o.dataset.empty() || (o.questions.empty() && cfg.dataset)) {
    for (auto& inst : load_dataset(require_path(o.dataset, cfg.dataset, "--dataset"))) {
      questions.push_back(std::move(inst.question));
    }
  } else {
    questions = load_questions(require_path(o.questions, cfg.questions, "--questions"));
  }

  const auto prompts = prompts_for(cfg);
  ModelFactory factory(cfg.workers);
  const auto agent = required_model(factory, cfg.agent, "agent");

  std::shared_ptr<const retrieval::Embedder> embedder;
  std::unique_ptr<retrieval::CorpusRetriever> retriever;
  if (o.system != "no_retrieval") {
    const auto corpus_path = require_path(o.corpus, cfg.corpus, "--corpus");
    embedder = make_embedder(cfg);
    retriever = std::make_unique<retrieval::CorpusRetriever>(corpus_for(corpus_path, cfg, *embedder), embedder);
  }

  std::optional<planner::Planner> planner;
  if (o.system == "clarion" || o.system == "clarion_no_clar") {
    planner.emplace(cfg.planner ? factory.make(*cfg.planner) : agent, *prompts);
  }
  actor::AgentConfig agent_cfg;
  agent_cfg.max_iterations = cfg.max_iterations;
  agent_cfg.max_searches = cfg.max_searches;
  agent_cfg.top_k = cfg.top_k;

  auto answer = [&](std::size_t i) -> PredictionRecord {
    const auto& q = questions[i];
    try {
      if (o.system == "no_retrieval") return baselines::answer_no_retrieval(q, agent, *prompts);
      if (o.system == "naive_rag") return baselines::answer_naive_rag(q, *retriever, agent, cfg.top_k, *prompts);
      if (o.system == "diva") {
        return baselines::answer_diva(q, *retriever, agent, {cfg.diva_interpretations, cfg.top_k}, *prompts);
      }
      const auto mode = o.system == "clarion"           ? actor::PlanningMode::Full
                        : o.system == "clarion_no_clar" ? actor::PlanningMode::DetectOnly
                                                        : actor::PlanningMode::Disabled;
      const actor::EpisodeContext ctx{*retriever, agent, planner ? &*planner : nullptr, mode, agent_cfg, *prompts};
      return actor::answer_clarion(q, ctx, o.system);
    } catch (const provider::AuthError&) {
      throw;
    } catch (const Error& e) {
      spdlog::warn("{} on '{}': {}", o.system, q.id, e.what());
      PredictionRecord rec;
      rec.question_id = q.id;
      rec.system = o.system;
      rec.error = e.what();
      return rec;
    }
  };
  const auto records = parallel_map(questions.size(), cfg.workers, answer);
  save_predictions(out_path, records);

  if (!o.transcripts.empty()) {
    std::vector<nlohmann::json> rows;
    for (const auto& r : records) {
      if (!r.transcript.is_object() || !r.transcript.contains("steps")) continue;
      for (auto step : r.transcript["steps"]) {
        step["question_id"] = r.question_id;
        rows.push_back(std::move(step));
      }
    }
    write_file_atomic(o.transcripts, to_jsonl(rows));
  }
  const auto failed = std::count_if(records.begin(), records.end(), [](const PredictionRecord& r) { return !r.ok(); });
  spdlog::info("run {}: {} prediction(s), {} error record(s)", o.system, records.size(), failed);
  return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto cfg = config_or_default(o.config);
  const auto predictions = load_predictions(o.pred);
  const auto gold = load_dataset(o.gold);
  const auto prompts = prompts_for(cfg);
  ModelFactory factory(cfg.workers);

  metrics::AggregateOptions opts;
  opts.prompts = prompts.get();
  std::unique_ptr<metrics::ExtractiveScorer> scorer;
  if (o.scorer == "provider") {
    scorer = std::make_unique<metrics::ProviderScorer>(required_model(factory, cfg.scorer, "scorer"), *prompts);
  } else {
    scorer = std::make_unique<metrics::LexicalScorer>();
  }
  opts.scorer = scorer.get();
  std::optional<provider::LlmClient> judge;
  if (o.judge) {
    if (cfg.eval_judge) {
      judge = factory.make(*cfg.eval_judge);
    } else if (!cfg.judges.empty()) {
      judge = factory.make(cfg.judges.front());
    } else {
      throw UsageError("--judge needs models.eval_judge or models.judges in --config");
    }
    opts.judge = &*judge;
  }
  const auto report = metrics::aggregate(predictions, gold, opts);
  auto j = metrics::to_json(report);
  j["scorer"] = scorer->name();
  emit(j, o.out, out);
  spdlog::info("eval: n={} STR-EM {:.2f} Disambig-F1 {:.2f} Avg {:.2f}", report.n, report.str_em * 100,
               report.disambig_f1 * 100, report.avg * 100);
  return kExitOk;
}

int cmd_correlate(const Options& o, std::ostream& out) {
  const auto a = read_scores(o.a);
  const auto b = read_scores(o.b);
  emit(metrics::to_json(metrics::correlations(a, b)), o.out, out);
  return kExitOk;
}

int cmd_cues(const Options& o, std::ostream& out) {
  const auto cfg = config_or_default(o.config);
  const auto corpus_path = require_path(o.corpus, cfg.corpus, "--corpus");
  const auto embedder = make_embedder(cfg);
  const retrieval::CorpusRetriever retriever(corpus_for(corpus_path, cfg, *embedder), embedder);
  const cues::HitIndex index(retriever.corpus());
  const auto k = o.k > 0 ? o.k : cfg.top_k;
  emit(cues::to_json(cues::compute_cues(o.query, retriever, index, k)), o.out, out);
  return kExitOk;
}

int cmd_stats(const Options& o, std::ostream& out) {
  const auto instances = load_dataset(o.dataset);
  emit(to_json(dataset_stats(instances)), o.out, out);
  return kExitOk;
}

int cmd_validate(const Options& o, std::ostream&) {
  const auto records = read_jsonl(o.dataset);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      (void)parse_instance(records[i]);
    } catch (const Error& e) {
      if (bad == 0) spdlog::error("record {}: {}", i + 1, e.what());
      ++bad;
    }
  }
  if (bad > 0) {
    spdlog::error("{} of {} record(s) invalid", bad, records.size());
    return kExitDataError;
  }
  spdlog::info("{} record(s) valid", records.size());
  return kExitOk;
}

void ensure_stderr_logger() {
  if (spdlog::get("mirage")) return;
  auto logger = spdlog::stderr_color_mt("mirage");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  ensure_stderr_logger();
  CLI::App app{"Ambiguity-aware multi-hop QA workbench", "mirage"};
  app.require_subcommand(1, 1);
  Options o;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* forge = app.add_subcommand("forge", "Build a dataset from questions and a corpus");
  forge->add_option("--questions", o.questions, "Question JSONL");
  forge->add_option("--corpus", o.corpus, "Passage JSONL");
  forge->add_option("--out", o.out, "Output dataset JSONL");
  forge->add_option("--config", o.config, "Run config")->required();
  forge->add_option("--ledger", o.ledger, "Stage ledger output (default <out>.ledger.json)");

  auto* run = app.add_subcommand("run", "Answer questions with one system");
  run->add_option("--system", o.system, "Answering system")->required()->check(CLI::IsMember(kSystems));
  run->add_option("--dataset", o.dataset, "Dataset JSONL (questions taken from instances)");
  run->add_option("--questions", o.questions, "Question JSONL");
  run->add_option("--corpus", o.corpus, "Passage JSONL");
  run->add_option("--out", o.out, "Prediction JSONL");
  run->add_option("--config", o.config, "Run config")->required();
  run->add_option("--transcripts", o.transcripts, "Agent step log JSONL");

  auto* eval = app.add_subcommand("eval", "Score predictions against a dataset");
  eval->add_option("--pred", o.pred, "Prediction JSONL")->required();
  eval->add_option("--gold", o.gold, "Dataset JSONL")->required();
  eval->add_option("--out", o.out, "Report file (default stdout)");
  eval->add_option("--config", o.config, "Run config (for --judge / provider scorer)");
  eval->add_flag("--judge", o.judge, "Also run the LLM judge");
  eval->add_option("--scorer", o.scorer, "Extractive scorer")->check(CLI::IsMember({"lexical", "provider"}));

  auto* correlate = app.add_subcommand("correlate", "Agreement statistics between two score lists");
  correlate->add_option("--a", o.a, "Scores (JSON array or JSONL)")->required();
  correlate->add_option("--b", o.b, "Scores (JSON array or JSONL)")->required();
  correlate->add_option("--out", o.out, "Report file (default stdout)");

  auto* cues_cmd = app.add_subcommand("cues", "General-ambiguity cues for one query");
  cues_cmd->add_option("--query", o.query, "Query text")->required();
  cues_cmd->add_option("--corpus", o.corpus, "Passage JSONL");
  cues_cmd->add_option("--config", o.config, "Run config");
  cues_cmd->add_option("--k", o.k, "Top-k snippets");
  cues_cmd->add_option("--out", o.out, "Record file (default stdout)");

  auto* stats = app.add_subcommand("stats", "Per-type dataset statistics");
  stats->add_option("--dataset", o.dataset, "Dataset JSONL")->required();
  stats->add_option("--out", o.out, "Record file (default stdout)");

  auto* validate = app.add_subcommand("validate", "Check every dataset instance");
  validate->add_option("--dataset", o.dataset, "Dataset JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (forge->parsed()) return cmd_forge(o, out);
    if (run->parsed()) return cmd_run(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (correlate->parsed()) return cmd_correlate(o, out);
    if (cues_cmd->parsed()) return cmd_cues(o, out);
    if (stats->parsed()) return cmd_stats(o, out);
    if (validate->parsed()) return cmd_validate(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace mirage::cli
