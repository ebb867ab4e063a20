// rethinker: command-line entry point.
//
// Exit codes: 0 success, 1 some queries/items failed, 2 configuration or
// ingestion error.

#include "rethinker/code_executor.hpp"
#include "rethinker/curation.hpp"
#include "rethinker/dataset.hpp"
#include "rethinker/errors.hpp"
#include "rethinker/evalkit.hpp"
#include "rethinker/gateway.hpp"
#include "rethinker/judge.hpp"
#include "rethinker/mock_backend.hpp"
#include "rethinker/runner.hpp"
#include "rethinker/seed_pool.hpp"
#include "rethinker/text.hpp"
#include "rethinker/trace.hpp"
#include "rethinker/web_tools.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <memory>

namespace fs = std::filesystem;
using namespace rethinker;

namespace {

constexpr const char* kConcurrencyNote = R"(
Concurrency:
  query_workers queries run at once (0 means n_parallel). Each query runs
  n_parallel reasoning paths, so up to query_workers * n_parallel agent loops
  are live. Model calls from all of them share one gateway bounded by the
  backend's in-flight limit; code executions share one sandbox pool
  (max_concurrent). Judge calls fan out at most 4 per query (eval/run) or
  max_in_flight (curate).

Configuration precedence: --set flags > RETHINKER_<FIELD> env vars >
--config file > defaults.)";

struct Options {
    std::string dataset;
    std::string config_file;
    std::string mock_script;
    std::string fixtures_dir;
    std::string out;
    std::string corpus;
    std::string curation_config;
    std::string judge = "exact";
    std::string pool;
    std::vector<std::string> sets;
    std::vector<std::string> domains;
    std::vector<std::string> texts;
    std::string log_level = "info";
    bool resume = false;
    bool live = false;
    std::uint64_t seed = 7;
    bool seed_given = false;
    std::size_t trials = 1000;
    SimulationParams sim;
};

RunConfig resolve_config(const Options& o)
{
    RunConfig config;
    if (!o.config_file.empty()) {
        std::ifstream in(o.config_file);
        if (!in) {
            throw ConfigError("config", "cannot open " + o.config_file);
        }
        auto j = Json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw ConfigError("config", o.config_file + " is not a JSON object");
        }
        apply_config_patch(config, j);
    }
    apply_config_patch(config, config_patch_from_env());
    Json patch = Json::object();
    for (const auto& kv : o.sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(kv, "--set expects key=value");
        }
        auto key = kv.substr(0, eq);
        auto value = kv.substr(eq + 1);
        auto parsed = Json::parse(value, nullptr, false);
        patch[key] = parsed.is_discarded() ? Json(value) : parsed;
    }
    apply_config_patch(config, patch);
    return validate_config(config);
}

// Everything a model-driven subcommand needs, owned in one place.
struct Engine {
    std::shared_ptr<Backend> backend;
    std::unique_ptr<Gateway> gateway;
    std::unique_ptr<TraceWriter> trace;
    std::unique_ptr<WebTools> web;
    std::unique_ptr<CodeExecutor> executor;
    std::unique_ptr<EngineContext> ctx;
    std::unique_ptr<Judge> judge;
};

Engine build_engine(const Options& o, const RunConfig& config, const fs::path& trace_path)
{
    if (o.live == !o.mock_script.empty()) {
        throw ConfigError("backend", "choose exactly one of --mock-script and --live");
    }
    Engine e;
    if (o.live) {
        e.backend = std::make_shared<HttpBackend>(HttpBackendConfig::from_env());
    } else {
        e.backend = std::make_shared<MockBackend>(load_mock_script(o.mock_script));
    }
    e.gateway = std::make_unique<Gateway>(e.backend, config);
    if (!trace_path.empty()) {
        fs::create_directories(trace_path.parent_path());
        e.trace = std::make_unique<TraceWriter>(trace_path);
    }
    WebToolsConfig web;
    if (!o.fixtures_dir.empty()) {
        web = WebToolsConfig::replay(o.fixtures_dir);
    } else if (o.live) {
        web = WebToolsConfig::live_from_env();
    }
    e.web = std::make_unique<WebTools>(web, e.gateway.get());
    e.executor = std::make_unique<CodeExecutor>(ExecutorConfig::from_run_config(config), e.web.get(), e.trace.get());
    e.ctx = std::make_unique<EngineContext>(EngineContext{*e.gateway, *e.executor, e.trace.get()});
    if (o.judge == "llm") {
        e.judge = std::make_unique<LlmJudge>(*e.gateway, e.trace.get());
    } else {
        e.judge = std::make_unique<ExactMatchJudge>();
    }
    return e;
}

int report_summary(const RunSummary& s)
{
    std::cout << "queries " << s.queries << "  completed " << s.completed << "  skipped " << s.skipped
              << "  failed " << s.failed.size() << "\n";
    for (const auto& id : s.failed) {
        std::cout << "  failed: " << id << "\n";
    }
    return s.failed.empty() ? 0 : 1;
}

int cmd_run(const Options& o)
{
    auto config = resolve_config(o);
    auto queries = load_dataset(o.dataset);
    check_query_ids(queries);
    const fs::path out = o.out;
    fs::create_directories(out);
    if (!o.resume) {
        std::error_code ec;
        fs::remove(out / "trace.jsonl", ec);
    }
    auto engine = build_engine(o, config, out / "trace.jsonl");
    return report_summary(run_dataset(queries, out, *engine.ctx, engine.judge.get(), o.resume));
}

int cmd_select(const Options& o)
{
    auto config = resolve_config(o);
    auto engine = build_engine(o, config, fs::path(o.out) / "trace.jsonl");
    return report_summary(reselect_run_dir(o.out, *engine.ctx, engine.judge.get()));
}

std::unique_ptr<Judge> offline_or_llm_judge(const Options& o, Engine& holder)
{
    if (o.judge != "llm") {
        return std::make_unique<ExactMatchJudge>();
    }
    holder = build_engine(o, resolve_config(o), o.out.empty() ? fs::path{} : fs::path(o.out) / "trace.jsonl");
    return std::move(holder.judge);
}

int cmd_eval(const Options& o)
{
    Engine holder;
    auto judge = offline_or_llm_judge(o, holder);
    auto ev = evaluate_run_dir(o.out, *judge);
    if (ev.outcomes.empty()) {
        std::cout << "no judged queries (" << ev.without_gold << " without gold, " << ev.unjudged << " unjudged)\n";
        return ev.unjudged ? 1 : 0;
    }
    std::cout << eval_report_table(build_eval_report(ev.outcomes, ev.unjudged));
    return ev.unjudged ? 1 : 0;
}

std::vector<CorpusItem> load_corpus_input(const fs::path& path)
{
    if (!fs::is_directory(path)) {
        return load_corpus(path);
    }
    // A run directory: concatenate every query's corpus.jsonl.
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path / "runs")) {
        if (fs::exists(e.path() / "corpus.jsonl")) {
            files.push_back(e.path() / "corpus.jsonl");
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<CorpusItem> items;
    for (const auto& f : files) {
        auto part = load_corpus(f);
        items.insert(items.end(), part.begin(), part.end());
    }
    return items;
}

int cmd_curate(const Options& o)
{
    CurationConfig cc;
    if (!o.curation_config.empty()) {
        std::ifstream in(o.curation_config);
        auto j = Json::parse(in, nullptr, false);
        if (!in || j.is_discarded()) {
            throw ConfigError("curation-config", "cannot read JSON from " + o.curation_config);
        }
        cc = curation_config_from_json(j);
    }
    if (o.seed_given) {
        cc.seed = o.seed;
    }
    validate_curation_config(cc);
    auto corpus = load_corpus_input(o.corpus);

    Engine holder;
    auto judge = offline_or_llm_judge(o, holder);
    auto result = curate(corpus, cc, *judge);

    const fs::path out = o.out;
    fs::create_directories(out);
    {
        std::ofstream ds(out / "dataset.jsonl", std::ios::binary | std::ios::trunc);
        for (const auto& s : result.dataset) {
            ds << dataset_row(s).dump() << '\n';
        }
        std::ofstream q(out / "quarantine.jsonl", std::ios::binary | std::ios::trunc);
        for (const auto& item : result.quarantined) {
            q << corpus_row(item).dump() << '\n';
        }
    }
    write_json_file(out / "curation_report.json", curation_report_json(result.report));
    const auto& r = result.report;
    std::cout << "input " << r.input << "  kept " << r.kept << "  rejected " << r.rejected << "  quarantined "
              << r.quarantined << "\n";
    for (const auto& s : r.stages) {
        std::cout << "  " << s.name << ": in " << s.input << "  kept " << s.kept << "  rejected " << s.rejected
                  << "  quarantined " << s.quarantined << "\n";
    }
    return 0;
}

int cmd_synth_seeds(const Options& o)
{
    auto config = resolve_config(o);
    const fs::path pool_path = o.out;
    auto engine = build_engine(o, config, pool_path.has_parent_path() ? pool_path.parent_path() / "seed_trace.jsonl"
                                                                      : fs::path("seed_trace.jsonl"));
    SeedPool pool;
    if (!o.pool.empty()) {
        pool = SeedPool::from_json(read_json_file(o.pool));
    }
    if (!o.domains.empty()) {
        pool.merge(init_seed_pool(o.domains, *engine.gateway, engine.trace.get()).phrases());
    }
    for (const auto& file : o.texts) {
        std::ifstream in(file, std::ios::binary);
        if (!in) {
            throw ConfigError("text", "cannot read " + file);
        }
        std::stringstream buf;
        buf << in.rdbuf();
        auto added = pool.merge(extract_seed_phrases(buf.str(), *engine.gateway, engine.trace.get()));
        spdlog::info("{}: {} new phrases", file, added);
    }
    if (pool_path.has_parent_path()) {
        fs::create_directories(pool_path.parent_path());
    }
    write_json_file(pool_path, pool.to_json());
    std::cout << "pool size " << pool.size() << "\n";
    return 0;
}

int cmd_simulate(const Options& o)
{
    auto report = simulate_ppl_guidance(o.trials, o.seed, o.sim);
    if (!o.out.empty()) {
        const fs::path out = o.out;
        fs::create_directories(out);
        write_json_file(out / "simulation.json", simulation_report_json(report));
        std::ofstream(out / "simulation.txt", std::ios::binary | std::ios::trunc) << simulation_report_table(report);
    }
    std::cout << simulation_report_table(report);
    return 0;
}

int cmd_report(const Options& o)
{
    std::cout << run_report_text(o.out);
    return 0;
}

void add_backend_flags(CLI::App* sub, Options& o)
{
    sub->add_option("--config", o.config_file, "JSON file with RunConfig fields")->check(CLI::ExistingFile);
    sub->add_option("--mock-script", o.mock_script, "Scripted mock backend (JSONL rules)")->check(CLI::ExistingFile);
    sub->add_flag("--live", o.live, "Use the HTTP backend and live web tools (credentials from env)");
    sub->add_option("--fixtures-dir", o.fixtures_dir, "Replay web tool results from this directory");
    sub->add_option("--set", o.sets, "Override a config field: key=value (repeatable)");
}

void add_judge_flag(CLI::App* sub, Options& o)
{
    sub->add_option("--judge", o.judge, "Verdict source: exact (offline) or llm")
        ->check(CLI::IsMember({"exact", "llm"}));
}

} // namespace

int main(int argc, char** argv)
{
    spdlog::set_default_logger(spdlog::stderr_color_mt("rethinker"));

    CLI::App app{"Multi-path reasoning engine: run, select, curate, evaluate."};
    app.footer(kConcurrencyNote);
    app.require_subcommand(1, 1);
    Options o;
    app.add_option("--log-level", o.log_level, "trace, debug, info, warn, error, off");

    auto* run = app.add_subcommand("run", "Reason over a dataset and select an answer per query");
    run->add_option("--dataset", o.dataset, "Query JSONL")->required()->check(CLI::ExistingFile);
    run->add_option("--out", o.out, "Run directory")->required();
    run->add_flag("--resume", o.resume, "Skip queries that already have selection.json");
    add_backend_flags(run, o);
    add_judge_flag(run, o);

    auto* sel = app.add_subcommand("select", "Re-run selection over an existing run directory");
    sel->add_option("--out", o.out, "Run directory")->required()->check(CLI::ExistingDirectory);
    add_backend_flags(sel, o);
    add_judge_flag(sel, o);

    auto* cur = app.add_subcommand("curate", "Filter a trajectory corpus into an SFT dataset");
    cur->add_option("--corpus,--dataset", o.corpus, "Corpus JSONL or a run directory")->required()->check(
        CLI::ExistingPath);
    cur->add_option("--out", o.out, "Output directory")->required();
    cur->add_option("--curation-config", o.curation_config, "JSON curation settings")->check(CLI::ExistingFile);
    auto* cur_seed = cur->add_option("--seed", o.seed, "Rebalancing seed");
    add_backend_flags(cur, o);
    add_judge_flag(cur, o);

    auto* ev = app.add_subcommand("eval", "Judge a run directory and write metrics");
    ev->add_option("--out", o.out, "Run directory")->required()->check(CLI::ExistingDirectory);
    add_backend_flags(ev, o);
    add_judge_flag(ev, o);

    auto* seeds = app.add_subcommand("synth-seeds", "Build or grow a seed-phrase pool");
    seeds->add_option("--domain", o.domains, "Domain to initialize (repeatable)");
    seeds->add_option("--text", o.texts, "Text file to extract phrases from (repeatable)")->check(CLI::ExistingFile);
    seeds->add_option("--pool", o.pool, "Existing pool JSON to extend")->check(CLI::ExistingFile);
    seeds->add_option("--out", o.out, "Pool JSON to write")->required();
    add_backend_flags(seeds, o);

    auto* sim = app.add_subcommand("simulate", "Synthetic study of perplexity-guided re-selection");
    sim->add_option("--trials", o.trials, "Number of trials")->check(CLI::PositiveNumber);
    sim->add_option("--seed", o.seed, "RNG seed");
    sim->add_option("--rounds", o.sim.rounds, "Re-selection rounds after round 0")->check(CLI::NonNegativeNumber);
    sim->add_option("--candidates", o.sim.candidates, "Candidates per trial")->check(CLI::Range(2, 1000));
    sim->add_option("--noise", o.sim.noise, "How fast correctness decays with perplexity (0: always correct)")
        ->check(CLI::NonNegativeNumber);
    sim->add_option("--distractor-bias", o.sim.distractor_bias, "Share of wrong picks going to the distractor")
        ->check(CLI::Range(0.0, 1.0));
    sim->add_option("--out", o.out, "Directory for simulation.json / simulation.txt");

    auto* rep = app.add_subcommand("report", "Summarize a run directory");
    rep->add_option("--out", o.out, "Run directory")->required()->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    spdlog::set_level(spdlog::level::from_str(o.log_level));
    o.seed_given = cur_seed->count() > 0;

    try {
        if (*run) return cmd_run(o);
        if (*sel) return cmd_select(o);
        if (*cur) return cmd_curate(o);
        if (*ev) return cmd_eval(o);
        if (*seeds) return cmd_synth_seeds(o);
        if (*sim) return cmd_simulate(o);
        if (*rep) return cmd_report(o);
    } catch (const ConfigError& e) {
        spdlog::error("configuration: {}", e.what());
        return 2;
    } catch (const ParseError& e) {
        spdlog::error("ingestion: {}", e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
