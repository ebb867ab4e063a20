#include "rethinker/runner.hpp"

#include "rethinker/curation.hpp"
#include "rethinker/errors.hpp"
#include "rethinker/reasoning.hpp"
#include "rethinker/selector.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace rethinker {

namespace fs = std::filesystem;

fs::path query_dir(const fs::path& out, const std::string& query_id)
{
    return out / "runs" / query_id;
}

void check_query_ids(const std::vector<Query>& queries)
{
    std::set<std::string> seen;
    for (const auto& q : queries) {
        if (q.id.empty() || q.id == "." || q.id == ".." || q.id.find_first_of("/\\") != std::string::npos) {
            throw ConfigError("id", "query id '" + q.id + "' cannot be used as a directory name");
        }
        if (!seen.insert(q.id).second) {
            throw ConfigError("id", "duplicate query id '" + q.id + "'");
        }
    }
}

void write_json_file(const fs::path& path, const Json& j)
{
    // Write-then-rename so a crash never leaves a truncated completion marker.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + tmp.string());
        }
        out << j.dump(2) << '\n';
        if (!out) {
            throw Error("short write to " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

Json read_json_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot read " + path.string());
    }
    auto j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) {
        throw ParseError(0, path.string() + " is not valid JSON");
    }
    return j;
}

namespace {

void write_corpus(const fs::path& path, const Query& q, const PathsOutcome& paths)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    for (const auto& p : paths.paths) {
        int t = 0;
        auto emit = [&](const Trajectory& traj) {
            CorpusItem item;
            item.id = q.id + "/path" + std::to_string(p.path_index) + "/round" + std::to_string(t++);
            item.question = q.text;
            item.gold = q.gold_answer;
            item.stage = traj.stage;
            item.trajectory = traj;
            out << corpus_row(item).dump() << '\n';
        };
        for (const auto& r : p.solver_rounds) {
            emit(r);
        }
        for (const auto& r : p.critic_rounds) {
            emit(r);
        }
    }
}

void select_and_finish(const Query& q, const std::vector<CandidateAnswer>& candidates, const fs::path& dir,
                       EngineContext& engine, Judge* judge)
{
    auto outcome = select(q, candidates, engine);
    std::error_code ec;
    fs::remove(dir / "outcome.json", ec);
    if (judge && q.gold_answer) {
        if (auto judged = judge_query(q, candidates, outcome.winner.path_index, *judge)) {
            write_json_file(dir / "outcome.json", Json{{"query_id", judged->query_id},
                                                       {"category", q.category ? Json(*q.category) : Json(nullptr)},
                                                       {"candidate_correct", judged->candidate_correct},
                                                       {"selector_correct", judged->selector_correct},
                                                       {"k_correct", judged->k_correct}});
        } else {
            spdlog::warn("query {}: left unjudged (no verdict for every candidate)", q.id);
        }
    }
    write_json_file(dir / "selection.json", selection_report(q, candidates, outcome));
}

std::optional<QueryOutcome> read_outcome(const fs::path& path)
{
    if (!fs::exists(path)) {
        return std::nullopt;
    }
    auto j = read_json_file(path);
    std::optional<std::string> category;
    if (j.contains("category") && !j["category"].is_null()) {
        category = j["category"].get<std::string>();
    }
    return make_outcome(j.at("query_id").get<std::string>(), j.at("candidate_correct").get<std::vector<bool>>(),
                        j.at("selector_correct").get<bool>(), category);
}

std::vector<fs::path> query_dirs(const fs::path& out)
{
    std::vector<fs::path> dirs;
    if (!fs::is_directory(out / "runs")) {
        return dirs;
    }
    for (const auto& e : fs::directory_iterator(out / "runs")) {
        if (e.is_directory() && fs::exists(e.path() / "query.json")) {
            dirs.push_back(e.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

void write_metrics(const fs::path& out, const std::vector<QueryOutcome>& outcomes, std::size_t unjudged)
{
    if (outcomes.empty()) {
        return;
    }
    auto report = build_eval_report(outcomes, unjudged);
    write_json_file(out / "metrics.json", eval_report_json(report));
    std::ofstream txt(out / "metrics.txt", std::ios::binary | std::ios::trunc);
    txt << eval_report_table(report);
}

// Metrics from the outcome files already on disk.
void collect_metrics(const fs::path& out)
{
    std::vector<QueryOutcome> outcomes;
    std::size_t unjudged = 0;
    for (const auto& dir : query_dirs(out)) {
        if (!fs::exists(dir / "selection.json")) {
            continue;
        }
        auto q = read_json_file(dir / "query.json").get<Query>();
        if (auto o = read_outcome(dir / "outcome.json")) {
            outcomes.push_back(std::move(*o));
        } else if (q.gold_answer) {
            ++unjudged;
        }
    }
    write_metrics(out, outcomes, unjudged);
}

template <typename Fn>
void run_pool(std::size_t n, int workers, Fn fn)
{
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            fn(i);
        }
    };
    std::vector<std::thread> threads;
    const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
    for (std::size_t t = 1; t < count; ++t) {
        threads.emplace_back(body);
    }
    body();
    for (auto& t : threads) {
        t.join();
    }
}

int worker_count(const RunConfig& config)
{
    return config.query_workers > 0 ? config.query_workers : config.n_parallel;
}

} // namespace

void run_query(const Query& q, const fs::path& out, EngineContext& engine, Judge* judge)
{
    const auto dir = query_dir(out, q.id);
    std::error_code ec;
    fs::remove_all(dir, ec);
    fs::create_directories(dir);
    write_json_file(dir / "query.json", q);

    auto paths = run_paths(q, engine);
    write_path_bundle(dir, paths);
    write_json_file(dir / "candidates.json", paths.candidates);
    write_corpus(dir / "corpus.jsonl", q, paths);
    select_and_finish(q, paths.candidates, dir, engine, judge);
}

RunSummary run_dataset(const std::vector<Query>& queries, const fs::path& out, EngineContext& engine, Judge* judge,
                       bool resume)
{
    check_query_ids(queries);
    fs::create_directories(out / "runs");
    write_json_file(out / "config.resolved.json", engine.gateway.config());

    RunSummary summary;
    summary.queries = queries.size();
    std::vector<const Query*> todo;
    for (const auto& q : queries) {
        if (resume && fs::exists(query_dir(out, q.id) / "selection.json")) {
            ++summary.skipped;
            continue;
        }
        todo.push_back(&q);
    }
    if (summary.skipped) {
        spdlog::info("resume: {} of {} queries already complete", summary.skipped, queries.size());
    }

    std::mutex mu;
    std::vector<std::pair<std::size_t, std::string>> failed;
    run_pool(todo.size(), worker_count(engine.gateway.config()), [&](std::size_t i) {
        const auto& q = *todo[i];
        try {
            run_query(q, out, engine, judge);
            std::lock_guard lock(mu);
            ++summary.completed;
        } catch (const std::exception& e) {
            spdlog::error("query {} failed: {}", q.id, e.what());
            std::lock_guard lock(mu);
            failed.emplace_back(i, q.id);
        }
    });
    std::sort(failed.begin(), failed.end());
    for (auto& [i, id] : failed) {
        summary.failed.push_back(std::move(id));
    }
    if (engine.trace) {
        engine.trace->flush();
    }
    collect_metrics(out);
    return summary;
}

RunSummary reselect_run_dir(const fs::path& out, EngineContext& engine, Judge* judge)
{
    std::vector<fs::path> dirs;
    for (const auto& dir : query_dirs(out)) {
        if (fs::exists(dir / "candidates.json")) {
            dirs.push_back(dir);
        }
    }
    RunSummary summary;
    summary.queries = dirs.size();
    std::mutex mu;
    run_pool(dirs.size(), worker_count(engine.gateway.config()), [&](std::size_t i) {
        const auto& dir = dirs[i];
        try {
            auto q = read_json_file(dir / "query.json").get<Query>();
            auto candidates = read_json_file(dir / "candidates.json").get<std::vector<CandidateAnswer>>();
            select_and_finish(q, candidates, dir, engine, judge);
            std::lock_guard lock(mu);
            ++summary.completed;
        } catch (const std::exception& e) {
            spdlog::error("{}: selection failed: {}", dir.filename().string(), e.what());
            std::lock_guard lock(mu);
            summary.failed.push_back(dir.filename().string());
        }
    });
    std::sort(summary.failed.begin(), summary.failed.end());
    if (engine.trace) {
        engine.trace->flush();
    }
    collect_metrics(out);
    return summary;
}

RunEvaluation evaluate_run_dir(const fs::path& out, Judge& judge, int max_in_flight)
{
    RunEvaluation ev;
    for (const auto& dir : query_dirs(out)) {
        if (!fs::exists(dir / "selection.json")) {
            continue;
        }
        auto q = read_json_file(dir / "query.json").get<Query>();
        if (!q.gold_answer) {
            ++ev.without_gold;
            continue;
        }
        auto candidates = read_json_file(dir / "candidates.json").get<std::vector<CandidateAnswer>>();
        auto selection = read_json_file(dir / "selection.json");
        const int winner = selection.at("winner").at("path_index").get<int>();
        auto judged = judge_query(q, candidates, winner, judge, max_in_flight);
        std::error_code ec;
        fs::remove(dir / "outcome.json", ec);
        if (!judged) {
            ++ev.unjudged;
            continue;
        }
        write_json_file(dir / "outcome.json", Json{{"query_id", judged->query_id},
                                                   {"category", q.category ? Json(*q.category) : Json(nullptr)},
                                                   {"candidate_correct", judged->candidate_correct},
                                                   {"selector_correct", judged->selector_correct},
                                                   {"k_correct", judged->k_correct}});
        ev.outcomes.push_back(std::move(*judged));
    }
    write_metrics(out, ev.outcomes, ev.unjudged);
    return ev;
}

std::string run_report_text(const fs::path& out)
{
    std::ostringstream s;
    auto dirs = query_dirs(out);
    s << "run " << out.string() << ": " << dirs.size() << " queries\n";
    s << "query  winner  rounds  adjudication  fallback  answer\n";
    for (const auto& dir : dirs) {
        s << dir.filename().string() << "  ";
        if (!fs::exists(dir / "selection.json")) {
            s << "(incomplete)\n";
            continue;
        }
        auto sel = read_json_file(dir / "selection.json");
        s << sel["winner"]["path_index"].get<int>() << "  " << sel["records"].size() << "  "
          << (sel["adjudication"].get<bool>() ? "yes" : "no") << "  " << (sel["fallback"].get<bool>() ? "yes" : "no")
          << "  " << sel["winner"]["normalized_answer"].get<std::string>() << "\n";
    }
    if (fs::exists(out / "metrics.txt")) {
        std::ifstream in(out / "metrics.txt");
        s << "\n" << in.rdbuf();
    }
    return s.str();
}

} // namespace rethinker
