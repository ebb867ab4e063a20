#pragma once
// Run orchestration over a dataset and the run directory contract:
//
//   <out>/config.resolved.json
//   <out>/trace.jsonl
//   <out>/metrics.json, metrics.txt          (when any query has a gold)
//   <out>/runs/<query_id>/query.json
//   <out>/runs/<query_id>/path<i>/round<t>.json, summary.json | failure.json
//   <out>/runs/<query_id>/candidates.json
//   <out>/runs/<query_id>/corpus.jsonl       (solver and critic rounds)
//   <out>/runs/<query_id>/selection.json     (written last; marks completion)
//   <out>/runs/<query_id>/outcome.json       (when judged)

#include "rethinker/agent_loop.hpp"
#include "rethinker/evalkit.hpp"
#include "rethinker/judge.hpp"
#include "rethinker/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rethinker {

struct RunSummary {
    std::size_t queries = 0;
    std::size_t completed = 0;
    std::size_t skipped = 0;       // already complete on --resume
    std::vector<std::string> failed;
};

std::filesystem::path query_dir(const std::filesystem::path& out, const std::string& query_id);

// Query ids become directory names.
void check_query_ids(const std::vector<Query>& queries);

void write_json_file(const std::filesystem::path& path, const Json& j);
Json read_json_file(const std::filesystem::path& path);

// Paths, selection and judging for one query; writes its bundle. Throws on
// a query-level failure.
void run_query(const Query& q, const std::filesystem::path& out, EngineContext& engine, Judge* judge);

// Worker pool of `query_workers` (0: n_parallel) queries. With `resume`,
// queries that already have selection.json are skipped. Per-query failures
// are logged and counted; metrics are rebuilt at the end.
RunSummary run_dataset(const std::vector<Query>& queries, const std::filesystem::path& out, EngineContext& engine,
                       Judge* judge, bool resume);

// Re-runs selection for every query directory with candidates.json.
RunSummary reselect_run_dir(const std::filesystem::path& out, EngineContext& engine, Judge* judge);

struct RunEvaluation {
    std::vector<QueryOutcome> outcomes;   // run order (sorted by query id)
    std::size_t unjudged = 0;
    std::size_t without_gold = 0;
};

// Judges every completed query with a gold answer and writes outcome.json
// per query, then metrics.json / metrics.txt when anything was judged.
RunEvaluation evaluate_run_dir(const std::filesystem::path& out, Judge& judge, int max_in_flight = 4);

// Human-readable overview of a run directory.
std::string run_report_text(const std::filesystem::path& out);

} // namespace rethinker
