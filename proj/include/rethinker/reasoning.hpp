#pragma once
// Multi-path Solver / Summary / Critic generation.
//
// Every round is a fresh context carrying only the previous round's extracted
// answer. Paths run concurrently and share nothing but the gateway, the
// executor and the trace.

#include "rethinker/agent_loop.hpp"
#include "rethinker/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rethinker {

struct PathResult {
    int path_index = 0;
    std::vector<Trajectory> solver_rounds;
    Trajectory summary_exchange;     // the summary call(s), for the bundle
    GuidedSummary summary;
    std::vector<Trajectory> critic_rounds;
    CandidateAnswer final_candidate;
};

// Last <answer> region of the final assistant message; if that message has
// none, the last region in any assistant message; absent otherwise.
std::optional<std::string> extract_answer(const Trajectory& trajectory);

// Maps "Part 1/2/3" sections by heading (any order). Part 2 "null" (or an
// empty <answer>) means no answer. Absent when a section is missing or empty.
std::optional<GuidedSummary> parse_guided_summary(std::string_view text);

// Plain-text transcript of a trajectory after its opening prompt.
std::string render_transcript(const Trajectory& trajectory);

// The three-part summary as shown to the critic.
std::string render_summary_for_critic(const GuidedSummary& summary);

std::vector<Trajectory> run_solver(const Query& q, int path_index, EngineContext& engine);

// One generation; one corrective re-prompt when the reply does not parse.
// Throws Error when it still does not parse.
GuidedSummary summarize(const Query& q, const Trajectory& last_solver_round, int path_index,
                        EngineContext& engine, Trajectory* exchange = nullptr);

std::vector<Trajectory> run_critic(const Query& q, const GuidedSummary& summary, int path_index,
                                   EngineContext& engine);

// Solver rounds, summary, critic rounds. Throws on backend failure and when
// the last critic round has no answer.
PathResult run_path(const Query& q, int path_index, EngineContext& engine);

struct PathsOutcome {
    std::vector<PathResult> paths;            // successful paths only
    std::vector<CandidateAnswer> candidates;  // length n_parallel, failed ones flagged
};

PathsOutcome run_paths(const Query& q, EngineContext& engine);

// runs/<query_id>/path<i>/round<t>.json plus summary.json per path. Round
// files are numbered consecutively: solver rounds first, then critic rounds.
void write_path_bundle(const std::filesystem::path& query_dir, const PathsOutcome& outcome);

} // namespace rethinker
