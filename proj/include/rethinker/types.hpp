#pragma once
// Shared domain types and the run configuration.
//
// Every module consumes these and only adds behaviour. Values are plain
// aggregates; once built they are treated as immutable and are safe to share
// across worker threads by const reference.

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rethinker {

using Json = nlohmann::json;

struct Query {
    std::string id;
    std::string text;
    std::optional<std::string> gold_answer;
    std::optional<std::string> category;

    bool operator==(const Query&) const = default;
};

enum class Role { system, user, assistant, tool };

std::string_view to_string(Role role);
Role role_from_string(std::string_view name);

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;

    bool operator==(const TokenLogprob&) const = default;
};

struct Message {
    Role role = Role::user;
    std::string content;
    std::optional<std::vector<TokenLogprob>> token_logprobs;

    bool operator==(const Message&) const = default;
};

// Reasoning stage a model call or trajectory belongs to. The first three are
// the pipeline stages proper; the rest label auxiliary calls in traces.
enum class Stage { solver, critic, selector, summary, judge, web_parse, seed };

std::string_view to_string(Stage stage);
Stage stage_from_string(std::string_view name);

enum class ToolKind { web_search, web_parse, execute_code };

std::string_view to_string(ToolKind tool);
ToolKind tool_from_string(std::string_view name);

struct ToolInvocation {
    ToolKind tool = ToolKind::execute_code;
    Json arguments = Json::object();
    std::string started_at;         // ISO-8601 UTC
    double duration_seconds = 0.0;
    std::string output_text;        // meaningful iff !error_text
    std::optional<std::string> error_text;

    bool failed() const { return error_text.has_value(); }
    bool operator==(const ToolInvocation&) const = default;
};

struct Trajectory {
    std::string query_id;
    int path_index = 0;             // 0 when not tied to a path (selector)
    Stage stage = Stage::solver;
    int round_index = 0;
    std::vector<Message> messages;
    std::vector<ToolInvocation> tool_events;
    std::optional<std::string> final_answer;
    int step_count = 0;

    bool operator==(const Trajectory&) const = default;
};

struct GuidedSummary {
    std::string trajectory_summary;
    std::optional<std::string> final_answer;   // absent <=> "null"
    std::string improvement_areas;

    bool operator==(const GuidedSummary&) const = default;
};

struct CandidateAnswer {
    int path_index = 0;                        // 1..N
    std::string answer_text;                   // verbatim <answer> content
    std::string normalized_answer;
    Trajectory source_trajectory;
    GuidedSummary summary;
    bool failed = false;
    std::string failure_reason;

    bool operator==(const CandidateAnswer&) const = default;
};

struct SelectionRecord {
    int round = 0;
    int chosen = 0;                            // original path index
    double perplexity = 1.0;                   // +inf when logprobs were unavailable
    std::string rationale_text;
    std::vector<int> presented_order;          // path indices in presented order
    bool adjudication = false;
    std::optional<std::string> verbal_confidence;

    bool operator==(const SelectionRecord&) const = default;
};

struct RunConfig {
    // Inference hyperparameters.
    double temperature = 1.0;
    double top_p_global = 1.0;
    double top_p_selector = 0.8;
    int max_agent_steps = 50;
    int n_parallel = 5;
    std::int64_t context_length_tokens = 131072;
    double top_n_sigma = 0.05;                 // stored, not consumed
    int max_output_tokens = 8192;
    int t_solver = 2;
    int t_critic = 2;
    int r_selector = 4;
    double tool_timeout_seconds = 3600.0;
    std::optional<double> ppl_gate_threshold;

    // Plumbing.
    int max_retries = 3;
    int retry_backoff_ms = 200;
    bool logprobs_for_all_calls = false;
    bool missing_logprobs_as_uninformative = false;
    bool allow_net = false;
    std::string code_interpreter = "python3";
    int query_workers = 0;                     // 0 => n_parallel

    bool operator==(const RunConfig&) const = default;
};

// Returns `config` unchanged when every invariant holds; throws ConfigError
// naming the first violated field otherwise.
RunConfig validate_config(const RunConfig& config);

// Overwrites the fields present in `patch` (keys exactly as the field names).
// Unknown keys and type mismatches throw ConfigError.
void apply_config_patch(RunConfig& config, const Json& patch);

// Reads RETHINKER_<FIELD> environment variables (e.g. RETHINKER_N_PARALLEL).
Json config_patch_from_env();

// Trajectory alternation check. Returns the first violation, if any.
std::optional<std::string> check_alternation(const Trajectory& trajectory);

void to_json(Json& j, const Query& v);
void from_json(const Json& j, Query& v);
void to_json(Json& j, const TokenLogprob& v);
void from_json(const Json& j, TokenLogprob& v);
void to_json(Json& j, const Message& v);
void from_json(const Json& j, Message& v);
void to_json(Json& j, const ToolInvocation& v);
void from_json(const Json& j, ToolInvocation& v);
void to_json(Json& j, const Trajectory& v);
void from_json(const Json& j, Trajectory& v);
void to_json(Json& j, const GuidedSummary& v);
void from_json(const Json& j, GuidedSummary& v);
void to_json(Json& j, const CandidateAnswer& v);
void from_json(const Json& j, CandidateAnswer& v);
void to_json(Json& j, const SelectionRecord& v);
void from_json(const Json& j, SelectionRecord& v);
void to_json(Json& j, const RunConfig& v);
void from_json(const Json& j, RunConfig& v);

} // namespace rethinker
