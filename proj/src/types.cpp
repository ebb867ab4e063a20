#include "rethinker/types.hpp"

#include "rethinker/errors.hpp"
#include "rethinker/text.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <utility>

namespace rethinker {

namespace {

constexpr std::array<std::pair<Role, std::string_view>, 4> kRoles{{
    {Role::system, "system"},
    {Role::user, "user"},
    {Role::assistant, "assistant"},
    {Role::tool, "tool"},
}};

constexpr std::array<std::pair<Stage, std::string_view>, 7> kStages{{
    {Stage::solver, "solver"},
    {Stage::critic, "critic"},
    {Stage::selector, "selector"},
    {Stage::summary, "summary"},
    {Stage::judge, "judge"},
    {Stage::web_parse, "web_parse"},
    {Stage::seed, "seed"},
}};

constexpr std::array<std::pair<ToolKind, std::string_view>, 3> kTools{{
    {ToolKind::web_search, "web_search"},
    {ToolKind::web_parse, "web_parse"},
    {ToolKind::execute_code, "execute_code"},
}};

template <typename Table, typename E>
std::string_view lookup_name(const Table& table, E value)
{
    for (const auto& [v, name] : table) {
        if (v == value) {
            return name;
        }
    }
    return "?";
}

template <typename E, typename Table>
E lookup_value(const Table& table, std::string_view name, const char* what)
{
    for (const auto& [v, n] : table) {
        if (n == name) {
            return v;
        }
    }
    throw ParseError(0, std::string("unknown ") + what + " '" + std::string(name) + "'");
}

bool has_code_block(const Message& m)
{
    return !scan_tag_regions(m.content, "<code>", "</code>").regions.empty();
}

bool is_execution_feedback(const Message& m)
{
    return m.role == Role::user && m.content.starts_with("Execution results:");
}

} // namespace

std::string_view to_string(Role role) { return lookup_name(kRoles, role); }
Role role_from_string(std::string_view name) { return lookup_value<Role>(kRoles, name, "role"); }
std::string_view to_string(Stage stage) { return lookup_name(kStages, stage); }
Stage stage_from_string(std::string_view name) { return lookup_value<Stage>(kStages, name, "stage"); }
std::string_view to_string(ToolKind tool) { return lookup_name(kTools, tool); }
ToolKind tool_from_string(std::string_view name) { return lookup_value<ToolKind>(kTools, name, "tool"); }

RunConfig validate_config(const RunConfig& c)
{
    auto count = [](const char* field, std::int64_t v) {
        if (v < 1) {
            throw ConfigError(field, "counts >= 1 (got " + std::to_string(v) + ")");
        }
    };
    auto probability = [](const char* field, double v) {
        if (!(v > 0.0 && v <= 1.0)) {
            throw ConfigError(field, "probabilities in (0,1] (got " + format_fixed(v, 4) + ")");
        }
    };
    if (!(c.temperature >= 0.0) || !std::isfinite(c.temperature)) {
        throw ConfigError("temperature", "must be >= 0");
    }
    probability("top_p_global", c.top_p_global);
    probability("top_p_selector", c.top_p_selector);
    count("max_agent_steps", c.max_agent_steps);
    count("n_parallel", c.n_parallel);
    count("context_length_tokens", c.context_length_tokens);
    if (!(c.top_n_sigma >= 0.0)) {
        throw ConfigError("top_n_sigma", "must be >= 0");
    }
    count("max_output_tokens", c.max_output_tokens);
    count("t_solver", c.t_solver);
    count("t_critic", c.t_critic);
    count("r_selector", c.r_selector);
    if (!(c.tool_timeout_seconds > 0.0)) {
        throw ConfigError("tool_timeout_seconds", "must be > 0");
    }
    if (c.ppl_gate_threshold && !(*c.ppl_gate_threshold > 0.0)) {
        throw ConfigError("ppl_gate_threshold", "must be > 0 when set");
    }
    if (c.max_retries < 0) {
        throw ConfigError("max_retries", "must be >= 0");
    }
    if (c.retry_backoff_ms < 0) {
        throw ConfigError("retry_backoff_ms", "must be >= 0");
    }
    if (c.code_interpreter.empty()) {
        throw ConfigError("code_interpreter", "must be non-empty");
    }
    if (c.query_workers < 0) {
        throw ConfigError("query_workers", "must be >= 0");
    }
    return c;
}

void apply_config_patch(RunConfig& config, const Json& patch)
{
    if (!patch.is_object()) {
        throw ConfigError("<root>", "config must be a JSON object");
    }
    Json full = config;
    for (const auto& [key, value] : patch.items()) {
        if (!full.contains(key)) {
            throw ConfigError(key, "unknown configuration key");
        }
        const Json& current = full[key];
        bool ok = false;
        if (key == "ppl_gate_threshold") {
            ok = value.is_null() || value.is_number();
        } else if (current.is_boolean()) {
            ok = value.is_boolean();
        } else if (current.is_number_integer()) {
            ok = value.is_number_integer();
        } else if (current.is_number()) {
            ok = value.is_number();
        } else if (current.is_string()) {
            ok = value.is_string();
        }
        if (!ok) {
            throw ConfigError(key, "wrong type for value " + value.dump());
        }
        full[key] = value;
    }
    from_json(full, config);
}

Json config_patch_from_env()
{
    Json patch = Json::object();
    Json defaults = RunConfig{};
    for (const auto& [key, value] : defaults.items()) {
        std::string var = "RETHINKER_";
        for (char ch : key) {
            var += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        }
        const char* raw = std::getenv(var.c_str());
        if (!raw) {
            continue;
        }
        if (value.is_string()) {
            patch[key] = std::string(raw);
            continue;
        }
        auto parsed = Json::parse(raw, nullptr, false);
        if (parsed.is_discarded()) {
            throw ConfigError(key, "cannot parse " + var + "='" + raw + "'");
        }
        patch[key] = parsed;
    }
    return patch;
}

std::optional<std::string> check_alternation(const Trajectory& t)
{
    for (std::size_t i = 0; i < t.messages.size(); ++i) {
        const auto& m = t.messages[i];
        if (m.role == Role::assistant && trim(m.content).empty()) {
            return "empty assistant message at index " + std::to_string(i);
        }
        if (m.role == Role::tool || is_execution_feedback(m)) {
            if (i == 0 || t.messages[i - 1].role != Role::assistant ||
                !has_code_block(t.messages[i - 1])) {
                return "tool feedback at index " + std::to_string(i) +
                       " does not follow an assistant code message";
            }
        }
    }
    return std::nullopt;
}

// ---- JSON ----------------------------------------------------------------

namespace {

template <typename T>
void put_optional(Json& j, const char* key, const std::optional<T>& v)
{
    if (v) {
        j[key] = *v;
    } else {
        j[key] = nullptr;
    }
}

template <typename T>
std::optional<T> get_optional(const Json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null()) {
        return std::nullopt;
    }
    return j.at(key).get<T>();
}

// Perplexity may be +inf; JSON has no infinity, so it is stored as null.
void put_real(Json& j, const char* key, double v)
{
    if (std::isfinite(v)) {
        j[key] = v;
    } else {
        j[key] = nullptr;
    }
}

double get_real(const Json& j, const char* key)
{
    const auto& v = j.at(key);
    return v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

} // namespace

void to_json(Json& j, const Query& v)
{
    j = Json{{"id", v.id}, {"question", v.text}};
    if (v.gold_answer) {
        j["answer"] = *v.gold_answer;
    }
    if (v.category) {
        j["category"] = *v.category;
    }
}

void from_json(const Json& j, Query& v)
{
    v.id = j.at("id").get<std::string>();
    v.text = j.at("question").get<std::string>();
    v.gold_answer = get_optional<std::string>(j, "answer");
    v.category = get_optional<std::string>(j, "category");
}

void to_json(Json& j, const TokenLogprob& v) { j = Json{{"token", v.token}, {"logprob", v.logprob}}; }

void from_json(const Json& j, TokenLogprob& v)
{
    v.token = j.at("token").get<std::string>();
    v.logprob = j.at("logprob").get<double>();
}

void to_json(Json& j, const Message& v)
{
    j = Json{{"role", to_string(v.role)}, {"content", v.content}};
    if (v.token_logprobs) {
        j["token_logprobs"] = *v.token_logprobs;
    }
}

void from_json(const Json& j, Message& v)
{
    v.role = role_from_string(j.at("role").get<std::string>());
    v.content = j.at("content").get<std::string>();
    v.token_logprobs = get_optional<std::vector<TokenLogprob>>(j, "token_logprobs");
}

void to_json(Json& j, const ToolInvocation& v)
{
    j = Json{{"tool_name", to_string(v.tool)},
             {"arguments", v.arguments},
             {"started_at", v.started_at},
             {"duration", v.duration_seconds},
             {"output_text", v.output_text}};
    put_optional(j, "error_text", v.error_text);
}

void from_json(const Json& j, ToolInvocation& v)
{
    v.tool = tool_from_string(j.at("tool_name").get<std::string>());
    v.arguments = j.value("arguments", Json::object());
    v.started_at = j.value("started_at", std::string{});
    v.duration_seconds = j.value("duration", 0.0);
    v.output_text = j.value("output_text", std::string{});
    v.error_text = get_optional<std::string>(j, "error_text");
}

void to_json(Json& j, const Trajectory& v)
{
    j = Json{{"query_id", v.query_id},
             {"path_index", v.path_index},
             {"stage", to_string(v.stage)},
             {"round_index", v.round_index},
             {"messages", v.messages},
             {"tool_events", v.tool_events},
             {"step_count", v.step_count}};
    put_optional(j, "final_answer", v.final_answer);
}

void from_json(const Json& j, Trajectory& v)
{
    v.query_id = j.at("query_id").get<std::string>();
    v.path_index = j.value("path_index", 0);
    v.stage = stage_from_string(j.value("stage", std::string("solver")));
    v.round_index = j.value("round_index", 0);
    v.messages = j.at("messages").get<std::vector<Message>>();
    v.tool_events = j.value("tool_events", std::vector<ToolInvocation>{});
    v.step_count = j.value("step_count", 0);
    v.final_answer = get_optional<std::string>(j, "final_answer");
}

void to_json(Json& j, const GuidedSummary& v)
{
    j = Json{{"trajectory_summary", v.trajectory_summary},
             {"improvement_areas", v.improvement_areas}};
    put_optional(j, "final_answer", v.final_answer);
}

void from_json(const Json& j, GuidedSummary& v)
{
    v.trajectory_summary = j.at("trajectory_summary").get<std::string>();
    v.improvement_areas = j.at("improvement_areas").get<std::string>();
    v.final_answer = get_optional<std::string>(j, "final_answer");
}

void to_json(Json& j, const CandidateAnswer& v)
{
    j = Json{{"path_index", v.path_index},
             {"answer_text", v.answer_text},
             {"normalized_answer", v.normalized_answer},
             {"source_trajectory", v.source_trajectory},
             {"summary", v.summary},
             {"failed", v.failed},
             {"failure_reason", v.failure_reason}};
}

void from_json(const Json& j, CandidateAnswer& v)
{
    v.path_index = j.at("path_index").get<int>();
    v.answer_text = j.at("answer_text").get<std::string>();
    v.normalized_answer = j.value("normalized_answer", normalize_answer(v.answer_text));
    v.source_trajectory = j.at("source_trajectory").get<Trajectory>();
    v.summary = j.at("summary").get<GuidedSummary>();
    v.failed = j.value("failed", false);
    v.failure_reason = j.value("failure_reason", std::string{});
}

void to_json(Json& j, const SelectionRecord& v)
{
    j = Json{{"round", v.round},
             {"chosen", v.chosen},
             {"rationale_text", v.rationale_text},
             {"presented_order", v.presented_order},
             {"adjudication", v.adjudication}};
    put_real(j, "perplexity", v.perplexity);
    put_optional(j, "verbal_confidence", v.verbal_confidence);
}

void from_json(const Json& j, SelectionRecord& v)
{
    v.round = j.at("round").get<int>();
    v.chosen = j.at("chosen").get<int>();
    v.perplexity = get_real(j, "perplexity");
    v.rationale_text = j.value("rationale_text", std::string{});
    v.presented_order = j.value("presented_order", std::vector<int>{});
    v.adjudication = j.value("adjudication", false);
    v.verbal_confidence = get_optional<std::string>(j, "verbal_confidence");
}

void to_json(Json& j, const RunConfig& v)
{
    j = Json{{"temperature", v.temperature},
             {"top_p_global", v.top_p_global},
             {"top_p_selector", v.top_p_selector},
             {"max_agent_steps", v.max_agent_steps},
             {"n_parallel", v.n_parallel},
             {"context_length_tokens", v.context_length_tokens},
             {"top_n_sigma", v.top_n_sigma},
             {"max_output_tokens", v.max_output_tokens},
             {"t_solver", v.t_solver},
             {"t_critic", v.t_critic},
             {"r_selector", v.r_selector},
             {"tool_timeout_seconds", v.tool_timeout_seconds},
             {"max_retries", v.max_retries},
             {"retry_backoff_ms", v.retry_backoff_ms},
             {"logprobs_for_all_calls", v.logprobs_for_all_calls},
             {"missing_logprobs_as_uninformative", v.missing_logprobs_as_uninformative},
             {"allow_net", v.allow_net},
             {"code_interpreter", v.code_interpreter},
             {"query_workers", v.query_workers}};
    put_optional(j, "ppl_gate_threshold", v.ppl_gate_threshold);
}

void from_json(const Json& j, RunConfig& v)
{
    RunConfig d;
    v.temperature = j.value("temperature", d.temperature);
    v.top_p_global = j.value("top_p_global", d.top_p_global);
    v.top_p_selector = j.value("top_p_selector", d.top_p_selector);
    v.max_agent_steps = j.value("max_agent_steps", d.max_agent_steps);
    v.n_parallel = j.value("n_parallel", d.n_parallel);
    v.context_length_tokens = j.value("context_length_tokens", d.context_length_tokens);
    v.top_n_sigma = j.value("top_n_sigma", d.top_n_sigma);
    v.max_output_tokens = j.value("max_output_tokens", d.max_output_tokens);
    v.t_solver = j.value("t_solver", d.t_solver);
    v.t_critic = j.value("t_critic", d.t_critic);
    v.r_selector = j.value("r_selector", d.r_selector);
    v.tool_timeout_seconds = j.value("tool_timeout_seconds", d.tool_timeout_seconds);
    v.max_retries = j.value("max_retries", d.max_retries);
    v.retry_backoff_ms = j.value("retry_backoff_ms", d.retry_backoff_ms);
    v.logprobs_for_all_calls = j.value("logprobs_for_all_calls", d.logprobs_for_all_calls);
    v.missing_logprobs_as_uninformative =
        j.value("missing_logprobs_as_uninformative", d.missing_logprobs_as_uninformative);
    v.allow_net = j.value("allow_net", d.allow_net);
    v.code_interpreter = j.value("code_interpreter", d.code_interpreter);
    v.query_workers = j.value("query_workers", d.query_workers);
    v.ppl_gate_threshold = get_optional<double>(j, "ppl_gate_threshold");
}

} // namespace rethinker
