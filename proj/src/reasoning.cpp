#include "rethinker/reasoning.hpp"

#include "rethinker/errors.hpp"
#include "rethinker/prompts.hpp"
#include "rethinker/text.hpp"

#include <spdlog/spdlog.h>

#include <array>
#include <fstream>
#include <future>
#include <regex>
#include <sstream>

namespace rethinker {

std::optional<std::string> extract_answer(const Trajectory& trajectory)
{
    const Message* last_assistant = nullptr;
    for (auto it = trajectory.messages.rbegin(); it != trajectory.messages.rend(); ++it) {
        if (it->role == Role::assistant) {
            last_assistant = &*it;
            break;
        }
    }
    if (last_assistant) {
        if (auto a = last_tag_region(last_assistant->content, "<answer>", "</answer>")) {
            return a;
        }
    }
    for (auto it = trajectory.messages.rbegin(); it != trajectory.messages.rend(); ++it) {
        if (it->role != Role::assistant) {
            continue;
        }
        if (auto a = last_tag_region(it->content, "<answer>", "</answer>")) {
            return a;
        }
    }
    return std::nullopt;
}

namespace {

// 0, 1, 2 for Part 1/2/3; -1 when `line` is not a heading.
int heading_part(const std::string& line, std::string& rest)
{
    // "Part N" followed by ':' / '.' / ')', a known title, or end of line.
    static const std::regex heading(
        R"(^[\s#*>]*part\s*([123])(?:\s*\**\s*[:.)]|\s*\**\s*$|\s+(?=reasoning|final|key))\s*\**\s*(.*)$)",
        std::regex::icase);
    static const std::array<const char*, 3> titles{"reasoning trajectory summary", "final answer",
                                                   "key areas for improvement"};
    std::smatch m;
    if (!std::regex_match(line, m, heading)) {
        return -1;
    }
    rest = m[2].str();
    // Prefer the heading title when present so "Part 3: Final Answer" style
    // mislabels still map by name.
    auto lower = to_lower(rest);
    for (int i = 0; i < 3; ++i) {
        if (lower.starts_with(titles[static_cast<std::size_t>(i)])) {
            rest = rest.substr(std::string_view(titles[static_cast<std::size_t>(i)]).size());
            auto pos = rest.find_first_not_of(" \t*:.-_");
            rest = pos == std::string::npos ? std::string{} : rest.substr(pos);
            return i;
        }
    }
    return m[1].str()[0] - '1';
}

std::string strip_markup(std::string s)
{
    s = trim(s);
    while (s.size() >= 2 && ((s.front() == '*' && s.back() == '*') || (s.front() == '`' && s.back() == '`') ||
                             (s.front() == '"' && s.back() == '"'))) {
        s = trim(s.substr(1, s.size() - 2));
    }
    return s;
}

} // namespace

std::optional<GuidedSummary> parse_guided_summary(std::string_view text)
{
    std::array<std::optional<std::string>, 3> parts;
    std::istringstream in{std::string(text)};
    std::string line;
    int current = -1;
    while (std::getline(in, line)) {
        std::string rest;
        int part = heading_part(line, rest);
        if (part >= 0) {
            current = part;
            parts[static_cast<std::size_t>(part)] = rest;
            continue;
        }
        if (current >= 0) {
            auto& p = *parts[static_cast<std::size_t>(current)];
            if (!p.empty()) {
                p += '\n';
            }
            p += line;
        }
    }
    if (!parts[0] || !parts[1] || !parts[2]) {
        return std::nullopt;
    }
    GuidedSummary s;
    s.trajectory_summary = trim(*parts[0]);
    s.improvement_areas = trim(*parts[2]);
    if (s.trajectory_summary.empty() || s.improvement_areas.empty()) {
        return std::nullopt;
    }
    std::string answer = trim(*parts[1]);
    if (auto inner = last_tag_region(answer, "<answer>", "</answer>")) {
        answer = *inner;
    } else {
        answer = strip_markup(answer);
    }
    if (trim(answer).empty() || to_lower(strip_markup(answer)) == "null") {
        s.final_answer.reset();
    } else {
        s.final_answer = answer;
    }
    return s;
}

std::string render_transcript(const Trajectory& trajectory)
{
    std::string out;
    for (std::size_t i = 1; i < trajectory.messages.size(); ++i) {
        if (!out.empty()) {
            out += "\n\n";
        }
        out += trajectory.messages[i].content;
    }
    return out;
}

std::string render_summary_for_critic(const GuidedSummary& summary)
{
    return "Part 1: Reasoning Trajectory Summary\n" + summary.trajectory_summary + "\n\nPart 2: Final Answer\n" +
           summary.final_answer.value_or("null") + "\n\nPart 3: Key Areas for Improvement\n" +
           summary.improvement_areas;
}

namespace {

std::vector<Trajectory> run_rounds(const Query& q, int path_index, Stage stage, int rounds, EngineContext& engine,
                                   const std::function<std::string(const std::optional<std::string>&)>& prompt)
{
    std::vector<Trajectory> out;
    std::optional<std::string> carried;
    for (int t = 0; t < rounds; ++t) {
        AgentLoopOptions options;
        options.ctx = TraceContext{q.id, path_index, stage, t};
        std::vector<Message> initial{Message{Role::user, prompt(carried), std::nullopt}};
        auto trajectory = run_agent_loop(std::move(initial), engine.gateway, engine.executor, engine.trace, options);
        trajectory.final_answer = extract_answer(trajectory);
        carried = trajectory.final_answer ? *trajectory.final_answer : std::string(kNoAnswerMarker);
        out.push_back(std::move(trajectory));
    }
    return out;
}

} // namespace

std::vector<Trajectory> run_solver(const Query& q, int path_index, EngineContext& engine)
{
    return run_rounds(q, path_index, Stage::solver, engine.gateway.config().t_solver, engine,
                      [&](const std::optional<std::string>& last) { return render_solver_prompt(q.text, last); });
}

GuidedSummary summarize(const Query& q, const Trajectory& last_solver_round, int path_index, EngineContext& engine,
                        Trajectory* exchange)
{
    if (last_solver_round.messages.empty()) {
        throw std::invalid_argument("summarize: empty trajectory");
    }
    TraceContext ctx{q.id, path_index, Stage::summary, 0};
    Trajectory t;
    t.query_id = q.id;
    t.path_index = path_index;
    t.stage = Stage::summary;
    t.messages.push_back(
        Message{Role::user, render_summary_prompt(q.text, render_transcript(last_solver_round)), std::nullopt});

    std::optional<GuidedSummary> parsed;
    for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
        if (attempt == 1) {
            t.messages.push_back(Message{Role::user,
                                         "Your analysis did not follow the required structure. Reply again with "
                                         "exactly three sections headed \"Part 1: Reasoning Trajectory Summary\", "
                                         "\"Part 2: Final Answer\" and \"Part 3: Key Areas for Improvement\".",
                                         std::nullopt});
        }
        auto tag = ctx.tag() + "[attempt=" + std::to_string(attempt) + "]";
        auto request = engine.gateway.make_request(Stage::summary, t.messages, std::move(tag));
        auto result = engine.gateway.generate(request);
        if (engine.trace) {
            engine.trace->append_model(ctx, request, result);
        }
        ++t.step_count;
        t.messages.push_back(Message{Role::assistant, trim(result.text).empty() ? "[empty generation]" : result.text,
                                     std::move(result.token_logprobs)});
        parsed = parse_guided_summary(result.text);
    }
    if (exchange) {
        *exchange = t;
    }
    if (!parsed) {
        throw Error("guided summary for path " + std::to_string(path_index) + " did not parse after a re-prompt");
    }
    return *parsed;
}

std::vector<Trajectory> run_critic(const Query& q, const GuidedSummary& summary, int path_index,
                                   EngineContext& engine)
{
    const auto shown = render_summary_for_critic(summary);
    return run_rounds(q, path_index, Stage::critic, engine.gateway.config().t_critic, engine,
                      [&](const std::optional<std::string>& last) { return render_critic_prompt(q.text, shown, last); });
}

PathResult run_path(const Query& q, int path_index, EngineContext& engine)
{
    PathResult r;
    r.path_index = path_index;
    r.solver_rounds = run_solver(q, path_index, engine);
    r.summary = summarize(q, r.solver_rounds.back(), path_index, engine, &r.summary_exchange);
    r.critic_rounds = run_critic(q, r.summary, path_index, engine);

    const auto& last = r.critic_rounds.back();
    if (!last.final_answer || trim(*last.final_answer).empty()) {
        throw Error("path " + std::to_string(path_index) + ": final critic round produced no answer");
    }
    auto& c = r.final_candidate;
    c.path_index = path_index;
    c.answer_text = *last.final_answer;
    c.normalized_answer = normalize_answer(c.answer_text);
    c.source_trajectory = last;
    c.summary = r.summary;
    return r;
}

PathsOutcome run_paths(const Query& q, EngineContext& engine)
{
    const int n = engine.gateway.config().n_parallel;
    std::vector<std::future<PathResult>> futures;
    futures.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        futures.push_back(std::async(std::launch::async, [&q, &engine, i] { return run_path(q, i, engine); }));
    }
    PathsOutcome out;
    for (int i = 1; i <= n; ++i) {
        try {
            auto r = futures[static_cast<std::size_t>(i - 1)].get();
            out.candidates.push_back(r.final_candidate);
            out.paths.push_back(std::move(r));
        } catch (const std::exception& e) {
            spdlog::warn("query {}: path {} failed: {}", q.id, i, e.what());
            CandidateAnswer placeholder;
            placeholder.path_index = i;
            placeholder.failed = true;
            placeholder.failure_reason = e.what();
            out.candidates.push_back(std::move(placeholder));
        }
    }
    return out;
}

namespace {

void write_json(const std::filesystem::path& path, const Json& j)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

} // namespace

void write_path_bundle(const std::filesystem::path& query_dir, const PathsOutcome& outcome)
{
    for (const auto& c : outcome.candidates) {
        auto dir = query_dir / ("path" + std::to_string(c.path_index));
        std::filesystem::create_directories(dir);
        if (c.failed) {
            write_json(dir / "failure.json", Json{{"path_index", c.path_index}, {"reason", c.failure_reason}});
        }
    }
    for (const auto& p : outcome.paths) {
        auto dir = query_dir / ("path" + std::to_string(p.path_index));
        int t = 0;
        for (const auto& r : p.solver_rounds) {
            write_json(dir / ("round" + std::to_string(t++) + ".json"), r);
        }
        for (const auto& r : p.critic_rounds) {
            write_json(dir / ("round" + std::to_string(t++) + ".json"), r);
        }
        write_json(dir / "summary.json", Json{{"path_index", p.path_index},
                                              {"guided_summary", p.summary},
                                              {"exchange", p.summary_exchange},
                                              {"final_candidate", p.final_candidate}});
    }
}

} // namespace rethinker
