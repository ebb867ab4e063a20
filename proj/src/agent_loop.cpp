#include "rethinker/agent_loop.hpp"

#include "rethinker/text.hpp"

#include <sstream>

namespace rethinker {

namespace {

constexpr const char* kEmptyGeneration = "[empty generation]";

bool has_terminal(std::string_view text, AgentLoopOptions::Terminal terminal)
{
    if (terminal == AgentLoopOptions::Terminal::answer) {
        return !scan_tag_regions(text, "<answer>", "</answer>").regions.empty();
    }
    return !scan_tag_regions(text, "<select>", "</select>").regions.empty();
}

std::string nudge(AgentLoopOptions::Terminal terminal)
{
    if (terminal == AgentLoopOptions::Terminal::answer) {
        return "No code block or final answer was found in your last message. Continue; write code between "
               "<code> and </code> if you need it, and put your final answer in <answer></answer> with boxed.";
    }
    return "No code block or final decision was found in your last message. Continue, and finish with "
           "FINAL DECISION: <select>Response X</select>.";
}

void finalize(Trajectory& t, AgentLoopOptions::Terminal terminal)
{
    for (auto it = t.messages.rbegin(); it != t.messages.rend(); ++it) {
        if (it->role != Role::assistant) {
            continue;
        }
        auto found = terminal == AgentLoopOptions::Terminal::answer
                         ? last_tag_region(it->content, "<answer>", "</answer>")
                         : last_tag_region(it->content, "<select>", "</select>");
        if (found) {
            t.final_answer = std::move(found);
            return;
        }
    }
    t.final_answer.reset();
}

// One model call appended to the trajectory as an assistant message.
const Message& generate_step(Trajectory& t, Gateway& gateway, TraceWriter* trace, const AgentLoopOptions& options)
{
    ++t.step_count;
    auto tag = options.ctx.tag() + "[step=" + std::to_string(t.step_count) + "]";
    auto request = gateway.make_request(options.ctx.stage, t.messages, std::move(tag), {"</code>"});
    auto result = gateway.generate(request);
    if (trace) {
        trace->append_model(options.ctx, request, result);
    }
    Message reply{Role::assistant, result.text, std::move(result.token_logprobs)};
    if (trim(reply.content).empty()) {
        reply.content = kEmptyGeneration;
    }
    t.messages.push_back(std::move(reply));
    return t.messages.back();
}

} // namespace

std::string format_execution_feedback(const std::vector<ExecutionResult>& results)
{
    std::ostringstream out;
    out << kExecutionFeedbackPrefix;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        out << "\n[block " << (i + 1) << "]\n" << r.stdout_text;
        if (!r.stderr_text.empty()) {
            out << (r.stdout_text.empty() || r.stdout_text.back() == '\n' ? "" : "\n") << "[stderr]\n"
                << r.stderr_text;
        }
        if (r.timed_out) {
            out << "\n[timed out after " << format_fixed(r.duration_seconds, 1) << " s]";
        } else if (r.exit_code != 0) {
            out << "\n[exit code " << r.exit_code << "]";
        }
    }
    return out.str();
}

Trajectory run_agent_loop(std::vector<Message> initial, Gateway& gateway, CodeExecutor& executor,
                          TraceWriter* trace, const AgentLoopOptions& options)
{
    const auto& config = gateway.config();
    Trajectory t;
    t.query_id = options.ctx.query_id;
    t.path_index = options.ctx.path_index;
    t.stage = options.ctx.stage;
    t.round_index = options.ctx.round;
    t.messages = std::move(initial);

    while (t.step_count < config.max_agent_steps) {
        const auto& reply = generate_step(t, gateway, trace, options);
        if (has_terminal(reply.content, options.terminal)) {
            break;
        }
        auto blocks = extract_code_blocks(reply.content);
        if (blocks.empty()) {
            if (t.step_count < config.max_agent_steps) {
                t.messages.push_back(Message{Role::user, nudge(options.terminal), std::nullopt});
            }
            continue;
        }
        std::vector<ExecutionResult> results;
        for (const auto& code : blocks) {
            results.push_back(executor.execute(code, config.tool_timeout_seconds, options.ctx, &t.tool_events));
        }
        t.messages.push_back(Message{Role::user, format_execution_feedback(results), std::nullopt});
    }
    finalize(t, options.terminal);
    return t;
}

bool extend_trajectory(Trajectory& trajectory, std::string user_text, Gateway& gateway, TraceWriter* trace,
                       const AgentLoopOptions& options)
{
    if (trajectory.step_count >= gateway.config().max_agent_steps) {
        return false;
    }
    trajectory.messages.push_back(Message{Role::user, std::move(user_text), std::nullopt});
    generate_step(trajectory, gateway, trace, options);
    finalize(trajectory, options.terminal);
    return true;
}

} // namespace rethinker
