#pragma once
// Generate / execute / feed back loop shared by every reasoning stage.

#include "rethinker/code_executor.hpp"
#include "rethinker/gateway.hpp"
#include "rethinker/trace.hpp"
#include "rethinker/types.hpp"

#include <string>
#include <vector>

namespace rethinker {

inline constexpr const char* kExecutionFeedbackPrefix = "Execution results:";

// What a reasoning stage needs to run: the model, the code sandbox and the
// (optional) trace. Shared by all paths of a query.
struct EngineContext {
    Gateway& gateway;
    CodeExecutor& executor;
    TraceWriter* trace = nullptr;
};

struct AgentLoopOptions {
    enum class Terminal { answer, select };

    TraceContext ctx;               // stage and round come from here
    Terminal terminal = Terminal::answer;
};

// "Execution results:" followed by one "[block i]" section per result.
std::string format_execution_feedback(const std::vector<ExecutionResult>& results);

// Runs until a generation contains the terminal region (<answer> or
// <select>) or max_agent_steps model calls were made. Code blocks in a
// generation run in order and their combined output comes back as one user
// message. A generation with neither code nor a terminal region gets a short
// nudge. Backend errors propagate.
Trajectory run_agent_loop(std::vector<Message> initial, Gateway& gateway, CodeExecutor& executor,
                          TraceWriter* trace, const AgentLoopOptions& options);

// One extra user turn plus one generation on an existing trajectory (used
// for re-prompts). Returns false without calling the model when the step
// budget is already spent.
bool extend_trajectory(Trajectory& trajectory, std::string user_text, Gateway& gateway, TraceWriter* trace,
                       const AgentLoopOptions& options);

} // namespace rethinker
