#pragma once
// Python code execution in a throwaway subprocess.
//
// Each run gets a fresh temp working directory, a new process group and (by
// default) an empty network namespace plus a socket guard in the Python
// prelude. web_search / web_parse are exposed to the code as builtins that
// call back into the host over two extra pipes (fd 3 requests, fd 4
// replies), so web access goes through WebTools even when the child has no
// network.

#include "rethinker/trace.hpp"
#include "rethinker/types.hpp"
#include "rethinker/web_tools.hpp"

#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace rethinker {

// Inner text of every well-formed <code>...</code> region, in order. An
// unterminated <code> contributes nothing and logs a warning.
std::vector<std::string> extract_code_blocks(std::string_view text);

struct ExecutionResult {
    std::string stdout_text;
    std::string stderr_text;
    double duration_seconds = 0.0;
    int exit_code = 0;          // -signal when killed by a signal
    bool timed_out = false;

    bool ok() const { return !timed_out && exit_code == 0; }
};

struct ExecutorConfig {
    std::string interpreter = "python3";
    bool allow_net = false;
    int max_concurrent = 5;
    std::size_t max_output_bytes = 1 << 20;

    // interpreter from RETHINKER_CODE_INTERPRETER when set.
    static ExecutorConfig from_run_config(const RunConfig& config);
};

class CodeExecutor {
public:
    // `web` and `trace` may be null.
    CodeExecutor(ExecutorConfig config, const WebTools* web, TraceWriter* trace);

    // Runs `code`. Nonzero exit and timeout are reported in the result, not
    // thrown; SandboxError when the interpreter cannot be spawned. The
    // execute_code invocation (and any web calls made by the code) are
    // appended to `events` when given and always to the trace.
    ExecutionResult execute(std::string_view code, double timeout_seconds, const TraceContext& ctx,
                            std::vector<ToolInvocation>* events = nullptr);

    const ExecutorConfig& config() const noexcept { return config_; }

private:
    ExecutionResult run_child(std::string_view code, double timeout_seconds, const TraceContext& ctx,
                              std::vector<ToolInvocation>* events);
    std::string serve_web_request(const std::string& line, const TraceContext& ctx,
                                  std::vector<ToolInvocation>* events);
    void record(const TraceContext& ctx, const ToolInvocation& inv, std::vector<ToolInvocation>* events);

    ExecutorConfig config_;
    const WebTools* web_;
    TraceWriter* trace_;
    std::counting_semaphore<1024> slots_;
};

} // namespace rethinker
