#include "rethinker/code_executor.hpp"

#include "rethinker/errors.hpp"
#include "rethinker/text.hpp"

#include <spdlog/spdlog.h>

#include <fcntl.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

extern char** environ;

namespace rethinker {

std::vector<std::string> extract_code_blocks(std::string_view text)
{
    auto scan = scan_tag_regions(text, "<code>", "</code>");
    if (scan.unterminated) {
        spdlog::warn("unterminated <code> block ignored");
    }
    return scan.regions;
}

ExecutorConfig ExecutorConfig::from_run_config(const RunConfig& config)
{
    ExecutorConfig c;
    c.interpreter = config.code_interpreter;
    if (const char* env = std::getenv("RETHINKER_CODE_INTERPRETER"); env && *env) {
        c.interpreter = env;
    }
    c.allow_net = config.allow_net;
    c.max_concurrent = config.n_parallel;
    return c;
}

namespace {

constexpr const char* kPrelude = R"PY(import builtins, json, os, sys

_rt_req = os.fdopen(3, "w", encoding="utf-8")
_rt_resp = os.fdopen(4, "r", encoding="utf-8")


def _rt_call(tool, args):
    _rt_req.write(json.dumps({"tool": tool, "args": args}) + "\n")
    _rt_req.flush()
    line = _rt_resp.readline()
    if not line:
        return ""
    reply = json.loads(line)
    if "error" in reply:
        return "[" + tool + " error: " + reply["error"] + "]"
    return reply.get("output", "")


def web_search(keywords):
    return _rt_call("web_search", {"keywords": str(keywords)})


def web_parse(link, query=""):
    return _rt_call("web_parse", {"link": str(link), "query": str(query)})


builtins.web_search = web_search
builtins.web_parse = web_parse

if os.environ.get("RETHINKER_ALLOW_NET") != "1":
    import socket

    def _rt_no_net(*args, **kwargs):
        raise OSError("network access is disabled in the code sandbox")

    socket.socket.connect = _rt_no_net
    socket.socket.connect_ex = _rt_no_net
    socket.create_connection = _rt_no_net
    socket.getaddrinfo = _rt_no_net

with open("main.py", encoding="utf-8") as _rt_f:
    _rt_src = _rt_f.read()
sys.argv = ["main.py"]
exec(compile(_rt_src, "main.py", "exec"), {"__name__": "__main__", "__builtins__": builtins})
)PY";

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    void reset()
    {
        if (fd >= 0) {
            ::close(fd);
        }
        fd = -1;
    }
};

struct Pipe {
    Fd r, w;
    Pipe()
    {
        int p[2];
        if (::pipe2(p, O_CLOEXEC) != 0) {
            throw SandboxError(std::string("pipe: ") + std::strerror(errno));
        }
        r.fd = p[0];
        w.fd = p[1];
    }
};

struct SlotGuard {
    std::counting_semaphore<1024>& sem;
    explicit SlotGuard(std::counting_semaphore<1024>& s) : sem(s) { sem.acquire(); }
    ~SlotGuard() { sem.release(); }
};

struct TempDir {
    std::filesystem::path path;
    TempDir()
    {
        auto tmpl = (std::filesystem::temp_directory_path() / "rethinker-exec-XXXXXX").string();
        if (!::mkdtemp(tmpl.data())) {
            throw SandboxError(std::string("mkdtemp: ") + std::strerror(errno));
        }
        path = tmpl;
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
};

void append_capped(std::string& dst, const char* data, std::size_t n, std::size_t cap, bool& truncated)
{
    if (dst.size() >= cap) {
        truncated = true;
        return;
    }
    auto take = std::min(n, cap - dst.size());
    dst.append(data, take);
    truncated = truncated || take < n;
}

void write_all(int fd, std::string_view data)
{
    while (!data.empty()) {
        auto n = ::write(fd, data.data(), data.size());
        if (n < 0) {
            if (errno == EINTR) {
                continue;
            }
            return; // child went away; its side of the exchange is moot
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
}

[[noreturn]] void child_fail(int status_fd, int err)
{
    [[maybe_unused]] auto n = ::write(status_fd, &err, sizeof err);
    ::_exit(127);
}

std::once_flag sigpipe_once;

} // namespace

CodeExecutor::CodeExecutor(ExecutorConfig config, const WebTools* web, TraceWriter* trace)
    : config_(std::move(config)), web_(web), trace_(trace), slots_(std::clamp(config_.max_concurrent, 1, 1024))
{
    // Writes to a pipe whose reader died must fail with EPIPE, not kill us.
    std::call_once(sigpipe_once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

void CodeExecutor::record(const TraceContext& ctx, const ToolInvocation& inv, std::vector<ToolInvocation>* events)
{
    if (events) {
        events->push_back(inv);
    }
    if (trace_) {
        trace_->append_tool(ctx, inv);
    }
}

std::string CodeExecutor::serve_web_request(const std::string& line, const TraceContext& ctx,
                                            std::vector<ToolInvocation>* events)
{
    ToolInvocation inv;
    inv.started_at = utc_timestamp_now();
    auto t0 = std::chrono::steady_clock::now();
    Json reply = Json::object();
    auto request = Json::parse(line, nullptr, false);
    try {
        if (request.is_discarded() || !request.contains("tool") || !request.contains("args")) {
            throw std::invalid_argument("malformed tool request from sandbox");
        }
        inv.tool = tool_from_string(request["tool"].get<std::string>());
        inv.arguments = request["args"];
        if (!web_) {
            throw FixtureMiss("web tools are not configured");
        }
        if (inv.tool == ToolKind::web_search) {
            inv.output_text = web_->web_search(inv.arguments.value("keywords", std::string{}));
        } else if (inv.tool == ToolKind::web_parse) {
            inv.output_text = web_->web_parse(inv.arguments.value("link", std::string{}),
                                              inv.arguments.value("query", std::string{}), ctx);
        } else {
            throw std::invalid_argument("tool not callable from code");
        }
        reply["output"] = inv.output_text;
    } catch (const std::exception& e) {
        inv.error_text = e.what();
        inv.output_text.clear();
        reply["error"] = e.what();
    }
    inv.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    record(ctx, inv, events);
    return reply.dump() + "\n";
}

ExecutionResult CodeExecutor::execute(std::string_view code, double timeout_seconds, const TraceContext& ctx,
                                      std::vector<ToolInvocation>* events)
{
    if (!(timeout_seconds > 0.0)) {
        throw std::invalid_argument("execute_code: timeout must be > 0");
    }
    SlotGuard slot(slots_);
    ToolInvocation inv;
    inv.tool = ToolKind::execute_code;
    inv.arguments = Json{{"code", std::string(code)}, {"timeout", timeout_seconds}};
    inv.started_at = utc_timestamp_now();

    // Web calls made by the code are recorded before the execution itself.
    std::vector<ToolInvocation> nested;
    ExecutionResult result;
    try {
        result = run_child(code, timeout_seconds, ctx, &nested);
    } catch (const SandboxError& e) {
        for (const auto& n : nested) {
            if (events) {
                events->push_back(n);
            }
        }
        inv.error_text = std::string("sandbox: ") + e.what();
        record(ctx, inv, events);
        throw;
    }
    if (events) {
        events->insert(events->end(), nested.begin(), nested.end());
    }
    inv.duration_seconds = result.duration_seconds;
    inv.output_text = result.stdout_text;
    if (!result.stderr_text.empty()) {
        inv.output_text += "\n[stderr]\n" + result.stderr_text;
    }
    if (result.timed_out) {
        inv.error_text = "timed out after " + format_fixed(timeout_seconds, 1) + " s";
    } else if (result.exit_code != 0) {
        inv.error_text = "exit code " + std::to_string(result.exit_code) +
                         (result.stderr_text.empty() ? std::string{} : "\n" + result.stderr_text);
    }
    record(ctx, inv, events);
    return result;
}

ExecutionResult CodeExecutor::run_child(std::string_view code, double timeout_seconds, const TraceContext& ctx,
                                        std::vector<ToolInvocation>* events)
{
    TempDir dir;
    {
        std::ofstream(dir.path / "runner.py") << kPrelude;
        std::ofstream(dir.path / "main.py", std::ios::binary) << code;
    }

    Pipe out, err, req, resp, status;
    Fd devnull(::open("/dev/null", O_RDONLY | O_CLOEXEC));
    const std::string workdir = dir.path.string();
    const std::string runner = (dir.path / "runner.py").string();
    std::vector<std::string> argv_store{config_.interpreter, "-u", "-B", runner};
    std::vector<char*> argv;
    for (auto& a : argv_store) {
        argv.push_back(a.data());
    }
    argv.push_back(nullptr);
    const bool allow_net = config_.allow_net;
    // The child may only make async-signal-safe calls, so the environment is
    // assembled here.
    std::vector<std::string> env_store;
    for (char** e = environ; *e; ++e) {
        std::string_view kv(*e);
        if (!kv.starts_with("RETHINKER_ALLOW_NET=") && !kv.starts_with("PYTHONIOENCODING=")) {
            env_store.emplace_back(kv);
        }
    }
    env_store.push_back(std::string("RETHINKER_ALLOW_NET=") + (allow_net ? "1" : "0"));
    env_store.push_back("PYTHONIOENCODING=utf-8");
    std::vector<char*> envp;
    for (auto& e : env_store) {
        envp.push_back(e.data());
    }
    envp.push_back(nullptr);

    auto started = std::chrono::steady_clock::now();
    pid_t pid = ::fork();
    if (pid < 0) {
        throw SandboxError(std::string("fork: ") + std::strerror(errno));
    }
    if (pid == 0) {
        ::setpgid(0, 0);
        if (!allow_net && ::unshare(CLONE_NEWNET) != 0) {
            ::unshare(CLONE_NEWUSER | CLONE_NEWNET); // best effort when unprivileged
        }
        // Move everything above the stdio/bridge range before the final dup2s.
        int src[5] = {devnull.fd, out.w.fd, err.w.fd, req.w.fd, resp.r.fd};
        int high[5];
        for (int i = 0; i < 5; ++i) {
            high[i] = ::fcntl(src[i], F_DUPFD_CLOEXEC, 10);
            if (high[i] < 0) {
                child_fail(status.w.fd, errno);
            }
        }
        for (int i = 0; i < 5; ++i) {
            if (::dup2(high[i], i) < 0) {
                child_fail(status.w.fd, errno);
            }
        }
        if (::chdir(workdir.c_str()) != 0) {
            child_fail(status.w.fd, errno);
        }
        ::execvpe(argv[0], argv.data(), envp.data());
        child_fail(status.w.fd, errno);
    }

    out.w.reset();
    err.w.reset();
    req.w.reset();
    resp.r.reset();
    status.w.reset();

    int spawn_errno = 0;
    if (::read(status.r.fd, &spawn_errno, sizeof spawn_errno) == static_cast<ssize_t>(sizeof spawn_errno)) {
        ::waitpid(pid, nullptr, 0);
        throw SandboxError("cannot start interpreter '" + config_.interpreter + "': " + std::strerror(spawn_errno));
    }

    ExecutionResult result;
    bool out_trunc = false;
    bool err_trunc = false;
    std::string req_buf;
    auto deadline = started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                  std::chrono::duration<double>(timeout_seconds));
    bool out_open = true, err_open = true, req_open = true;
    char buf[65536];

    while (out_open || err_open || req_open) {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            break;
        }
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
        pollfd fds[3];
        nfds_t nfds = 0;
        int which[3];
        if (out_open) {
            fds[nfds] = {out.r.fd, POLLIN, 0};
            which[nfds++] = 0;
        }
        if (err_open) {
            fds[nfds] = {err.r.fd, POLLIN, 0};
            which[nfds++] = 1;
        }
        if (req_open) {
            fds[nfds] = {req.r.fd, POLLIN, 0};
            which[nfds++] = 2;
        }
        int rc = ::poll(fds, nfds, static_cast<int>(std::min<long long>(left, 1000)));
        if (rc < 0) {
            if (errno == EINTR) {
                continue;
            }
            break;
        }
        for (nfds_t i = 0; i < nfds; ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) {
                continue;
            }
            auto n = ::read(fds[i].fd, buf, sizeof buf);
            if (n < 0 && errno == EINTR) {
                continue;
            }
            if (n <= 0) {
                (which[i] == 0 ? out_open : which[i] == 1 ? err_open : req_open) = false;
                continue;
            }
            auto size = static_cast<std::size_t>(n);
            if (which[i] == 0) {
                append_capped(result.stdout_text, buf, size, config_.max_output_bytes, out_trunc);
            } else if (which[i] == 1) {
                append_capped(result.stderr_text, buf, size, config_.max_output_bytes, err_trunc);
            } else {
                req_buf.append(buf, size);
                std::size_t nl;
                while ((nl = req_buf.find('\n')) != std::string::npos) {
                    auto line = req_buf.substr(0, nl);
                    req_buf.erase(0, nl + 1);
                    write_all(resp.w.fd, serve_web_request(line, ctx, events));
                }
            }
        }
    }

    int wstatus = 0;
    if (result.timed_out) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &wstatus, 0);
    } else {
        // Pipes closed; the child is exiting. Bound the wait by the deadline too.
        while (true) {
            auto r = ::waitpid(pid, &wstatus, WNOHANG);
            if (r == pid || r < 0) {
                break;
            }
            if (std::chrono::steady_clock::now() >= deadline) {
                result.timed_out = true;
                ::kill(-pid, SIGKILL);
                ::waitpid(pid, &wstatus, 0);
                break;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
        }
        ::kill(-pid, SIGKILL); // stray grandchildren
    }
    result.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (WIFEXITED(wstatus)) {
        result.exit_code = WEXITSTATUS(wstatus);
    } else if (WIFSIGNALED(wstatus)) {
        result.exit_code = -WTERMSIG(wstatus);
    }
    if (out_trunc) {
        result.stdout_text += "\n[output truncated]";
    }
    if (err_trunc) {
        result.stderr_text += "\n[output truncated]";
    }
    return result;
}

} // namespace rethinker
