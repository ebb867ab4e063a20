#include "rethinker/trace.hpp"

#include "rethinker/errors.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace rethinker {

std::string TraceContext::tag() const
{
    std::string t = "[query=" + query_id + "]";
    if (path_index > 0) {
        t += "[path=" + std::to_string(path_index) + "]";
    }
    t += "[stage=" + std::string(to_string(stage)) + "][round=" + std::to_string(round) + "]";
    return t;
}

TraceWriter::TraceWriter(const std::filesystem::path& path, std::size_t capacity)
    : path_(path), capacity_(capacity ? capacity : 1)
{
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) {
        throw Error("cannot open trace file " + path_.string() + ": " + std::strerror(errno));
    }
    worker_ = std::thread([this] { run(); });
}

TraceWriter::~TraceWriter()
{
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
    }
    not_empty_.notify_all();
    worker_.join();
    ::close(fd_);
}

void TraceWriter::append_tool(const TraceContext& ctx, const ToolInvocation& invocation)
{
    Json inv = invocation;
    inv["type"] = "tool";
    enqueue(ctx, "tool", std::move(inv));
}

void TraceWriter::append_model(const TraceContext& ctx, const GenerationRequest& request,
                               const GenerationResult& result)
{
    Json inv{{"type", "model"},
             {"tag", request.tag},
             {"prompt_messages", request.messages.size()},
             {"last_message", request.messages.empty() ? std::string() : request.messages.back().content},
             {"response", result.text},
             {"finish_reason", to_string(result.finish_reason)},
             {"prompt_tokens", result.usage.prompt_tokens},
             {"completion_tokens", result.usage.completion_tokens},
             {"attempts", result.attempts},
             {"top_p", request.top_p},
             {"logprobs", result.token_logprobs.has_value()}};
    enqueue(ctx, "model", std::move(inv));
}

void TraceWriter::enqueue(const TraceContext& ctx, const char* kind, Json invocation)
{
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [this] { return queue_.size() < capacity_; });
    Json row{{"v", kTraceSchemaVersion},
             {"seq", next_seq_++},
             {"query_id", ctx.query_id},
             {"path_index", ctx.path_index},
             {"stage", to_string(ctx.stage)},
             {"round", ctx.round},
             {"kind", kind},
             {"invocation", std::move(invocation)}};
    queue_.push_back(row.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n");
    lock.unlock();
    not_empty_.notify_one();
}

void TraceWriter::flush()
{
    std::unique_lock lock(mutex_);
    const auto target = next_seq_;
    drained_.wait(lock, [this, target] { return written_ >= target; });
}

void TraceWriter::run()
{
    std::unique_lock lock(mutex_);
    while (true) {
        not_empty_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
        if (queue_.empty() && stopping_) {
            return;
        }
        std::deque<std::string> batch;
        batch.swap(queue_);
        lock.unlock();
        not_full_.notify_all();

        std::string blob;
        for (const auto& line : batch) {
            blob += line;
        }
        ::flock(fd_, LOCK_EX);
        std::size_t off = 0;
        while (off < blob.size()) {
            auto n = ::write(fd_, blob.data() + off, blob.size() - off);
            if (n < 0) {
                if (errno == EINTR) {
                    continue;
                }
                break;
            }
            off += static_cast<std::size_t>(n);
        }
        ::flock(fd_, LOCK_UN);

        lock.lock();
        written_ += batch.size();
        drained_.notify_all();
    }
}

} // namespace rethinker
