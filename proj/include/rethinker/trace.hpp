#pragma once
// Append-only JSONL audit trail for every tool invocation and model call.
//
// Producers enqueue records into a bounded queue; one writer thread owns the
// file and writes whole lines under an exclusive flock, so concurrent paths
// never interleave partial lines. Each line carries "v": 1 and a global
// sequence number assigned at enqueue time.

#include "rethinker/gateway.hpp"
#include "rethinker/types.hpp"

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <string>
#include <thread>

namespace rethinker {

inline constexpr int kTraceSchemaVersion = 1;

struct TraceContext {
    std::string query_id;
    int path_index = 0;
    Stage stage = Stage::solver;
    int round = 0;

    // "[query=..][path=..][stage=..][round=..]" (path omitted when 0).
    std::string tag() const;
};

class TraceWriter {
public:
    explicit TraceWriter(const std::filesystem::path& path, std::size_t capacity = 1024);
    ~TraceWriter();

    TraceWriter(const TraceWriter&) = delete;
    TraceWriter& operator=(const TraceWriter&) = delete;

    void append_tool(const TraceContext& ctx, const ToolInvocation& invocation);
    void append_model(const TraceContext& ctx, const GenerationRequest& request,
                      const GenerationResult& result);

    // Blocks until everything enqueued so far is on disk.
    void flush();

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    void enqueue(const TraceContext& ctx, const char* kind, Json invocation);
    void run();

    std::filesystem::path path_;
    std::size_t capacity_;
    int fd_ = -1;

    std::mutex mutex_;
    std::condition_variable not_empty_;
    std::condition_variable not_full_;
    std::condition_variable drained_;
    std::deque<std::string> queue_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t written_ = 0;
    bool stopping_ = false;
    std::thread worker_;
};

} // namespace rethinker
