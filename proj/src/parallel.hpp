#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rethinker::detail {

// Runs fn(i) for i in [0, n) on at most `width` threads. The first
// exception stops further work and is rethrown after all threads join.
template <typename Fn>
void parallel_for(std::size_t n, int width, Fn fn)
{
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) {
                    error = std::current_exception();
                }
                next = n;
            }
        }
    };
    std::vector<std::thread> threads;
    auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(width, 1)));
    for (std::size_t t = 1; t < count; ++t) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace rethinker::detail
