#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace vitalsel {

inline unsigned resolve_threads(unsigned requested)
{
    if (requested != 0) {
        return requested;
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

// Runs body(i) for i in [0, n). Work is handed out dynamically, so body must
// only write to slots owned by i. The first exception thrown is rethrown.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body)
{
    const unsigned workers = std::min<std::size_t>(resolve_threads(threads), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(n);
                return;
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (unsigned w = 1; w < workers; ++w) {
        pool.emplace_back(run);
    }
    run();
    pool.clear();
    if (failure) {
        std::rethrow_exception(failure);
    }
}

} // namespace vitalsel
