#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wfiso {

/// Number of worker threads used by parallel_for. 0 selects hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs fn(i) for i in [0, n). Work items must write disjoint memory; results
/// are then independent of the schedule.
template <class Fn>
void parallel_for(size_t n, Fn&& fn, size_t min_grain = 4096) {
    const unsigned threads = thread_count();
    if (threads <= 1 || n < 2 * min_grain) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const size_t chunks = std::min<size_t>(threads, (n + min_grain - 1) / min_grain);
    const size_t per = (n + chunks - 1) / chunks;
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(chunks - 1);
    auto run = [&](size_t c) {
        try {
            const size_t lo = c * per, hi = std::min(n, lo + per);
            for (size_t i = lo; i < hi; ++i) fn(i);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    for (size_t c = 1; c < chunks; ++c) pool.emplace_back(run, c);
    run(0);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace wfiso
