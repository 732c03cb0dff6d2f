#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace ewc {

// Evaluate fn(0..R-1) into a vector, distributing fixed-size index chunks over
// a worker pool. Each value depends only on its index (replicates carry their
// own seeds), so the result is identical for any worker count; all statistics
// are then folded sequentially in index order by the callers.
inline std::vector<double> parallel_map(std::int64_t R, int threads,
                                        const std::function<double(std::int64_t)>& fn) {
    std::vector<double> values(static_cast<std::size_t>(R));
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    const std::int64_t chunk = 256;
    if (threads == 1 || R < 2 * chunk) {
        for (std::int64_t i = 0; i < R; ++i) values[static_cast<std::size_t>(i)] = fn(i);
        return values;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            try {
                while (true) {
                    const std::int64_t start = next.fetch_add(chunk);
                    if (start >= R || failed.load()) break;
                    const std::int64_t end = std::min(R, start + chunk);
                    for (std::int64_t i = start; i < end; ++i)
                        values[static_cast<std::size_t>(i)] = fn(i);
                }
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(error);
    return values;
}

}  // namespace ewc
