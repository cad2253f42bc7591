#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace billiard {

/// Runs fn(begin, end) over contiguous chunks of [0, count) on up to `threads` threads.
/// The first exception thrown by any chunk is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const auto workers = static_cast<std::size_t>(std::clamp<long long>(threads, 1, static_cast<long long>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::exception_ptr error;
    std::mutex guard;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t begin = count * w / workers;
            const std::size_t end = count * (w + 1) / workers;
            pool.emplace_back([&, begin, end] {
                try {
                    fn(begin, end);
                } catch (...) {
                    std::lock_guard lock(guard);
                    if (!error) error = std::current_exception();
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace billiard
