#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace wedgelab {

// Worker count from WEDGELAB_THREADS (default 1). Results never depend on it: every
// parallel loop writes disjoint slots and reductions run afterwards in index order.
inline std::size_t thread_count() {
    if (const char* env = std::getenv("WEDGELAB_THREADS")) {
        try {
            const long n = std::stol(env);
            if (n > 0) return static_cast<std::size_t>(n);
        } catch (...) {
        }
    }
    return 1;
}

template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const std::size_t workers = std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace wedgelab
