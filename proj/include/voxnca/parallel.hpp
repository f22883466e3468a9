#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace voxnca {

// Runs fn(0..n-1) across up to `workers` threads. Work items must be
// independent; callers that need determinism reduce results in index order
// afterwards. workers <= 1 runs inline.
inline void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int nthreads = std::min(workers, n);
    std::atomic<int> next{0};
    std::vector<std::thread> threads;
    std::exception_ptr error;
    std::mutex error_mutex;
    threads.reserve(size_t(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        threads.emplace_back([&] {
            while (true) {
                const int i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : threads) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace voxnca
