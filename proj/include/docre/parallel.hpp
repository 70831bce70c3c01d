#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace docre {

// Runs fn(i) for i in [0, n) across `jobs` threads. fn must only write
// state owned by index i; results land in pre-sized slots so output order
// stays deterministic.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int n_workers = std::min(jobs, n);
    workers.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : workers) t.join();
}

}  // namespace docre
