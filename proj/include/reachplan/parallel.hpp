#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace reachplan {

// Worker-count cap shared by the parallel loops (<= 0 means hardware default).
void set_worker_threads(int n);
int worker_threads();

// Runs fn(i) for i in [0, count) across workers. Each index is processed
// exactly once; results must be written to preallocated slots so the output
// is independent of scheduling.
inline void parallel_for(int count, const std::function<void(int)>& fn) {
    int workers = worker_threads();
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    workers = std::min(workers, count);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace reachplan
