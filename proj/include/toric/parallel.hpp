#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace toric {

namespace pdetail {
inline std::atomic<int>& thread_count_slot() {
    static std::atomic<int> n{0};
    return n;
}
}  // namespace pdetail

inline int default_thread_count() {
    int n = pdetail::thread_count_slot().load();
    if (n > 0) return n;
    if (const char* env = std::getenv("TORIC_SPECTRA_THREADS")) {
        int e = std::atoi(env);
        if (e > 0) return e;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? int(hw) : 1;
}

inline void set_thread_count(int n) { pdetail::thread_count_slot().store(n); }

/// Static-partition parallel map; results must be written to preallocated
/// slots so reductions stay deterministic regardless of the worker count.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    int workers = default_thread_count();
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
}

}  // namespace toric
