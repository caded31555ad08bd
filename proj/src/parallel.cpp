#include "fsnet/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fsnet {

namespace {

std::atomic<int> g_override{0};

int default_workers() {
    if (const char* env = std::getenv("FSNET_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

int worker_count() {
    const int o = g_override.load();
    return o > 0 ? o : default_workers();
}

void set_worker_count(int n) { g_override.store(n > 0 ? n : 0); }

void parallel_chunks(int chunk_count, const std::function<void(int)>& fn) {
    const int workers = std::min(worker_count(), chunk_count);
    if (workers <= 1) {
        for (int c = 0; c < chunk_count; ++c) fn(c);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&next, chunk_count, &fn] {
            for (int c = next.fetch_add(1); c < chunk_count; c = next.fetch_add(1)) fn(c);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fsnet
