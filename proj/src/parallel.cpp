#include "cranio/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace cranio {

namespace {
std::atomic<int> g_jobs{1};
}

int num_jobs() { return g_jobs.load(); }

void set_num_jobs(int jobs) {
    if (jobs < 1) jobs = 1;
    int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw > 0) jobs = std::min(jobs, 4 * hw);
    g_jobs.store(jobs);
}

void parallel_for_chunks(std::int64_t n,
                         const std::function<void(std::int64_t, std::int64_t)>& fn) {
    int jobs = num_jobs();
    if (n <= 0) return;
    if (jobs <= 1 || n == 1) {
        fn(0, n);
        return;
    }
    std::int64_t workers = std::min<std::int64_t>(jobs, n);
    std::int64_t chunk = (n + workers - 1) / workers;
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (std::int64_t w = 0; w < workers; ++w) {
        std::int64_t b = w * chunk;
        std::int64_t e = std::min(n, b + chunk);
        if (b >= e) break;
        threads.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& t : threads) t.join();
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
    parallel_for_chunks(n, [&fn](std::int64_t b, std::int64_t e) {
        for (std::int64_t i = b; i < e; ++i) fn(i);
    });
}

} // namespace cranio
