#ifndef IGA_PARALLEL_HPP
#define IGA_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace iga {

/// Worker count: IGA_NUM_THREADS if set and positive, otherwise the
/// available hardware parallelism. Read once per process.
inline int worker_count() {
    static const int count = [] {
        if (const char* env = std::getenv("IGA_NUM_THREADS")) {
            try {
                const int n = std::stoi(env);
                if (n > 0) {
                    return n;
                }
            } catch (...) {
            }
        }
        return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }();
    return count;
}

/// Runs body(begin, end) over a static partition of [0, count). Chunks are
/// independent; results must not depend on the partition.
template <typename Body>
void parallel_for(long count, long min_chunk, Body&& body) {
    const long workers = std::min<long>(worker_count(), std::max(1L, count / std::max(1L, min_chunk)));
    if (workers <= 1) {
        body(0L, count);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    const long chunk = (count + workers - 1) / workers;
    for (long w = 1; w < workers; ++w) {
        const long b = w * chunk;
        const long e = std::min(count, b + chunk);
        if (b < e) {
            pool.emplace_back([&body, b, e] { body(b, e); });
        }
    }
    body(0L, std::min(count, chunk));
}

} // namespace iga

#endif // IGA_PARALLEL_HPP
