#ifndef IRIS_PARALLEL_HPP
#define IRIS_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace iris {

// Runs fn(0..n-1) on up to `workers` threads. Callers write to disjoint,
// preallocated slots so results are independent of the worker count.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t nw = std::min<std::size_t>(std::max(workers, 1), n);
    if (nw <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (std::size_t w = 0; w < nw; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += nw) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

} // namespace iris

#endif
