#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace wkh {

// Execution policy for node loops. Parallel partitions an index range into
// contiguous chunks, one per worker; results that are accumulated per chunk
// and then combined in chunk order are deterministic up to floating-point
// reassociation. Sequential gives bit-exact reproducibility.
struct ExecPolicy {
    bool sequential = true;
    unsigned workers = 0; // 0: hardware_concurrency

    unsigned worker_count() const {
        if (sequential) return 1;
        unsigned n = workers ? workers : std::thread::hardware_concurrency();
        return n ? n : 1;
    }
};

template <class Body>
void parallel_for(std::size_t n, const ExecPolicy& exec, Body&& body) {
    const unsigned w = exec.worker_count();
    if (w <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(w);
    const std::size_t chunk = (n + w - 1) / w;
    for (unsigned t = 0; t < w; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

// Sum of body(i) over i in [0, n). Chunk partials are combined in chunk
// order, so the parallel result differs from sequential only by
// reassociation of the partial sums.
template <class Body>
double parallel_sum(std::size_t n, const ExecPolicy& exec, Body&& body) {
    const unsigned w = exec.worker_count();
    if (w <= 1 || n < 2) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += body(i);
        return acc;
    }
    const std::size_t chunk = (n + w - 1) / w;
    std::vector<double> partial((n + chunk - 1) / chunk, 0.0);
    std::vector<std::thread> pool;
    pool.reserve(partial.size());
    for (std::size_t t = 0; t < partial.size(); ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        pool.emplace_back([lo, hi, t, &partial, &body] {
            double acc = 0.0;
            for (std::size_t i = lo; i < hi; ++i) acc += body(i);
            partial[t] = acc;
        });
    }
    for (auto& th : pool) th.join();
    double acc = 0.0;
    for (double s : partial) acc += s;
    return acc;
}

} // namespace wkh
