#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace abel {

/// Index-parallel loop over [0, n).  fn(i) must only touch slot i of any
/// shared output; iteration order is unspecified but every index runs once.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned hw = std::thread::hardware_concurrency();
    const std::size_t nthreads = std::min<std::size_t>(std::max(1u, hw), n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::thread> pool;
    pool.reserve(nthreads - 1);
    for (std::size_t k = 1; k < nthreads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

} // namespace abel
