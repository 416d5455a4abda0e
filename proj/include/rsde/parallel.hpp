#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace rsde {

/// Runs fn(i) for i in [0, n) on up to `workers` threads using a static
/// contiguous partition. Results must be written to index-addressed storage,
/// which keeps output independent of the worker count. The exception from the
/// lowest failing block is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t blocks = std::min<std::size_t>(workers, n);
    std::vector<std::exception_ptr> errors(blocks);
    std::vector<std::thread> threads;
    threads.reserve(blocks);
    for (std::size_t b = 0; b < blocks; ++b) {
        threads.emplace_back([&, b] {
            const std::size_t lo = n * b / blocks, hi = n * (b + 1) / blocks;
            try {
                for (std::size_t i = lo; i < hi; ++i) fn(i);
            } catch (...) {
                errors[b] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace rsde
